# collective.py
# Born-Markov coherent (J) and dissipative (gamma) couplings between giant emitters
# sharing one G(k), with a finite pole regularizer eta and its extrapolation to 0+.

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sfft
from scipy.linalg import eigvalsh

import layout
from config import LOG_NAME
from coupling import MomentumCoupling
from errors import ConfigurationError
from lattice import BathSpec, dispersion_grid

log = logging.getLogger(f"{LOG_NAME}.collective")


@dataclass(eq=False)
class CollectiveMatrices:
    J: np.ndarray
    gamma: np.ndarray
    positions: List[Tuple[int, ...]]
    eta: float
    omega_e: float
    hermitian_residue: float = 0.0
    uncertainty_J: Optional[np.ndarray] = None
    uncertainty_gamma: Optional[np.ndarray] = None
    eta_list: Tuple[float, ...] = ()
    spreads: List[float] = field(default_factory=list)

    @property
    def n_emitters(self) -> int:
        return len(self.positions)

    def collective_rates(self) -> np.ndarray:
        """Eigenvalues of gamma, ascending (sub- to superradiant)."""
        return eigvalsh(self.gamma)

    def effective_hamiltonian(self) -> np.ndarray:
        return self.J - 0.5j * self.gamma

    def psd_margin(self) -> float:
        """Smallest gamma eigenvalue relative to the largest."""
        ev = self.collective_rates()
        top = max(abs(ev[-1]), 1e-300)
        return float(ev[0] / top)


def default_eta(spec: BathSpec) -> float:
    return 16.0 * np.pi * spec.J / spec.N


def default_eta_list(spec: BathSpec) -> List[float]:
    return [f * np.pi * spec.J / spec.N for f in (32.0, 16.0, 8.0)]


def eta_floor(spec: BathSpec) -> float:
    """Twice the level spacing 8J/N."""
    return 16.0 * spec.J / spec.N


def _check_positions(positions: Sequence[Sequence[int]], spec: BathSpec) -> List[Tuple[int, ...]]:
    if not len(positions):
        raise ConfigurationError("need at least one emitter position")
    pos = [tuple(int(x) for x in p) for p in positions]
    if any(len(p) != spec.dimension for p in pos):
        raise ConfigurationError(f"positions must be {spec.dimension}-d lattice vectors")
    if len(set(pos)) != len(pos):
        log.warning("duplicate emitter positions %s: gamma will be rank deficient", pos)
    return pos


def _hermitize(m: np.ndarray) -> Tuple[np.ndarray, float]:
    h = 0.5 * (m + m.conj().T)
    scale = max(float(np.max(np.abs(m))), 1e-300)
    return h, float(np.max(np.abs(m - m.conj().T))) / (2.0 * scale)


def collective_couplings(spec: BathSpec, gk_common: MomentumCoupling,
                         positions: Sequence[Sequence[int]], omega_e: float, eta: float,
                         workers: Optional[int] = None) -> CollectiveMatrices:
    """
    J_ij - i gamma_ij / 2 = (1/N^d) sum_k |G(k)|^2 e^{ik.(n_i - n_j)} / (w_e - w(k) + i eta).
    Every displacement is read off one inverse FFT of the principal and Lorentzian parts.
    """
    if not eta > 0:
        raise ConfigurationError(f"eta must be positive (got {eta})")
    if gk_common.values.shape != spec.shape:
        raise ConfigurationError(
            f"G(k) grid {gk_common.values.shape} does not match {spec.shape}")
    pos = _check_positions(positions, spec)
    x = omega_e - dispersion_grid(spec)
    g2 = np.abs(gk_common.values) ** 2
    denom = x * x + eta * eta
    # sum_k A(k) e^{ik.r} / N^d == ifftn(A)[r]
    pv = sfft.ifftn(sfft.ifftshift(g2 * x / denom), workers=workers)
    lor = sfft.ifftn(sfft.ifftshift(g2 * 2.0 * eta / denom), workers=workers)

    n = len(pos)
    J = np.zeros((n, n), dtype=np.complex128)
    gamma = np.zeros((n, n), dtype=np.complex128)
    for i, a in enumerate(pos):
        for j, b in enumerate(pos):
            r = tuple(np.mod(np.subtract(a, b), spec.N))
            J[i, j] = pv[r]
            gamma[i, j] = lor[r]
    J, res_j = _hermitize(J)
    gamma, res_g = _hermitize(gamma)
    return CollectiveMatrices(J, gamma, pos, float(eta), float(omega_e), max(res_j, res_g))


def _lagrange_at_zero(xs: Sequence[float]) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    w = np.ones(len(xs))
    for i in range(len(xs)):
        for j in range(len(xs)):
            if i != j:
                w[i] *= xs[j] / (xs[j] - xs[i])
    return w


def eta_extrapolation(spec: BathSpec, gk: MomentumCoupling, positions: Sequence[Sequence[int]],
                      omega_e: float, eta_list: Optional[Sequence[float]] = None,
                      workers: Optional[int] = None) -> CollectiveMatrices:
    """
    Polynomial (Richardson) extrapolation of every entry to eta -> 0+. The uncertainty is
    the change in the extrapolated value when the largest eta is left out.
    """
    etas = [float(e) for e in (eta_list if eta_list is not None else default_eta_list(spec))]
    if len(etas) < 3:
        raise ConfigurationError(f"eta extrapolation needs at least 3 values (got {len(etas)})")
    if any(b >= a for a, b in zip(etas, etas[1:])):
        raise ConfigurationError("eta values must be strictly decreasing")
    floor = eta_floor(spec)
    if etas[-1] < floor:
        raise ConfigurationError(
            f"eta={etas[-1]:.4g} is below the level-spacing floor {floor:.4g} for N={spec.N}")

    runs = [collective_couplings(spec, gk, positions, omega_e, e, workers) for e in etas]
    w_all = _lagrange_at_zero(etas)
    w_sub = _lagrange_at_zero(etas[1:])

    def extrapolate(attr: str) -> Tuple[np.ndarray, np.ndarray]:
        stack = np.stack([getattr(r, attr) for r in runs])
        full = np.tensordot(w_all, stack, axes=1)
        sub = np.tensordot(w_sub, stack[1:], axes=1)
        return full, np.abs(full - sub)

    J, dJ = extrapolate("J")
    gamma, dg = extrapolate("gamma")
    J, res_j = _hermitize(J)
    gamma, res_g = _hermitize(gamma)
    spreads = [float(max(np.max(np.abs(a.J - b.J)), np.max(np.abs(a.gamma - b.gamma))))
               for a, b in zip(runs, runs[1:])]
    log.info("eta extrapolation over %s: spreads %s", etas, spreads)
    return CollectiveMatrices(J, gamma, runs[0].positions, etas[-1], float(omega_e),
                              max(res_j, res_g), dJ, dg, tuple(etas), spreads)


# ----------------- Export -----------------

def matrix_rows(m: np.ndarray) -> List[List[float]]:
    """One row per matrix row: re, im pairs per column."""
    return [[v for z in row for v in (z.real, z.imag)] for row in np.asarray(m)]


def export_matrices(cm: CollectiveMatrices, directory: str,
                    design: Optional[str] = None) -> Dict[str, str]:
    """J.csv and gamma.csv (plus uncertainties when present) with a metadata header."""
    meta = {"eta": cm.eta, "omega_e": cm.omega_e, "design": design or "",
            "positions": ";".join(",".join(str(x) for x in p) for p in cm.positions),
            "hermitian_residue": cm.hermitian_residue}
    header = [f"{p}{j + 1}" for j in range(cm.n_emitters) for p in ("re", "im")]
    out = {}
    items = [("J", cm.J), ("gamma", cm.gamma)]
    if cm.uncertainty_J is not None:
        items += [("J_uncertainty", cm.uncertainty_J), ("gamma_uncertainty", cm.uncertainty_gamma)]
    for name, m in items:
        path = layout.join(directory, f"{name}.csv")
        layout.write_csv(path, header, matrix_rows(m), meta)
        out[name] = path
    return out
