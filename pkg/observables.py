# observables.py
# Derived quantities of a run: quadrant fractions, cone populations, effective
# spectral density, survival fits and decay rates, field export.

import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import LOG_NAME, N_BINS
from coupling import MomentumCoupling
from dynamics import ExcitationState, Trajectory, bath_realspace
from errors import ConfigurationError, ExportError, UndefinedFractionError
from lattice import BathSpec, band_edges, dispersion_grid, index_mesh, site_mesh

log = logging.getLogger(f"{LOG_NAME}.observables")

BINARY_F64 = "binary_f64"
PGM8       = "pgm8"
FIELD_FORMATS = (BINARY_F64, PGM8)

EMPTY_BATH = 1e-15


# ----------------- Quadrant fractions -----------------

@dataclass(frozen=True)
class QuadrantFractions:
    F1: float
    F2: float
    F3: float
    F4: float
    t: float = 0.0

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.F1, self.F2, self.F3, self.F4)

    def __getitem__(self, q: int) -> float:
        """1-based quadrant index."""
        return self.as_tuple()[q - 1]


def _sign_weights(m: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """(positive, negative) share per axis label; k=0 and k=-pi split in half."""
    pos = np.where(m > 0, 1.0, 0.0)
    edge = (m == 0) | (m == -n // 2)
    pos = np.where(edge, 0.5, pos)
    neg = np.where(edge, 0.5, 1.0 - pos)
    return pos, neg


def quadrant_fractions(state: ExcitationState) -> QuadrantFractions:
    """
    F1: kx>0, ky>0   F2: kx<0, ky>0   F3: kx<0, ky<0   F4: kx>0, ky<0.
    Modes on kx or ky in {0, -pi} are split equally between the adjacent quadrants.
    """
    spec = state.spec
    if spec.dimension != 2:
        raise ConfigurationError(f"quadrant fractions need a 2-d state (got d={spec.dimension})")
    pop = np.abs(state.c_k) ** 2
    total = math.fsum(pop.reshape(-1))
    if total <= EMPTY_BATH:
        raise UndefinedFractionError(f"bath population {total:.3e} too small for fractions")
    mx, my = index_mesh(spec)
    xp, xn = _sign_weights(mx, spec.N)
    yp, yn = _sign_weights(my, spec.N)
    share = lambda wx, wy: math.fsum((pop * wx * wy).reshape(-1)) / total
    return QuadrantFractions(share(xp, yp), share(xn, yp), share(xn, yn), share(xp, yn),
                             float(state.t))


def miss_fraction(fractions: QuadrantFractions, target_quadrants: Sequence[int]) -> float:
    """
    1 - sum of the target quadrants' fractions.

    Quadrants are numbered counter-clockwise from (k_x > 0, k_y > 0). With G(n) the exact
    inverse of G(k) (phase e^{+ik.n}), the chiral design emits into quadrant 1 and the
    V-type design into quadrants 2 and 3 (designs.TARGET_QUADRANTS); the mirrored
    convention would target quadrant 3 and quadrants 1 and 4 instead.
    """
    if not target_quadrants or any(q not in (1, 2, 3, 4) for q in target_quadrants):
        raise ConfigurationError(f"target quadrants must be drawn from 1..4 (got {target_quadrants})")
    return 1.0 - math.fsum(fractions[q] for q in sorted(set(target_quadrants)))


# ----------------- Real-space metrics -----------------

def _displacements(spec: BathSpec, origin: Sequence[float]) -> List[np.ndarray]:
    """Minimum-image displacement of every site from `origin`, per axis."""
    N = spec.N
    return [np.mod(n - o + N / 2.0, N) - N / 2.0 for n, o in zip(site_mesh(spec), origin)]


def cone_mask(spec: BathSpec, direction: Sequence[float], half_angle: float,
              origin: Sequence[float] = (0.0, 0.0), two_sided: bool = True) -> np.ndarray:
    if spec.dimension != 2:
        raise ConfigurationError("cone metrics are defined for 2-d baths")
    u = np.asarray(direction, dtype=float)
    if u.shape != (2,) or not np.all(np.isfinite(u)) or np.hypot(*u) == 0:
        raise ConfigurationError(f"degenerate cone direction {direction}")
    if not 0 < half_angle <= np.pi / 2:
        raise ConfigurationError(f"half_angle must be in (0, pi/2] (got {half_angle})")
    u = u / np.hypot(*u)
    dx, dy = _displacements(spec, origin)
    r = np.hypot(dx, dy)
    proj = dx * u[0] + dy * u[1]
    if two_sided:
        proj = np.abs(proj)
    with np.errstate(invalid="ignore", divide="ignore"):
        inside = proj >= r * math.cos(half_angle)
    return inside & (r > 0)


def _site_population(state_or_field, spec: BathSpec) -> np.ndarray:
    if isinstance(state_or_field, ExcitationState):
        return np.abs(bath_realspace(state_or_field, spec)) ** 2
    grid = np.asarray(state_or_field)
    if grid.shape != spec.shape:
        raise ConfigurationError(f"field of shape {grid.shape} does not match {spec.shape}")
    return np.abs(grid) ** 2


def directional_mask_population(state: Union[ExcitationState, np.ndarray], spec: BathSpec,
                                direction: Sequence[float], half_angle: float,
                                origin: Sequence[float] = (0.0, 0.0),
                                two_sided: bool = True) -> float:
    """Share of the bath population inside the cone around `direction` seen from `origin`
    (normally the footprint centroid). Accepts a state or a centered site grid."""
    mask = cone_mask(spec, direction, half_angle, origin, two_sided)
    pop = _site_population(state, spec)
    total = math.fsum(pop.reshape(-1))
    if total <= EMPTY_BATH:
        raise UndefinedFractionError(f"bath population {total:.3e} too small for a cone metric")
    return math.fsum(pop[mask]) / total


def population_outside(state: Union[ExcitationState, np.ndarray], spec: BathSpec,
                       radius: int, origin: Sequence[float] = None) -> float:
    """Share of the bath population farther than `radius` (Chebyshev) from `origin`."""
    origin = (0.0,) * spec.dimension if origin is None else origin
    pop = _site_population(state, spec)
    total = math.fsum(pop.reshape(-1))
    if total <= EMPTY_BATH:
        return 0.0
    dist = np.max(np.abs(np.stack(_displacements(spec, origin))), axis=0)
    return math.fsum(pop[dist > radius]) / total


# ----------------- Spectral density and rates -----------------

@dataclass(frozen=True, eq=False)
class SpectralDensity:
    bin_edges: np.ndarray
    values: np.ndarray
    total_weight: float
    g_ref: float

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def width(self) -> float:
        return float(self.bin_edges[1] - self.bin_edges[0])

    def center_bin(self, omega: float) -> int:
        return int(np.clip(np.searchsorted(self.bin_edges, omega, side="right") - 1,
                           0, len(self.values) - 1))


def spectral_density(gk: MomentumCoupling, spec: BathSpec, n_bins: int = N_BINS,
                     g: Optional[float] = None) -> SpectralDensity:
    """D_eff(E) = sum_k |G(k)|^2 delta(E - w(k)) / (N^d g^2), binned over the band."""
    if int(n_bins) != n_bins or n_bins < 10:
        raise ConfigurationError(f"n_bins must be an integer >= 10 (got {n_bins})")
    if gk.values.shape != spec.shape:
        raise ConfigurationError(f"G(k) grid {gk.values.shape} does not match {spec.shape}")
    g_ref = float(g) if g else (gk.g_max or 1.0)
    lo, hi = band_edges(spec)
    edges = np.linspace(lo, hi, int(n_bins) + 1)
    w = np.clip(dispersion_grid(spec).reshape(-1), lo, hi)
    weight = np.abs(gk.flat) ** 2 / (spec.n_modes * g_ref ** 2)
    hist, _ = np.histogram(w, bins=edges, weights=weight)
    return SpectralDensity(edges, hist / (edges[1] - edges[0]), math.fsum(weight), g_ref)


def density_of_states(spec: BathSpec, n_bins: int = N_BINS) -> SpectralDensity:
    """Bare density of states (G = 1)."""
    ones = MomentumCoupling(np.ones(spec.shape), spec, design="uniform")
    return spectral_density(ones, spec, n_bins, g=1.0)


def default_rate_eta(spec: BathSpec) -> float:
    return 8.0 * np.pi * spec.J / spec.N


def golden_rule_rate(spec: BathSpec, gk: MomentumCoupling, omega_e: float,
                     eta: Optional[float] = None) -> float:
    """Gamma_M = (2 pi / N^d) sum_k |G(k)|^2 delta_eta(w_e - w(k)), Lorentzian delta."""
    eta = default_rate_eta(spec) if eta is None else float(eta)
    if not eta > 0:
        raise ConfigurationError(f"eta must be positive (got {eta})")
    x = omega_e - dispersion_grid(spec).reshape(-1)
    lor = (eta / np.pi) / (x * x + eta * eta)
    return 2.0 * np.pi * math.fsum(np.abs(gk.flat) ** 2 * lor) / spec.n_modes


@dataclass
class SurvivalFit:
    times: np.ndarray
    survival: np.ndarray                  # |C_e(t)|^2
    gamma_fit: float
    gamma_golden: Optional[float] = None
    window: Tuple[float, float] = (0.0, 0.0)
    warnings: List[str] = field(default_factory=list)


def survival_series(trajectory: Union[Trajectory, Sequence[ExcitationState]]
                    ) -> Tuple[np.ndarray, np.ndarray]:
    """(t, |C_e|^2) from the trace when one was recorded, else from the states."""
    if isinstance(trajectory, Trajectory) and len(trajectory.trace_times):
        return np.asarray(trajectory.trace_times, float), np.abs(trajectory.trace_ce) ** 2
    states = list(trajectory)
    return (np.array([s.t for s in states], dtype=float),
            np.array([s.emitter_population for s in states], dtype=float))


def survival_and_rate(trajectory: Union[Trajectory, Sequence[ExcitationState]],
                      fit_window: Tuple[float, float], spec: Optional[BathSpec] = None,
                      gk: Optional[MomentumCoupling] = None, omega_e: Optional[float] = None,
                      eta: Optional[float] = None) -> SurvivalFit:
    """Least-squares fit of ln|C_e|^2 over the window, plus the golden-rule estimate
    when (spec, gk) are given."""
    t, p = survival_series(trajectory)
    t0, t1 = float(fit_window[0]), float(fit_window[1])
    if not t1 > t0:
        raise ConfigurationError(f"empty fit window {fit_window}")
    sel = (t >= t0 - 1e-12) & (t <= t1 + 1e-12)
    if np.count_nonzero(sel) < 10:
        raise ConfigurationError(
            f"fit window {fit_window} holds {np.count_nonzero(sel)} samples; need at least 10")
    ts, ps = t[sel], p[sel]
    slope = np.polyfit(ts, np.log(np.clip(ps, 1e-300, None)), 1)[0]
    gamma = float(-slope)

    warnings = []
    if np.any(np.diff(ps) > 1e-9 * max(ps.max(), 1e-300)):
        warnings.append("survival is not monotone inside the fit window")
    if ps[0] - ps[-1] < 1e-3 * ps[0]:
        warnings.append("survival is nearly flat inside the fit window")
    for w in warnings:
        log.warning("survival fit [%g, %g]: %s", t0, t1, w)

    golden = None
    if spec is not None and gk is not None:
        golden = golden_rule_rate(spec, gk, spec.omega_a if omega_e is None else omega_e, eta)
    return SurvivalFit(t, p, gamma, golden, (t0, t1), warnings)


# ----------------- Field export -----------------

def sidecar_path(path: str) -> str:
    return path + ".json"


def export_field(grid: np.ndarray, path: str, fmt: str = BINARY_F64, t: Optional[float] = None,
                 metadata: Optional[Dict[str, Any]] = None):
    """Write |value|^2 as raw little-endian float64 (plus JSON sidecar) or as 8-bit PGM."""
    if fmt not in FIELD_FORMATS:
        raise ConfigurationError(f"Unknown field format '{fmt}' (choose from {FIELD_FORMATS})")
    inten = np.ascontiguousarray(np.abs(np.asarray(grid)) ** 2, dtype="<f8")
    try:
        d = os.path.dirname(path)
        if d:
            os.makedirs(d, exist_ok=True)
        if fmt == BINARY_F64:
            with open(path, "wb") as f:
                f.write(inten.tobytes(order="C"))
            header = {"shape": list(inten.shape), "layout": "row-major", "dtype": "<f8",
                      "quantity": "abs2", "time": t, "metadata": metadata or {}}
            with open(sidecar_path(path), "w", encoding="utf-8") as f:
                json.dump(header, f, indent=1, sort_keys=True)
            return
        if inten.ndim != 2:
            raise ConfigurationError(f"pgm8 needs a 2-d field (got shape {inten.shape})")
        lo, hi = float(inten.min()), float(inten.max())
        span = hi - lo
        pix = np.zeros(inten.shape, dtype=np.uint8) if span == 0 else \
            np.rint((inten - lo) / span * 255.0).astype(np.uint8)
        h, w = inten.shape
        head = f"P5\n# scale min={lo!r} max={hi!r}\n{w} {h}\n255\n".encode("ascii")
        with open(path, "wb") as f:
            f.write(head + pix.tobytes(order="C"))
    except OSError as e:
        raise ExportError(f"Cannot write field {path}: {e}") from e


def read_field(path: str) -> np.ndarray:
    """Read a binary_f64 field back using its sidecar."""
    try:
        with open(sidecar_path(path), "r", encoding="utf-8") as f:
            header = json.load(f)
        raw = np.fromfile(path, dtype="<f8")
    except OSError as e:
        raise ExportError(f"Cannot read field {path}: {e}") from e
    return raw.reshape(header["shape"])


def read_pgm(path: str) -> Tuple[np.ndarray, float, float]:
    """(pixels, min, max) of a pgm8 field."""
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise ExportError(f"Cannot read field {path}: {e}") from e
    lines = data.split(b"\n", 4)
    scale = dict(kv.split("=") for kv in lines[1].decode("ascii")[len("# scale "):].split())
    w, h = (int(x) for x in lines[2].split())
    pix = np.frombuffer(lines[4], dtype=np.uint8, count=w * h).reshape(h, w)
    return pix, float(scale["min"]), float(scale["max"])
