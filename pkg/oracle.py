# oracle.py
# Dense real-space single-excitation Hamiltonian for small lattices, used to check
# the momentum-space propagation independently.

import logging
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy import fft as sfft
from scipy.integrate import solve_ivp
from scipy.linalg import eigh

from config import DENSE_MAX_DIM, LOG_NAME
from coupling import CouplingProfile, MomentumCoupling, check_fits, profile_grid
from dynamics import EmitterSpec, ExcitationState, bath_momentum
from errors import ConfigurationError
from lattice import BCC_NEIGHBOURS, SQUARE_TB, BathSpec

log = logging.getLogger(f"{LOG_NAME}.oracle")


def _neighbours(spec: BathSpec) -> Tuple[Tuple[int, ...], ...]:
    if spec.model == SQUARE_TB:
        out = []
        for ax in range(spec.dimension):
            for s in (1, -1):
                v = [0] * spec.dimension
                v[ax] = s
                out.append(tuple(v))
        return tuple(out)
    return BCC_NEIGHBOURS


def _check_size(spec: BathSpec):
    dim = spec.n_modes + 1
    if dim > DENSE_MAX_DIM:
        raise ConfigurationError(
            f"dense oracle refused: dimension {dim} (N={spec.N}, d={spec.dimension}) "
            f"exceeds {DENSE_MAX_DIM}")


def _site_index(spec: BathSpec, positions: np.ndarray) -> np.ndarray:
    """Flat centered-grid index of absolute positions."""
    idx = np.mod(np.asarray(positions) + spec.N // 2, spec.N)
    return np.ravel_multi_index(tuple(idx.T), spec.shape)


def bath_hamiltonian(spec: BathSpec) -> np.ndarray:
    """Sites only: omega_a on the diagonal, -J between periodic neighbours."""
    _check_size(spec)
    M = spec.n_modes
    H = np.zeros((M, M), dtype=np.complex128)
    H[np.arange(M), np.arange(M)] = spec.omega_a
    idx = np.arange(M).reshape(spec.shape)
    for delta in _neighbours(spec):
        # nbr[n] is the flat index of site n + delta
        nbr = np.roll(idx, shift=tuple(-d for d in delta), axis=tuple(range(spec.dimension)))
        H[nbr.reshape(-1), idx.reshape(-1)] += -spec.J
    return H


def _static_sites(spec: BathSpec, coupling) -> np.ndarray:
    """g_n on the centered grid, flat."""
    if coupling is None:
        return np.zeros(spec.n_modes, dtype=np.complex128)
    if isinstance(coupling, CouplingProfile):
        return sfft.fftshift(profile_grid(coupling, spec)).reshape(-1)
    if isinstance(coupling, MomentumCoupling):
        return sfft.fftshift(sfft.ifftn(sfft.ifftshift(coupling.values))).reshape(-1)
    raise TypeError(f"not a static coupling: {type(coupling).__name__}")


def build_hamiltonian(spec: BathSpec, emitter: EmitterSpec, t: float = 0.0) -> np.ndarray:
    """Basis: [emitter, sites row-major over n = -N/2..N/2-1]. Schedules use Omega(t)."""
    M = spec.n_modes
    H = np.zeros((M + 1, M + 1), dtype=np.complex128)
    H[1:, 1:] = bath_hamiltonian(spec)
    H[0, 0] = emitter.frequency(spec)
    if emitter.is_moving:
        sched = emitter.coupling
        check_fits(sched.offsets, spec)
        g = np.zeros(M, dtype=np.complex128)
        sites = _site_index(spec, sched.offsets + np.asarray(sched.center))
        g[sites] = sched.envelopes(t)
    else:
        g = _static_sites(spec, emitter.coupling)
    H[1:, 0] = g
    H[0, 1:] = np.conj(g)
    return H


def _to_state(psi: np.ndarray, t: float, spec: BathSpec) -> ExcitationState:
    c_k = bath_momentum(psi[1:].reshape(spec.shape), spec)
    return ExcitationState(complex(psi[0]), c_k, float(t), spec)


def dense_oracle_states(spec: BathSpec, emitter: EmitterSpec,
                        times: Sequence[float]) -> List[ExcitationState]:
    """Exact states at each of the sorted `times` (eigendecomposition or tight ODE solve)."""
    _check_size(spec)
    times = [float(t) for t in times]
    if any(t < 0 for t in times) or any(b < a for a, b in zip(times, times[1:])):
        raise ConfigurationError("oracle times must be sorted and non-negative")
    psi0 = np.zeros(spec.n_modes + 1, dtype=np.complex128)
    psi0[0] = 1.0

    if not emitter.is_moving:
        H = build_hamiltonian(spec, emitter)
        E, V = eigh(H)
        c0 = V.conj().T @ psi0
        return [_to_state(V @ (np.exp(-1j * E * t) * c0), t, spec) for t in times]

    sched = emitter.coupling
    if sched.is_step:
        # piecewise-constant Hamiltonians between envelope switches
        t_end = times[-1] if times else 0.0
        marks = np.unique(np.concatenate([[0.0], sched.breakpoints(t_end), times]))
        cache: Dict[tuple, Tuple[np.ndarray, np.ndarray]] = {}
        psi, out, now = psi0, [], 0.0
        for b in marks[1:]:
            mid = 0.5 * (now + b)
            key = tuple(sched.envelopes(mid))
            if key not in cache:
                cache[key] = eigh(build_hamiltonian(spec, emitter, mid))
            E, V = cache[key]
            psi = V @ (np.exp(-1j * E * (b - now)) * (V.conj().T @ psi))
            now = b
            out.extend(_to_state(psi, t, spec) for t in times if abs(t - b) < 1e-12)
        if times and times[0] == 0.0:
            out.insert(0, _to_state(psi0, 0.0, spec))
        return out

    Hb = build_hamiltonian(spec, EmitterSpec(None, emitter.omega_e))
    sites = _site_index(spec, sched.offsets + np.asarray(sched.center))

    def rhs(t, y):
        out = Hb @ y
        om = sched.envelopes(t)
        out[0] += np.dot(np.conj(om), y[1 + sites])
        out[1 + sites] += om * y[0]
        return -1j * out

    if not times:
        return []
    if times[-1] == 0.0:
        return [_to_state(psi0, 0.0, spec) for _ in times]
    sol = solve_ivp(rhs, (0.0, times[-1]), psi0, method="DOP853", t_eval=times,
                    rtol=1e-12, atol=1e-13)
    if not sol.success:
        raise ConfigurationError(f"dense oracle ODE solve failed: {sol.message}")
    return [_to_state(sol.y[:, i], t, spec) for i, t in enumerate(times)]


def dense_oracle_evolve(spec: BathSpec, emitter: EmitterSpec, t_final: float) -> ExcitationState:
    """State at t_final, in momentum space for comparison with evolve()."""
    if not t_final >= 0:
        raise ConfigurationError(f"t_final must be >= 0 (got {t_final})")
    log.debug("dense oracle: dim=%d t_final=%g", spec.n_modes + 1, t_final)
    return dense_oracle_states(spec, emitter, [t_final])[0]
