# dynamics.py
# Single-excitation propagation in momentum space (fixed-step RK4), transforms
# between momentum and site amplitudes, and the perturbative asymptotic bath.

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy import fft as sfft

from config import DEFAULT_DT, LOG_NAME, NORM_TOL
from coupling import CouplingProfile, MomentumCoupling, check_fits, gk_from_profile
from errors import ConfigurationError, IntegrationError
from floquet import DriveSchedule, time_average
from lattice import BathSpec, dispersion_grid, momentum_mesh
from reduction import ModeBlocks

log = logging.getLogger(f"{LOG_NAME}.dynamics")

Coupling = Union[CouplingProfile, MomentumCoupling, DriveSchedule, None]

_MARK_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class ExcitationState:
    """C_e and C_k (shape (N,)*d, grid order) at time t."""
    c_e: complex
    c_k: np.ndarray
    t: float
    spec: BathSpec

    @property
    def emitter_population(self) -> float:
        return abs(self.c_e) ** 2

    @property
    def bath_population(self) -> float:
        return math.fsum(np.abs(self.c_k.reshape(-1)) ** 2)

    @property
    def norm(self) -> float:
        return self.emitter_population + self.bath_population


@dataclass(frozen=True)
class EmitterSpec:
    """Emitter frequency (None -> band center) and its coupling: a static profile or
    G(k), a drive schedule, or None for a decoupled emitter."""
    coupling: Coupling = None
    omega_e: Optional[float] = None

    def __post_init__(self):
        if self.omega_e is not None and not np.isfinite(self.omega_e):
            raise ConfigurationError(f"omega_e must be finite (got {self.omega_e})")

    def frequency(self, spec: BathSpec) -> float:
        return spec.omega_a if self.omega_e is None else float(self.omega_e)

    @property
    def is_moving(self) -> bool:
        return isinstance(self.coupling, DriveSchedule)

    def effective(self) -> "EmitterSpec":
        """Static emitter whose profile is the schedule's time average."""
        if not self.is_moving:
            return self
        return EmitterSpec(time_average(self.coupling), self.omega_e)


@dataclass
class Trajectory:
    states: List[ExcitationState] = field(default_factory=list)
    trace_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    trace_ce: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.complex128))
    trace_norm: np.ndarray = field(default_factory=lambda: np.empty(0))
    norm_drift: float = 0.0
    dt: float = DEFAULT_DT

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __getitem__(self, i):
        return self.states[i]

    @property
    def final(self) -> ExcitationState:
        return self.states[-1]


# ----------------- Transforms -----------------

def bath_realspace(state: ExcitationState, spec: BathSpec,
                   workers: Optional[int] = None) -> np.ndarray:
    """C_n = N^{-d/2} sum_k C_k exp(i k.n), centered grid (index i <-> n = i - N/2)."""
    if state.c_k.shape != spec.shape:
        raise ConfigurationError(
            f"state of shape {state.c_k.shape} does not match bath grid {spec.shape}")
    return sfft.fftshift(sfft.ifftn(sfft.ifftshift(state.c_k), norm="ortho", workers=workers))


def bath_momentum(c_n: np.ndarray, spec: BathSpec, workers: Optional[int] = None) -> np.ndarray:
    """Inverse of bath_realspace."""
    if c_n.shape != spec.shape:
        raise ConfigurationError(f"field of shape {c_n.shape} does not match {spec.shape}")
    return sfft.fftshift(sfft.fftn(sfft.ifftshift(c_n), norm="ortho", workers=workers))


def asymptotic_bath(spec: BathSpec, gk: MomentumCoupling, omega_e: float, gamma_m: float,
                    t: float, normalize: bool = True) -> np.ndarray:
    """
    Late-time perturbative bath: C_k = g(k) e^{-i w(k) t} / (w(k) - w_e + i Gamma/2),
    with g(k) = G(k)/sqrt(N^d). Rescaled to unit norm unless normalize=False.
    """
    if not gamma_m > 0:
        raise ConfigurationError(f"Gamma_M must be positive (got {gamma_m})")
    if gk.values.shape != spec.shape:
        raise ConfigurationError(f"G(k) grid {gk.values.shape} does not match {spec.shape}")
    w = dispersion_grid(spec)
    ck = gk.per_mode() * np.exp(-1j * w * t) / (w - omega_e + 0.5j * gamma_m)
    if normalize:
        total = math.sqrt(math.fsum(np.abs(ck.reshape(-1)) ** 2))
        if total > 0:
            ck = ck / total
    return ck


# ----------------- Propagation -----------------

class _Propagator:
    """Owns the coupling evaluation and RK4 substeps for one run."""

    def __init__(self, spec: BathSpec, emitter: EmitterSpec, blocks: ModeBlocks,
                 workers: Optional[int]):
        self.spec = spec
        self.omega = dispersion_grid(spec).reshape(-1)
        self.omega_e = emitter.frequency(spec)
        self.blocks = blocks
        self.schedule: Optional[DriveSchedule] = None
        c = emitter.coupling
        if c is None:
            self.static = np.zeros(spec.n_modes, dtype=np.complex128)
        elif isinstance(c, MomentumCoupling):
            if c.values.shape != spec.shape:
                raise ConfigurationError(f"G(k) grid {c.values.shape} does not match {spec.shape}")
            self.static = c.per_mode().reshape(-1)
        elif isinstance(c, CouplingProfile):
            self.static = gk_from_profile(c, spec, workers).per_mode().reshape(-1)
        else:
            self.schedule = c
            self.static = None
            pos = c.offsets + np.asarray(c.center, dtype=np.int64)
            if pos.shape[1] != spec.dimension:
                raise ConfigurationError(f"{pos.shape[1]}-d schedule on a {spec.dimension}-d bath")
            check_fits(c.offsets, spec)
            kmesh = [k.reshape(-1) for k in momentum_mesh(spec)]
            scale = 1.0 / math.sqrt(spec.n_modes)
            self.phases = np.stack(
                [scale * np.exp(-1j * sum(k * p for k, p in zip(kmesh, row))) for row in pos])

    @property
    def piecewise(self) -> bool:
        return self.schedule is None or self.schedule.is_step

    def coupling_at(self, t: float) -> np.ndarray:
        if self.schedule is None:
            return self.static
        return self.schedule.envelopes(t) @ self.phases

    def _rhs(self, g, ce, ck):
        dce = -1j * (self.omega_e * ce + self.blocks.vdot(g, ck))
        dck = -1j * (self.omega * ck + g * ce)
        return dce, dck

    def step(self, ce: complex, ck: np.ndarray, t: float, h: float):
        if self.piecewise:
            g0 = gm = g1 = self.coupling_at(t + 0.5 * h)
        else:
            g0, gm, g1 = self.coupling_at(t), self.coupling_at(t + 0.5 * h), self.coupling_at(t + h)
        k1e, k1k = self._rhs(g0, ce, ck)
        k2e, k2k = self._rhs(gm, ce + 0.5 * h * k1e, ck + 0.5 * h * k1k)
        k3e, k3k = self._rhs(gm, ce + 0.5 * h * k2e, ck + 0.5 * h * k2k)
        k4e, k4k = self._rhs(g1, ce + h * k3e, ck + h * k3k)
        ce = ce + (h / 6.0) * (k1e + 2 * k2e + 2 * k3e + k4e)
        ck = ck + (h / 6.0) * (k1k + 2 * k2k + 2 * k3k + k4k)
        return ce, ck

    def norm(self, ce: complex, ck: np.ndarray) -> float:
        return abs(ce) ** 2 + self.blocks.norm2(ck)


def suggest_dt(dt: float, drift: float, limit: float) -> float:
    """Step that brings a failed run's norm drift under `limit`; RK4 drift scales as dt^5."""
    if not math.isfinite(drift) or drift <= 0:
        return dt / 4.0
    return 0.9 * dt * min(1.0, (limit / drift) ** 0.2)


def _merge_marks(*groups) -> np.ndarray:
    pts = np.unique(np.concatenate([np.asarray(g, dtype=float).reshape(-1) for g in groups]))
    keep = np.concatenate([[True], np.diff(pts) > _MARK_EPS])
    return pts[keep]


def _mark_index(marks: np.ndarray, t: float) -> int:
    return int(np.searchsorted(marks, t - _MARK_EPS))


def evolve(spec: BathSpec, emitter: EmitterSpec, t_final: float, dt: float = DEFAULT_DT,
           snapshot_times: Optional[Sequence[float]] = None, trace_every: Optional[float] = None,
           threads: Optional[int] = 1) -> Trajectory:
    """
    Integrate i dC_e/dt = w_e C_e + sum_k g(k)* C_k, i dC_k/dt = w(k) C_k + g(k) C_e from
    an excited emitter and empty bath. Every interval between marks (snapshots, trace
    times, envelope discontinuities, t_final) is cut into equal substeps no longer than dt.
    """
    if not dt > 0:
        raise ConfigurationError(f"dt must be positive (got {dt})")
    if not t_final >= 0:
        raise ConfigurationError(f"t_final must be >= 0 (got {t_final})")
    snaps = [float(t_final)] if snapshot_times is None else [float(s) for s in snapshot_times]
    if any(b < a for a, b in zip(snaps, snaps[1:])):
        raise ConfigurationError("snapshot times must be sorted")
    if snaps and (snaps[0] < 0 or snaps[-1] > t_final + _MARK_EPS):
        raise ConfigurationError(
            f"snapshot times must lie in [0, {t_final}] (got {snaps[0]} .. {snaps[-1]})")
    if trace_every is not None and not trace_every > 0:
        raise ConfigurationError(f"trace_every must be positive (got {trace_every})")
    if t_final * 2.0 * spec.J > spec.N / 2:
        log.warning("t_final=%g exceeds the wrap-around horizon N/(4J)=%g; wavefronts will "
                    "cross the periodic boundary", t_final, spec.N / (4.0 * spec.J))

    trace_t = (np.arange(int(np.floor(t_final / trace_every + _MARK_EPS)) + 1) * trace_every
               if trace_every else np.empty(0))
    workers = threads if threads and threads > 0 else -1
    blocks = ModeBlocks(spec.n_modes, threads)
    prop = _Propagator(spec, emitter, blocks, workers)
    bps = prop.schedule.breakpoints(t_final) if prop.schedule is not None else np.empty(0)
    marks = _merge_marks([0.0, t_final], snaps, trace_t, bps)

    snap_at = {}
    for s in snaps:
        snap_at.setdefault(_mark_index(marks, s), []).append(s)
    trace_at = {_mark_index(marks, t): i for i, t in enumerate(trace_t)}

    ce, ck = 1.0 + 0j, np.zeros(spec.n_modes, dtype=np.complex128)
    out = Trajectory(dt=float(dt))
    tr_ce = np.zeros(len(trace_t), dtype=np.complex128)
    tr_norm = np.zeros(len(trace_t))
    n_sub = 0

    def record(i: int, t: float, norm: float):
        for s in snap_at.get(i, ()):
            out.states.append(ExcitationState(complex(ce), ck.reshape(spec.shape).copy(), s, spec))
        if i in trace_at:
            tr_ce[trace_at[i]] = ce
            tr_norm[trace_at[i]] = norm

    with blocks:
        record(0, 0.0, 1.0)
        for i in range(1, len(marks)):
            a, b = marks[i - 1], marks[i]
            n = max(1, math.ceil((b - a) / dt - 1e-9))
            h = (b - a) / n
            for j in range(n):
                ce, ck = prop.step(ce, ck, a + j * h, h)
            n_sub += n
            norm = prop.norm(ce, ck)
            limit = NORM_TOL * max(b, 1.0)
            if not abs(norm - 1.0) <= limit:
                drift = abs(norm - 1.0)
                hint = suggest_dt(dt, drift, limit)
                raise IntegrationError(
                    f"norm drift {drift:.3e} at t={b:g} exceeds {limit:.1e}; "
                    f"reduce dt (try dt <= {hint:.3g})",
                    {"t": float(b), "norm": float(norm), "dt": float(dt), "limit": limit,
                     "substeps": n_sub, "suggested_dt": hint,
                     "omega_max_dt": float(np.max(np.abs(prop.omega)) * dt)})
            record(i, b, norm)

    out.trace_times, out.trace_ce, out.trace_norm = trace_t, tr_ce, tr_norm
    out.norm_drift = abs(prop.norm(ce, ck) - 1.0)
    log.info("evolve: N=%d d=%d t_final=%g substeps=%d drift=%.2e",
             spec.N, spec.dimension, t_final, n_sub, out.norm_drift)
    return out
