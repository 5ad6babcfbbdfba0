# floquet.py
# Periodic drive schedules of a moving emitter, their time average (the effective
# giant-emitter coupling), harmonic decomposition and first-order correction.

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import zeta

from config import J_MAX, LOG_NAME
from coupling import CouplingProfile
from errors import ConfigurationError, UnsupportedScheduleError

log = logging.getLogger(f"{LOG_NAME}.floquet")

STEP = "step"
RAISED_COSINE = "raised_cosine"
ENVELOPES = (STEP, RAISED_COSINE)


@dataclass(frozen=True)
class Segment:
    """One probed site. Step: active on [start, end) fraction of the period.
    Raised cosine: amplitude * cos^2((omega t - phase)/2)."""
    offset: Tuple[int, ...]
    amplitude: complex
    envelope: str = STEP
    start: float = 0.0
    end: float = 1.0
    phase: float = 0.0


@dataclass(frozen=True, eq=False)
class DriveSchedule:
    omega: float
    segments: Tuple[Segment, ...]
    center: Tuple[int, ...] = ()

    def __post_init__(self):
        if not np.isfinite(self.omega) or self.omega <= 0:
            raise ConfigurationError(f"drive frequency must be positive (got {self.omega})")
        if not self.segments:
            raise ConfigurationError("schedule needs at least one segment")
        kinds = {s.envelope for s in self.segments}
        if not kinds <= set(ENVELOPES):
            raise ConfigurationError(f"Unknown envelope(s) {sorted(kinds - set(ENVELOPES))}")
        offs = [tuple(s.offset) for s in self.segments]
        if len(set(offs)) != len(offs):
            raise ConfigurationError("schedule positions must be distinct")
        if kinds == {STEP}:
            windows = sorted((s.start, s.end) for s in self.segments)
            edge = 0.0
            for a, b in windows:
                if not np.isclose(a, edge, atol=1e-12) or b <= a:
                    raise ConfigurationError("step windows must tile [0, T) exactly once")
                edge = b
            if not np.isclose(edge, 1.0, atol=1e-12):
                raise ConfigurationError("step windows must tile [0, T) exactly once")
        d = len(offs[0])
        object.__setattr__(self, "center", tuple(self.center) if len(self.center) else (0,) * d)

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.omega

    @property
    def n_positions(self) -> int:
        return len(self.segments)

    @property
    def offsets(self) -> np.ndarray:
        return np.array([s.offset for s in self.segments], dtype=np.int64)

    @property
    def peak_amplitudes(self) -> np.ndarray:
        return np.array([s.amplitude for s in self.segments], dtype=np.complex128)

    @property
    def is_step(self) -> bool:
        return all(s.envelope == STEP for s in self.segments)

    @property
    def g_max(self) -> float:
        return float(np.max(np.abs(self.peak_amplitudes)))

    def envelopes(self, t: float) -> np.ndarray:
        """Omega_alpha(t) for every segment."""
        out = np.zeros(self.n_positions, dtype=np.complex128)
        frac = (t / self.period) % 1.0
        for a, s in enumerate(self.segments):
            if s.envelope == STEP:
                if s.start <= frac < s.end:
                    out[a] = s.amplitude
            else:
                out[a] = s.amplitude * np.cos(0.5 * (self.omega * t - s.phase)) ** 2
        return out

    def breakpoints(self, t_final: float) -> np.ndarray:
        """Envelope discontinuities in (0, t_final); empty for smooth schedules."""
        if not self.is_step:
            return np.empty(0)
        fracs = sorted({s.start for s in self.segments} | {s.end for s in self.segments})
        T = self.period
        n_per = int(np.ceil(t_final / T)) + 1
        pts = np.array([(p + f) * T for p in range(n_per) for f in fracs])
        pts = pts[(pts > 0) & (pts < t_final)]
        return np.unique(pts)


def step_schedule(positions: Sequence[Sequence[int]], amplitudes: Sequence[complex],
                  omega: float, center: Sequence[int] = ()) -> DriveSchedule:
    """Each site alpha probed with constant amplitude during [(alpha-1)T/N_p, alpha T/N_p)."""
    if not len(positions):
        raise ConfigurationError("step schedule needs at least one position")
    if len(positions) != len(amplitudes):
        raise ConfigurationError(
            f"{len(positions)} positions but {len(amplitudes)} amplitudes")
    n_p = len(positions)
    segs = tuple(Segment(tuple(int(x) for x in p), complex(g), STEP, a / n_p, (a + 1) / n_p)
                 for a, (p, g) in enumerate(zip(positions, amplitudes)))
    return DriveSchedule(float(omega), segs, tuple(center))


def smooth_two_site_schedule(g: float, omega: float,
                             positions: Sequence[Sequence[int]] = ((0, 0), (1, 1)),
                             center: Sequence[int] = ()) -> DriveSchedule:
    """Omega_1 = g cos^2(omega t/2), Omega_2 = g sin^2(omega t/2)."""
    p1, p2 = (tuple(int(x) for x in p) for p in positions)
    segs = (Segment(p1, complex(g), RAISED_COSINE, phase=0.0),
            Segment(p2, complex(g), RAISED_COSINE, phase=np.pi))
    return DriveSchedule(float(omega), segs, tuple(center))


def time_average(schedule: DriveSchedule) -> CouplingProfile:
    """(1/T) int_0^T Omega_alpha(t) dt per site, in closed form."""
    amps = []
    for s in schedule.segments:
        if s.envelope == STEP:
            if schedule.is_step and np.isclose(s.end - s.start, 1.0 / schedule.n_positions):
                amps.append(s.amplitude / schedule.n_positions)
            else:
                amps.append(s.amplitude * (s.end - s.start))
        else:
            amps.append(s.amplitude / 2.0)
    return CouplingProfile(schedule.offsets, amps, schedule.center,
                           1.0 / schedule.n_positions, "time-average")


# ----------------- Harmonics -----------------

def step_coefficient(j: int, alpha: int, n_p: int) -> complex:
    """C_{j,alpha} = e^{-i 2 pi alpha j/N_p} (e^{i 2 pi j/N_p} - 1) / (2 pi i j), alpha 1-based."""
    if j == 0:
        return 1.0 / n_p
    if j % n_p == 0:
        return 0j
    return (np.exp(-2j * np.pi * alpha * j / n_p) * (np.exp(2j * np.pi * j / n_p) - 1.0)
            / (2j * np.pi * j))


def _window_coefficient(j: int, start: float, end: float) -> complex:
    if j == 0:
        return end - start
    return (np.exp(-2j * np.pi * j * start) - np.exp(-2j * np.pi * j * end)) / (2j * np.pi * j)


@dataclass(frozen=True, eq=False)
class HarmonicDecomposition:
    offsets: np.ndarray
    center: Tuple[int, ...]
    dc: np.ndarray                                      # V^(0) amplitudes
    coefficients: Dict[int, np.ndarray] = field(default_factory=dict)   # C_{j,alpha}
    harmonics: Dict[int, np.ndarray] = field(default_factory=dict)      # C_{j,alpha} g_alpha
    j_max: int = J_MAX
    omega: float = 1.0
    tail_bound: Optional[np.ndarray] = None

    def dc_profile(self) -> CouplingProfile:
        return CouplingProfile(self.offsets, self.dc, self.center, 1.0 / len(self.dc), "dc")

    def profile(self, j: int) -> Optional[CouplingProfile]:
        """V^(j) as a CouplingProfile, or None when the harmonic vanishes."""
        amps = self.harmonics[j]
        if not np.any(amps != 0):
            return None
        return CouplingProfile(self.offsets, amps, self.center, 1.0, f"harmonic {j}")

    def reconstruct(self, t: float) -> np.ndarray:
        out = self.dc.astype(np.complex128).copy()
        for j, amps in self.harmonics.items():
            out += amps * np.exp(1j * j * self.omega * t)
        return out


def harmonic_coefficients(schedule: DriveSchedule, j_max: int = J_MAX) -> HarmonicDecomposition:
    if int(j_max) != j_max or j_max < 1:
        raise ConfigurationError(f"j_max must be a positive integer (got {j_max})")
    n_p = schedule.n_positions
    g = schedule.peak_amplitudes
    coeffs: Dict[int, np.ndarray] = {}
    for j in list(range(-j_max, 0)) + list(range(1, j_max + 1)):
        c = np.zeros(n_p, dtype=np.complex128)
        for a, s in enumerate(schedule.segments):
            if s.envelope == STEP:
                if schedule.is_step and np.isclose(s.end - s.start, 1.0 / n_p):
                    c[a] = step_coefficient(j, a + 1, n_p)
                else:
                    c[a] = _window_coefficient(j, s.start, s.end)
            elif abs(j) == 1:
                # cos^2((wt - phi)/2) = 1/2 + (e^{i(wt-phi)} + e^{-i(wt-phi)})/4
                c[a] = 0.25 * np.exp(-1j * j * s.phase)
        coeffs[j] = c
    dc = time_average(schedule).amplitudes.copy()

    tail = None
    if schedule.is_step:
        # Parseval: sum_{j != 0} |C_j|^2 = w (1 - w) for a window of fractional length w
        widths = np.array([s.end - s.start for s in schedule.segments])
        kept = sum(np.abs(c) ** 2 for c in coeffs.values())
        tail = np.abs(g) * np.sqrt(np.clip(widths * (1.0 - widths) - kept, 0.0, None))

    return HarmonicDecomposition(
        offsets=schedule.offsets, center=schedule.center, dc=dc,
        coefficients=coeffs, harmonics={j: c * g for j, c in coeffs.items()},
        j_max=int(j_max), omega=schedule.omega, tail_bound=tail)


# ----------------- First-order (1/omega) correction -----------------

def _sin_two_pi_fraction(r: int, n_p: int) -> float:
    """sin(2 pi r / N_p), exactly zero when 2r = 0 mod N_p."""
    if (2 * r) % n_p == 0:
        return 0.0
    return float(np.sin(2.0 * np.pi * (r % n_p) / n_p))


@dataclass(frozen=True, eq=False)
class FirstOrderCorrection:
    coefficients: np.ndarray   # K_{alpha beta} of sum K a^dag_alpha a_beta sigma_z
    offsets: np.ndarray
    norm: float                # largest singular value in the single-excitation sector
    norm_bound: float          # 4 g^2 N_p^2 zeta(3) / (pi^2 omega)
    j_max: int


def first_order_bound(g_max: float, n_p: int, omega: float) -> float:
    return 4.0 * g_max ** 2 * n_p ** 2 * float(zeta(3)) / (np.pi ** 2 * omega)


def first_order_correction(schedule: DriveSchedule, j_max: int = J_MAX) -> FirstOrderCorrection:
    """
    H^(1) = sum_{alpha,beta} K_{alpha beta} a^dag_alpha a_beta sigma_z with
    K = sum_j 4 i g_a g_b^* sin^2(j pi/N_p) sin(2 pi (b - a) j/N_p) / (pi^2 j^3 omega).
    """
    if not schedule.is_step:
        raise UnsupportedScheduleError(
            "first-order correction has a closed form only for step schedules")
    if int(j_max) != j_max or j_max < 1:
        raise ConfigurationError(f"j_max must be a positive integer (got {j_max})")
    n_p = schedule.n_positions
    g = schedule.peak_amplitudes
    K = np.zeros((n_p, n_p), dtype=np.complex128)
    for j in range(1, int(j_max) + 1):
        s2 = _sin_two_pi_fraction(j, 2 * n_p) ** 2      # sin^2(j pi / N_p)
        if s2 == 0.0:
            continue
        pref = 4.0 * s2 / (np.pi ** 2 * j ** 3 * schedule.omega)
        for a in range(n_p):
            for b in range(n_p):
                s = _sin_two_pi_fraction((b - a) * j, n_p)
                if s:
                    K[a, b] += 1j * pref * g[a] * np.conj(g[b]) * s
    # sigma_z = -1/2 once the excitation sits in the bath
    norm = 0.5 * float(np.linalg.norm(K, 2)) if n_p > 1 else 0.0
    bound = first_order_bound(schedule.g_max, n_p, schedule.omega)
    if norm > bound:
        log.warning("first-order correction norm %.3e exceeds bound %.3e", norm, bound)
    return FirstOrderCorrection(K, schedule.offsets, norm, bound, int(j_max))
