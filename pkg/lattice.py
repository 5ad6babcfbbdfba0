# lattice.py
# Bath geometries, discrete Brillouin zones, dispersions and resonant contours.
#
# Grid convention: k_i = 2*pi*m_i/N with integer m_i in [-N/2, N/2). Arrays over the
# zone are d-dimensional with axis index i <-> m = i - N/2; flattening them row-major
# gives the documented momentum order.

from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from errors import ConfigurationError

SQUARE_TB = "square_tb"
BCC_TB    = "bcc_tb"
MODELS    = (SQUARE_TB, BCC_TB)

Momentum = Tuple[float, ...]

# Nearest-neighbour hopping vectors of the bcc bath in the primitive basis; the
# dispersion below is -J * sum over these of exp(i k.delta).
BCC_NEIGHBOURS = (
    (1, 0, 0), (-1, 0, 0),
    (0, 1, 0), (0, -1, 0),
    (0, 0, 1), (0, 0, -1),
    (1, 1, 1), (-1, -1, -1),
)


@dataclass(frozen=True)
class BathSpec:
    """Periodic tight-binding bath: N sites per axis, one band."""
    dimension: int = 2
    linear_size: int = 64
    model: str = SQUARE_TB
    hopping: float = 1.0
    band_center: float = 0.0

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise ConfigurationError(f"dimension must be 1, 2 or 3 (got {self.dimension})")
        if self.model not in MODELS:
            raise ConfigurationError(f"Unknown dispersion model '{self.model}'")
        if self.model == SQUARE_TB and self.dimension not in (1, 2):
            raise ConfigurationError("square_tb is defined for dimension 1 or 2")
        if self.model == BCC_TB and self.dimension != 3:
            raise ConfigurationError("bcc_tb is defined for dimension 3 only")
        n = self.linear_size
        if int(n) != n or n < 4 or n % 2:
            raise ConfigurationError(f"linear_size must be an even integer >= 4 (got {n})")
        if not np.isfinite(self.hopping) or self.hopping <= 0:
            raise ConfigurationError(f"hopping must be positive (got {self.hopping})")
        if not np.isfinite(self.band_center):
            raise ConfigurationError("band_center must be finite")

    # short aliases used throughout the numerics
    @property
    def N(self) -> int:
        return int(self.linear_size)

    @property
    def J(self) -> float:
        return float(self.hopping)

    @property
    def omega_a(self) -> float:
        return float(self.band_center)

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.N,) * self.dimension

    @property
    def n_modes(self) -> int:
        return self.N ** self.dimension


def axis_indices(spec: BathSpec) -> np.ndarray:
    """Integer labels m = -N/2 .. N/2-1 along one axis."""
    return np.arange(-spec.N // 2, spec.N // 2)


def axis_momenta(spec: BathSpec) -> np.ndarray:
    return 2.0 * np.pi * axis_indices(spec) / spec.N


def index_mesh(spec: BathSpec) -> Tuple[np.ndarray, ...]:
    m = axis_indices(spec)
    return tuple(np.meshgrid(*([m] * spec.dimension), indexing="ij"))


def momentum_mesh(spec: BathSpec) -> Tuple[np.ndarray, ...]:
    k = axis_momenta(spec)
    return tuple(np.meshgrid(*([k] * spec.dimension), indexing="ij"))


def momentum_grid(spec: BathSpec) -> np.ndarray:
    """All N^d grid momenta, row-major over m_i, as an (N^d, d) array."""
    mesh = momentum_mesh(spec)
    return np.stack([c.reshape(-1) for c in mesh], axis=-1)


def _omega(spec: BathSpec, ks: Sequence[np.ndarray]) -> np.ndarray:
    J, wa = spec.J, spec.omega_a
    if spec.model == SQUARE_TB:
        total = np.cos(ks[0])
        for k in ks[1:]:
            total = total + np.cos(k)
        return wa - 2.0 * J * total
    kx, ky, kz = ks
    total = np.cos(kx) + np.cos(ky) + np.cos(kz) + np.cos(kx + ky + kz)
    return wa - 2.0 * J * total


def dispersion(spec: BathSpec, k: Union[Momentum, np.ndarray]) -> Union[float, np.ndarray]:
    """omega(k) for one momentum (d-tuple) or an array whose last axis has length d."""
    arr = np.asarray(k, dtype=float)
    if arr.shape[-1:] != (spec.dimension,):
        raise ConfigurationError(
            f"momentum of shape {arr.shape} does not match a {spec.dimension}-d {spec.model} bath")
    w = _omega(spec, [arr[..., i] for i in range(spec.dimension)])
    return float(w) if np.ndim(w) == 0 else w


def dispersion_grid(spec: BathSpec) -> np.ndarray:
    """omega(k) on the whole zone, shape (N,)*d."""
    return _omega(spec, momentum_mesh(spec))


def band_edges(spec: BathSpec) -> Tuple[float, float]:
    half = 2.0 * spec.dimension * spec.J if spec.model == SQUARE_TB else 8.0 * spec.J
    return spec.omega_a - half, spec.omega_a + half


def resonant_modes(spec: BathSpec, omega_e: float, tol: float) -> np.ndarray:
    """Grid momenta with |omega(k) - omega_e| <= tol, as an (n, d) array in grid order."""
    if not tol > 0:
        raise ConfigurationError(f"tol must be positive (got {tol})")
    mask = np.abs(dispersion_grid(spec) - omega_e) <= tol
    return momentum_grid(spec)[mask.reshape(-1)]


def site_mesh(spec: BathSpec) -> Tuple[np.ndarray, ...]:
    """Real-space site labels n = -N/2 .. N/2-1 per axis (same centering as momenta)."""
    return index_mesh(spec)
