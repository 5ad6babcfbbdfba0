# coupling.py
# Giant-emitter footprints in real and momentum space: sampling G(k) from a
# profile, the named design library, inverse Fourier design and truncation.

import json
import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sfft

import designs
from config import LOG_NAME
from errors import ConfigurationError, ExportError
from lattice import SQUARE_TB, BathSpec, index_mesh, site_mesh

log = logging.getLogger(f"{LOG_NAME}.coupling")

SAMPLED  = "sampled-from-profile"
ANALYTIC = "analytic-design"

# relative digits at which truncation treats two magnitudes as equal
TIE_DIGITS = 12


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CouplingProfile:
    """Finite set of lattice offsets with complex amplitudes (1/N_p already folded in)."""
    offsets: np.ndarray
    amplitudes: np.ndarray
    center: Tuple[int, ...] = ()
    normalization: float = 1.0
    design: Optional[str] = None

    def __post_init__(self):
        offs = np.array(self.offsets, dtype=np.int64, ndmin=2)
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if offs.shape[0] != amps.shape[0]:
            raise ConfigurationError(
                f"{offs.shape[0]} offsets but {amps.shape[0]} amplitudes")
        if offs.shape[0] == 0:
            raise ConfigurationError("profile needs at least one site")
        d = offs.shape[1]
        center = tuple(int(c) for c in self.center) if len(self.center) else (0,) * d
        if len(center) != d:
            raise ConfigurationError(f"center {center} does not match {d}-d offsets")
        if len({tuple(o) for o in offs.tolist()}) != offs.shape[0]:
            raise ConfigurationError("profile offsets must be distinct")
        if not np.all(np.isfinite(amps)):
            raise ConfigurationError("profile amplitudes must be finite")
        if not np.any(amps != 0):
            raise ConfigurationError("profile needs at least one nonzero amplitude")
        object.__setattr__(self, "offsets", _readonly(offs))
        object.__setattr__(self, "amplitudes", _readonly(amps))
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "normalization", float(self.normalization))

    @classmethod
    def from_sites(cls, sites: Iterable[Tuple[Sequence[int], complex]],
                   center: Sequence[int] = (), normalization: float = 1.0,
                   design: Optional[str] = None) -> "CouplingProfile":
        sites = list(sites)
        return cls(offsets=[tuple(o) for o, _ in sites],
                   amplitudes=[a for _, a in sites],
                   center=tuple(center), normalization=normalization, design=design)

    @property
    def dimension(self) -> int:
        return int(self.offsets.shape[1])

    @property
    def size(self) -> int:
        return int(self.offsets.shape[0])

    @property
    def support(self) -> int:
        return int(np.count_nonzero(self.amplitudes))

    @property
    def g_max(self) -> float:
        return float(np.max(np.abs(self.amplitudes)))

    @property
    def mass(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def positions(self) -> np.ndarray:
        """Absolute lattice positions n_j + offset."""
        return self.offsets + np.asarray(self.center, dtype=np.int64)

    def centroid(self) -> np.ndarray:
        """Mean absolute position of the nonzero sites (cone metrics start here)."""
        pos = self.positions()[self.amplitudes != 0]
        return pos.mean(axis=0)

    def amplitude_at(self, offset: Sequence[int]) -> complex:
        hit = np.all(self.offsets == np.asarray(offset), axis=1)
        return complex(self.amplitudes[hit][0]) if hit.any() else 0j

    def shifted(self, center: Sequence[int]) -> "CouplingProfile":
        return CouplingProfile(self.offsets, self.amplitudes, tuple(center),
                               self.normalization, self.design)


@dataclass(frozen=True, eq=False)
class MomentumCoupling:
    """G(k) sampled on the grid of `spec`, held as an (N,)*d array in grid order."""
    values: np.ndarray
    spec: BathSpec
    source: str = SAMPLED
    design: Optional[str] = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.complex128)
        if vals.size != self.spec.n_modes:
            raise ConfigurationError(
                f"G(k) has {vals.size} samples; the grid has {self.spec.n_modes} modes")
        object.__setattr__(self, "values", _readonly(vals.reshape(self.spec.shape)))

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    @property
    def g_max(self) -> float:
        return float(np.max(np.abs(self.values)))

    def per_mode(self) -> np.ndarray:
        """g(k) = G(k)/sqrt(N^d), the unitary-convention coupling used by the dynamics."""
        return self.values / np.sqrt(self.spec.n_modes)


# ----------------- Real space -> momentum space -----------------

def check_fits(offsets: np.ndarray, spec: BathSpec):
    if offsets.shape[1] != spec.dimension:
        raise ConfigurationError(
            f"{offsets.shape[1]}-d profile on a {spec.dimension}-d bath")
    half = spec.N // 2
    if np.any(np.abs(offsets) > half):
        worst = int(np.max(np.abs(offsets)))
        raise ConfigurationError(
            f"profile offset {worst} does not fit in a lattice of linear size {spec.N}")
    wrapped = {tuple(o) for o in np.mod(offsets, spec.N).tolist()}
    if len(wrapped) != offsets.shape[0]:
        raise ConfigurationError("profile offsets alias onto the same site modulo N")


def profile_grid(profile: CouplingProfile, spec: BathSpec) -> np.ndarray:
    """Amplitudes scattered onto the periodic lattice (standard FFT index order)."""
    check_fits(profile.offsets, spec)
    grid = np.zeros(spec.shape, dtype=np.complex128)
    idx = np.mod(profile.positions(), spec.N)
    grid[tuple(idx.T)] = profile.amplitudes
    return grid


def gk_from_profile(profile: CouplingProfile, spec: BathSpec,
                    workers: Optional[int] = None) -> MomentumCoupling:
    """G(k) = sum_a g_a exp(-i k.(n_a + center)) on every grid momentum."""
    grid = profile_grid(profile, spec)
    values = sfft.fftshift(sfft.fftn(grid, workers=workers))
    return MomentumCoupling(values, spec, SAMPLED, profile.design)


# ----------------- Named designs -----------------

def named_design(name: str, g: float, spec: BathSpec,
                 center: Sequence[int] = ()):
    """CouplingProfile for finite designs, sampled MomentumCoupling for analytic ones."""
    rec = designs.lookup(name, spec.dimension)
    if rec is None:
        raise ConfigurationError(
            f"Unknown design '{name}' (choose from {', '.join(designs.DESIGN_NAMES)})")
    if rec["dimension"] != spec.dimension:
        raise ConfigurationError(
            f"design '{name}' is {rec['dimension']}-d; bath is {spec.dimension}-d")

    if rec["kind"] == "profile":
        sites = rec["sites"]
        return CouplingProfile.from_sites(
            [(s["offset"], g * s["weight"]) for s in sites],
            center=center, normalization=1.0 / len(sites), design=name)

    if spec.model != SQUARE_TB:
        raise ConfigurationError(f"design '{name}' needs a square_tb bath")
    mx, my = index_mesh(spec)
    w = rec["weight"](mx, my, spec.N).astype(np.complex128)
    values = (g / np.max(np.abs(w))) * w
    if len(center):
        kx, ky = (2.0 * np.pi * m / spec.N for m in (mx, my))
        values = values * np.exp(-1j * (kx * center[0] + ky * center[1]))
    return MomentumCoupling(values, spec, ANALYTIC, name)


def design_gk(name: str, g: float, spec: BathSpec, center: Sequence[int] = (),
              workers: Optional[int] = None) -> MomentumCoupling:
    """G(k) of any named design, sampling finite footprints on the grid."""
    out = named_design(name, g, spec, center)
    if isinstance(out, CouplingProfile):
        return gk_from_profile(out, spec, workers)
    return out


# ----------------- Inverse design and truncation -----------------

def inverse_design(gk: MomentumCoupling, spec: BathSpec,
                   workers: Optional[int] = None) -> CouplingProfile:
    """
    Full real-space profile G(n) = (1/N^d) sum_k G(k) exp(+i k.n) on all N^d sites,
    offsets n in [-N/2, N/2) row-major. Exact inverse of gk_from_profile.
    """
    if gk.values.shape != spec.shape:
        raise ConfigurationError(
            f"G(k) sampled on {gk.values.shape}; bath grid is {spec.shape}")
    real = sfft.fftshift(sfft.ifftn(sfft.ifftshift(gk.values), workers=workers))
    offsets = np.stack([m.reshape(-1) for m in site_mesh(spec)], axis=-1)
    return CouplingProfile(offsets, real.reshape(-1), normalization=1.0, design=gk.design)


def truncate(profile: CouplingProfile, n_tr: int) -> CouplingProfile:
    """
    Keep the n_tr largest-|amplitude| sites; ties go to smaller |offset|_1, then
    lexicographic offset. Magnitudes are compared at TIE_DIGITS relative digits so that
    FFT rounding noise cannot break a symmetric tie. Amplitudes are not rescaled.
    """
    if int(n_tr) != n_tr or n_tr < 1:
        raise ConfigurationError(f"n_tr must be a positive integer (got {n_tr})")
    nz = np.flatnonzero(profile.amplitudes != 0)
    offs = profile.offsets[nz]
    mag = np.abs(profile.amplitudes[nz])
    if len(mag):
        mag = np.round(mag / mag.max(), TIE_DIGITS)
    l1 = np.sum(np.abs(offs), axis=1)
    keys = [offs[:, i] for i in range(offs.shape[1] - 1, -1, -1)] + [l1, -mag]
    order = np.lexsort(keys)[: int(n_tr)]
    keep = nz[order]
    if len(keep) < n_tr:
        log.warning("truncate: asked for %d sites, profile has only %d nonzero", n_tr, len(keep))
    return CouplingProfile(profile.offsets[keep], profile.amplitudes[keep],
                           profile.center, profile.normalization, profile.design)


def kept_mass_fraction(full: CouplingProfile, kept: CouplingProfile) -> float:
    return kept.mass / full.mass


def random_profile(spec: BathSpec, n_sites: int, g: float, seed: int,
                   radius: int = 3) -> CouplingProfile:
    """Random footprint inside a box of half-width `radius`; max |amplitude| equals g."""
    r = min(int(radius), spec.N // 2 - 1)
    box = np.stack([m.reshape(-1) for m in
                    np.meshgrid(*([np.arange(-r, r + 1)] * spec.dimension), indexing="ij")],
                   axis=-1)
    if not 1 <= n_sites <= len(box):
        raise ConfigurationError(f"n_sites must be in [1, {len(box)}] (got {n_sites})")
    rng = np.random.default_rng(seed)
    pick = rng.choice(len(box), size=n_sites, replace=False)
    amps = rng.uniform(0.2, 1.0, n_sites) * np.exp(2j * np.pi * rng.uniform(0, 1, n_sites))
    amps *= g / np.max(np.abs(amps))
    return CouplingProfile(box[np.sort(pick)], amps, normalization=1.0 / n_sites,
                           design="random")


# ----------------- Profile documents -----------------

def profile_to_document(profile: CouplingProfile) -> Dict[str, Any]:
    return {
        "design": profile.design,
        "center": list(profile.center),
        "normalization": profile.normalization,
        "sites": [{"offset": [int(x) for x in o], "re": float(a.real), "im": float(a.imag)}
                  for o, a in zip(profile.offsets.tolist(), profile.amplitudes)],
    }


def profile_from_document(doc: Dict[str, Any]) -> CouplingProfile:
    try:
        sites = doc["sites"]
        offsets = [tuple(int(x) for x in s["offset"]) for s in sites]
        amps = [complex(float(s["re"]), float(s["im"])) for s in sites]
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigurationError(f"Malformed profile document: {e}") from e
    return CouplingProfile(offsets, amps, tuple(doc.get("center") or ()),
                           float(doc.get("normalization", 1.0)), doc.get("design"))


def save_profile(profile: CouplingProfile, path: str):
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(profile_to_document(profile), f, indent=1)
    except OSError as e:
        raise ExportError(f"Cannot write profile {path}: {e}") from e


def load_profile(path: str) -> CouplingProfile:
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except OSError as e:
        raise ExportError(f"Cannot read profile {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Profile {path} is not valid JSON: {e}") from e
    return profile_from_document(doc)


def load_momentum_samples(path: str, spec: BathSpec) -> MomentumCoupling:
    """User G(k): JSON list of [re, im] pairs in grid order."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            pairs = json.load(f)
        values = np.array([complex(float(re), float(im)) for re, im in pairs])
    except OSError as e:
        raise ExportError(f"Cannot read G(k) samples {path}: {e}") from e
    except (ValueError, TypeError) as e:
        raise ConfigurationError(f"Malformed G(k) samples in {path}: {e}") from e
    if values.size != spec.n_modes:
        raise ConfigurationError(
            f"{path}: {values.size} samples, expected N^d = {spec.n_modes}")
    return MomentumCoupling(values, spec, ANALYTIC, "user")
