# runconfig.py
# Run configuration documents (JSON or YAML): strict schema, default resolution and
# translation into bath / emitter objects.

import json
import math
import os
from typing import List, Literal, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

import designs
from collective import default_eta, default_eta_list
from config import DEFAULT_DT, J_MAX, N_BINS
from coupling import (CouplingProfile, MomentumCoupling, design_gk, inverse_design,
                      load_profile, named_design, random_profile, truncate)
from dynamics import EmitterSpec
from errors import ConfigurationError
from floquet import RAISED_COSINE, STEP, smooth_two_site_schedule, step_schedule
from lattice import BathSpec


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class BathConfig(_Strict):
    dimension: int = 2
    linear_size: int = 64
    model: Literal["square_tb", "bcc_tb"] = "square_tb"
    hopping: float = Field(1.0, gt=0)
    band_center: float = 0.0


class SiteConfig(_Strict):
    offset: List[int]
    re: float
    im: float = 0.0


class ScheduleConfig(_Strict):
    envelope: Literal["step", "raised_cosine"] = RAISED_COSINE
    omega: float = Field(..., gt=0)
    positions: Optional[List[List[int]]] = None
    amplitudes: Optional[List[float]] = None


class EmitterConfig(_Strict):
    design: str = "local"
    g: float = Field(0.1, ge=0)
    omega_e: Optional[float] = None
    center: List[int] = Field(default_factory=list)
    sites: Optional[List[SiteConfig]] = None
    profile_file: Optional[str] = None
    n_tr: Optional[int] = Field(None, ge=1)
    n_sites: int = Field(4, ge=1)
    schedule: Optional[ScheduleConfig] = None


class IntegrationConfig(_Strict):
    dt: float = Field(DEFAULT_DT, gt=0)
    t_final: Optional[float] = Field(None, ge=0)
    snapshots: Optional[List[float]] = None
    trace_every: Optional[float] = Field(0.1, gt=0)


class ConeConfig(_Strict):
    direction: Tuple[float, float] = (1.0, 1.0)
    half_angle: float = Field(math.pi / 8, gt=0)
    two_sided: bool = True


class ObservablesConfig(_Strict):
    fields: List[Literal["binary_f64", "pgm8"]] = Field(default_factory=lambda: ["binary_f64"])
    field_space: Literal["real", "momentum"] = "real"
    quadrants: bool = True
    target_quadrants: Optional[List[int]] = None
    cone: Optional[ConeConfig] = None
    survival: bool = True
    fit_window: Optional[Tuple[float, float]] = None
    spectral_bins: int = Field(N_BINS, ge=10)


class FloquetConfig(_Strict):
    omegas: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0, 4.0, 8.0])
    t_final: float = Field(50.0, gt=0)
    j_max: int = Field(J_MAX, ge=1)


class InteractionsConfig(_Strict):
    positions: List[List[int]] = Field(default_factory=lambda: [[0, 0]])
    eta: Optional[float] = Field(None, gt=0)
    eta_list: Optional[List[float]] = None
    extrapolate: bool = True


class RunConfig(_Strict):
    bath: BathConfig = Field(default_factory=BathConfig)
    emitter: EmitterConfig = Field(default_factory=EmitterConfig)
    integration: IntegrationConfig = Field(default_factory=IntegrationConfig)
    observables: ObservablesConfig = Field(default_factory=ObservablesConfig)
    floquet: FloquetConfig = Field(default_factory=FloquetConfig)
    interactions: InteractionsConfig = Field(default_factory=InteractionsConfig)
    output_dir: Optional[str] = None
    seed: Optional[int] = None


def _describe(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        loc = ".".join(str(x) for x in err.get("loc", ()))
        if err.get("type") == "extra_forbidden":
            parts.append(f"unknown key '{loc}'")
        else:
            parts.append(f"{loc}: {err.get('msg')}")
    return "; ".join(parts)


def parse_config(doc: Optional[dict]) -> RunConfig:
    try:
        return RunConfig.model_validate(doc or {})
    except ValidationError as e:
        raise ConfigurationError(f"Invalid run configuration: {_describe(e)}") from e


def load_config(path: Optional[str]) -> RunConfig:
    """JSON document, or YAML when the extension says so. None -> all defaults."""
    if path is None:
        return parse_config({})
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigurationError(f"Cannot read config {path}: {e}") from e
    try:
        if os.path.splitext(path)[1].lower() in (".yaml", ".yml"):
            doc = yaml.safe_load(text)
        else:
            doc = json.loads(text)
    except (yaml.YAMLError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"Config {path} is not valid: {e}") from e
    if doc is not None and not isinstance(doc, dict):
        raise ConfigurationError(f"Config {path} must be a mapping at the top level")
    return parse_config(doc)


# ----------------- Defaults -----------------

def resolve(cfg: RunConfig) -> RunConfig:
    """Copy of cfg with every omitted default filled in (what the manifest records)."""
    spec = bath_spec(cfg)
    em, it, ob, ia = cfg.emitter, cfg.integration, cfg.observables, cfg.interactions
    t_final = it.t_final if it.t_final is not None else spec.N / (4.0 * spec.J)
    snaps = it.snapshots if it.snapshots is not None else [t_final]
    targets = ob.target_quadrants
    if targets is None:
        targets = list(designs.TARGET_QUADRANTS.get(em.design, ()))
    window = ob.fit_window or (0.25 * t_final, t_final)
    return cfg.model_copy(update={
        "emitter": em.model_copy(update={
            "omega_e": spec.omega_a if em.omega_e is None else em.omega_e,
            "center": em.center or [0] * spec.dimension}),
        "integration": it.model_copy(update={"t_final": t_final, "snapshots": snaps}),
        "observables": ob.model_copy(update={"target_quadrants": targets,
                                             "fit_window": tuple(window)}),
        "interactions": ia.model_copy(update={
            "eta": ia.eta if ia.eta is not None else default_eta(spec),
            "eta_list": ia.eta_list if ia.eta_list is not None else default_eta_list(spec)}),
    })


def config_document(cfg: RunConfig) -> dict:
    return json.loads(cfg.model_dump_json())


# ----------------- Builders -----------------

def bath_spec(cfg: RunConfig) -> BathSpec:
    b = cfg.bath
    return BathSpec(b.dimension, b.linear_size, b.model, b.hopping, b.band_center)


def static_coupling(cfg: RunConfig, spec: BathSpec, workers: Optional[int] = None):
    """CouplingProfile or MomentumCoupling described by the emitter section."""
    em = cfg.emitter
    center = tuple(em.center)
    if em.sites:
        return CouplingProfile.from_sites(
            [(s.offset, complex(s.re, s.im)) for s in em.sites], center,
            1.0 / len(em.sites), "explicit")
    if em.profile_file:
        prof = load_profile(em.profile_file)
        return prof.shifted(center) if center else prof
    if em.g == 0:
        return None
    if em.design == "random":
        seed = 0 if cfg.seed is None else cfg.seed
        prof = random_profile(spec, em.n_sites, em.g, seed)
        return prof.shifted(center) if center else prof
    out = named_design(em.design, em.g, spec, center)
    if isinstance(out, MomentumCoupling) and em.n_tr:
        full = inverse_design(design_gk(em.design, em.g, spec, workers=workers), spec, workers)
        return truncate(full, em.n_tr).shifted(center)
    return out


def emitter_spec(cfg: RunConfig, spec: BathSpec, workers: Optional[int] = None) -> EmitterSpec:
    em = cfg.emitter
    sc = em.schedule
    if sc is None:
        return EmitterSpec(static_coupling(cfg, spec, workers), em.omega_e)
    center = tuple(em.center)
    if sc.envelope == STEP:
        if not sc.positions:
            raise ConfigurationError("a step schedule needs positions")
        amps = sc.amplitudes if sc.amplitudes is not None else [em.g] * len(sc.positions)
        return EmitterSpec(step_schedule(sc.positions, amps, sc.omega, center), em.omega_e)
    positions = sc.positions or [[0] * spec.dimension, [1] * spec.dimension]
    if len(positions) != 2:
        raise ConfigurationError("a raised-cosine schedule drives exactly two positions")
    return EmitterSpec(smooth_two_site_schedule(em.g, sc.omega, positions, center), em.omega_e)
