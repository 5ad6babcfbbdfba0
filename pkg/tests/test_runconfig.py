import json

import numpy as np
import pytest

from coupling import CouplingProfile, MomentumCoupling
from errors import ConfigurationError
from floquet import DriveSchedule
from runconfig import (bath_spec, config_document, emitter_spec, load_config, parse_config,
                       resolve, static_coupling)


def test_defaults_resolve_from_the_bath():
    cfg = resolve(parse_config({"bath": {"linear_size": 32}, "emitter": {"design": "chiral"}}))
    assert cfg.integration.t_final == pytest.approx(8.0)          # N / 4J
    assert cfg.integration.snapshots == [8.0]
    assert cfg.emitter.omega_e == 0.0
    assert cfg.emitter.center == [0, 0]
    assert cfg.observables.target_quadrants == [1]
    assert cfg.observables.fit_window == (2.0, 8.0)
    assert cfg.interactions.eta == pytest.approx(16 * np.pi / 32)
    assert cfg.interactions.eta_list == pytest.approx([np.pi, np.pi / 2, np.pi / 4])
    doc = config_document(cfg)
    assert doc["integration"]["t_final"] == pytest.approx(8.0)
    assert doc["bath"]["model"] == "square_tb"


def test_unknown_keys_are_named():
    with pytest.raises(ConfigurationError, match="laticce"):
        parse_config({"laticce": {"linear_size": 16}})
    with pytest.raises(ConfigurationError, match="emitter.gg"):
        parse_config({"emitter": {"gg": 0.1}})


@pytest.mark.parametrize("doc", [
    {"bath": {"hopping": -1.0}},
    {"integration": {"dt": 0.0}},
    {"emitter": {"g": -0.1}},
    {"bath": {"model": "kagome"}},
])
def test_out_of_range_values(doc):
    with pytest.raises(ConfigurationError):
        parse_config(doc)


def test_yaml_and_json_documents(tmp_path):
    y = tmp_path / "run.yaml"
    y.write_text("bath:\n  linear_size: 16\nemitter:\n  design: trap\n  g: 0.2\n")
    j = tmp_path / "run.json"
    j.write_text(json.dumps({"bath": {"linear_size": 16}, "emitter": {"design": "trap", "g": 0.2}}))
    assert load_config(str(y)) == load_config(str(j))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigurationError):
        load_config(str(bad))
    with pytest.raises(ConfigurationError):
        load_config(str(tmp_path / "missing.json"))
    lst = tmp_path / "list.yaml"
    lst.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigurationError):
        load_config(str(lst))


def test_static_couplings():
    cfg = resolve(parse_config({"bath": {"linear_size": 16},
                                "emitter": {"design": "quasi1d", "center": [2, 3]}}))
    spec = bath_spec(cfg)
    prof = static_coupling(cfg, spec)
    assert isinstance(prof, CouplingProfile)
    assert prof.center == (2, 3)

    off = resolve(parse_config({"emitter": {"g": 0.0}}))
    assert static_coupling(off, bath_spec(off)) is None

    chiral = resolve(parse_config({"bath": {"linear_size": 16}, "emitter": {"design": "chiral"}}))
    assert isinstance(static_coupling(chiral, spec), MomentumCoupling)
    cut = resolve(parse_config({"bath": {"linear_size": 16},
                                "emitter": {"design": "chiral", "n_tr": 8}}))
    assert static_coupling(cut, spec).size == 8

    explicit = resolve(parse_config({"bath": {"linear_size": 16}, "emitter": {
        "sites": [{"offset": [0, 0], "re": 0.1}, {"offset": [1, 0], "re": 0.0, "im": 0.1}]}}))
    prof = static_coupling(explicit, spec)
    assert prof.amplitude_at((1, 0)) == 0.1j
    assert prof.normalization == 0.5


def test_random_design_uses_the_seed():
    doc = {"bath": {"linear_size": 16}, "emitter": {"design": "random", "n_sites": 3}, "seed": 11}
    a = resolve(parse_config(doc))
    b = resolve(parse_config(doc))
    pa, pb = static_coupling(a, bath_spec(a)), static_coupling(b, bath_spec(b))
    assert np.array_equal(pa.offsets, pb.offsets)
    assert pa.size == 3


def test_schedules_from_config():
    step = resolve(parse_config({"bath": {"linear_size": 16}, "emitter": {"g": 0.2, "schedule": {
        "envelope": "step", "omega": 5.0, "positions": [[0, 0], [1, 1], [2, 2]]}}}))
    em = emitter_spec(step, bath_spec(step))
    assert isinstance(em.coupling, DriveSchedule)
    assert em.coupling.is_step and em.coupling.n_positions == 3
    assert np.allclose(em.effective().coupling.amplitudes, 0.2 / 3)

    smooth = resolve(parse_config({"bath": {"linear_size": 16},
                                   "emitter": {"schedule": {"omega": 2.0}}}))
    em = emitter_spec(smooth, bath_spec(smooth))
    assert not em.coupling.is_step
    assert em.coupling.offsets.tolist() == [[0, 0], [1, 1]]

    for sched in ({"envelope": "step", "omega": 1.0},
                  {"omega": 1.0, "positions": [[0, 0], [1, 0], [2, 0]]}):
        cfg = resolve(parse_config({"bath": {"linear_size": 16}, "emitter": {"schedule": sched}}))
        with pytest.raises(ConfigurationError):
            emitter_spec(cfg, bath_spec(cfg))
