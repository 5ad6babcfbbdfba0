import numpy as np
import pytest

import layout
from collective import (collective_couplings, default_eta, default_eta_list, eta_extrapolation,
                        eta_floor, export_matrices)
from coupling import design_gk
from errors import ConfigurationError
from lattice import BathSpec
from observables import golden_rule_rate

POSITIONS = [(0, 0), (3, 1), (-2, 4)]


@pytest.fixture
def spec():
    return BathSpec(2, 64)


@pytest.fixture
def gk(spec):
    return design_gk("quasi1d", 0.1, spec)


def test_defaults_scale_with_lattice_size(spec):
    assert default_eta(spec) == pytest.approx(16 * np.pi / 64)
    assert default_eta_list(spec) == pytest.approx([32 * np.pi / 64, 16 * np.pi / 64, 8 * np.pi / 64])
    assert eta_floor(spec) == pytest.approx(0.25)
    assert min(default_eta_list(spec)) > eta_floor(spec)


def test_matrices_are_hermitian_and_gamma_is_psd(spec, gk):
    cm = collective_couplings(spec, gk, POSITIONS, 0.5, default_eta(spec))
    assert cm.n_emitters == 3
    assert np.array_equal(cm.J, cm.J.conj().T)
    assert np.array_equal(cm.gamma, cm.gamma.conj().T)
    assert cm.hermitian_residue < 1e-12
    rates = cm.collective_rates()
    assert rates[0] > -1e-12 * rates[-1]
    assert np.allclose(cm.effective_hamiltonian(), cm.J - 0.5j * cm.gamma)


def test_self_rate_is_the_golden_rule(spec, gk):
    eta = default_eta(spec)
    cm = collective_couplings(spec, gk, [(0, 0)], 0.5, eta)
    assert cm.gamma[0, 0].real == pytest.approx(golden_rule_rate(spec, gk, 0.5, eta), rel=1e-12)
    assert cm.gamma[0, 0].imag == 0.0


def test_only_relative_positions_matter(spec, gk):
    a = collective_couplings(spec, gk, POSITIONS, 0.5, 0.4)
    shifted = [(x + 7, y - 5) for x, y in POSITIONS]
    b = collective_couplings(spec, gk, shifted, 0.5, 0.4)
    assert np.allclose(a.J, b.J, atol=1e-15)
    assert np.allclose(a.gamma, b.gamma, atol=1e-15)


def test_coincident_emitters_have_a_dark_state(spec, gk):
    cm = collective_couplings(spec, gk, [(1, 1), (1, 1)], 0.5, 0.4)
    rates = cm.collective_rates()
    assert abs(rates[0]) < 1e-12 * rates[-1]
    assert rates[-1] == pytest.approx(2 * cm.gamma[0, 0].real)


def test_invalid_arguments(spec, gk):
    with pytest.raises(ConfigurationError):
        collective_couplings(spec, gk, POSITIONS, 0.5, 0.0)
    with pytest.raises(ConfigurationError):
        collective_couplings(spec, gk, [], 0.5, 0.4)
    with pytest.raises(ConfigurationError):
        collective_couplings(spec, gk, [(0, 0, 0)], 0.5, 0.4)
    with pytest.raises(ConfigurationError):
        collective_couplings(BathSpec(2, 32), gk, POSITIONS, 0.5, 0.4)


def test_eta_extrapolation_combines_the_runs(spec, gk):
    etas = default_eta_list(spec)
    ex = eta_extrapolation(spec, gk, POSITIONS[:2], 0.5, etas)
    runs = [collective_couplings(spec, gk, POSITIONS[:2], 0.5, e) for e in etas]
    x = np.asarray(etas)
    w = [np.prod([x[j] / (x[j] - x[i]) for j in range(3) if j != i]) for i in range(3)]
    manual = sum(wi * r.gamma for wi, r in zip(w, runs))
    assert np.allclose(ex.gamma, 0.5 * (manual + manual.conj().T), atol=1e-14)
    assert ex.eta_list == tuple(etas)
    assert len(ex.spreads) == 2
    assert ex.uncertainty_J.shape == (2, 2)
    assert np.all(ex.uncertainty_gamma >= 0)


def test_eta_extrapolation_rejects_bad_lists(spec, gk):
    with pytest.raises(ConfigurationError):
        eta_extrapolation(spec, gk, POSITIONS, 0.5, [0.8, 0.4])
    with pytest.raises(ConfigurationError):
        eta_extrapolation(spec, gk, POSITIONS, 0.5, [0.4, 0.8, 1.6])
    with pytest.raises(ConfigurationError):
        eta_extrapolation(spec, gk, POSITIONS, 0.5, [1.0, 0.5, 0.1])     # below the floor


def test_export_matrices(tmp_path, spec, gk):
    cm = collective_couplings(spec, gk, POSITIONS[:2], 0.5, 0.4)
    files = export_matrices(cm, str(tmp_path), "quasi1d")
    assert sorted(files) == ["J", "gamma"]
    meta, header, rows = layout.read_csv(files["gamma"])
    assert header == ["re1", "im1", "re2", "im2"]
    assert meta["design"] == "quasi1d"
    assert meta["positions"] == "0,0;3,1"
    assert float(meta["eta"]) == 0.4
    assert rows[0][0] == cm.gamma[0, 0].real
    assert rows[1][2] == cm.gamma[1, 1].real


def test_principal_part_dominates_outside_the_band():
    spec = BathSpec(2, 128)
    gk = design_gk("local", 0.1, spec)
    below = collective_couplings(spec, gk, [(0, 0)], -6.0, default_eta(spec))
    J11, g11 = below.J[0, 0].real, below.gamma[0, 0].real
    assert J11 < 0                      # level pushed down, away from the band
    assert 0 < g11 < 0.5 * abs(J11)
    # three J below the band centre is still inside the band: decay wins
    inside = collective_couplings(spec, gk, [(0, 0)], -3.0, default_eta(spec))
    assert inside.gamma[0, 0].real > abs(inside.J[0, 0].real)


def test_quasi1d_pair_is_anisotropic():
    spec = BathSpec(2, 256)
    gk = design_gk("quasi1d", 0.1, spec)
    eta = default_eta(spec)
    # the footprint cancels the (1, 1) lines, so emission runs along (1, -1)
    along = collective_couplings(spec, gk, [(0, 0), (8, -8)], 0.0, eta)
    across = collective_couplings(spec, gk, [(0, 0), (8, 8)], 0.0, eta)
    assert abs(along.gamma[0, 1]) > 10 * abs(across.gamma[0, 1])


def test_eta_spread_shrinks_as_eta_is_halved():
    spec = BathSpec(2, 256)
    gk = design_gk("quasi1d", 0.1, spec)
    ex = eta_extrapolation(spec, gk, [(0, 0), (8, -8)], 0.0)
    assert ex.eta_list == tuple(default_eta_list(spec))
    assert ex.spreads[1] < ex.spreads[0]
