import math

import numpy as np
import pytest

from coupling import CouplingProfile, design_gk, named_design, random_profile
from dynamics import (EmitterSpec, ExcitationState, asymptotic_bath, bath_momentum,
                      bath_realspace, evolve, suggest_dt)
from errors import ConfigurationError, IntegrationError
from floquet import smooth_two_site_schedule, step_schedule
from lattice import BathSpec
from oracle import dense_oracle_evolve, dense_oracle_states

FINE_DT = 0.0025


def test_decoupled_emitter_only_rotates(small2d):
    traj = evolve(small2d, EmitterSpec(None, 0.7), 5.0, snapshot_times=[1.0, 5.0])
    assert [s.t for s in traj] == [1.0, 5.0]
    for s in traj:
        assert s.c_e == pytest.approx(np.exp(-0.7j * s.t), abs=1e-9)
        assert s.bath_population == 0.0


def test_static_profile_matches_dense_oracle(small2d):
    em = EmitterSpec(named_design("quasi1d", 0.4, small2d, center=(1, -2)), 0.3)
    got = evolve(small2d, em, 3.0, FINE_DT).final
    ref = dense_oracle_evolve(small2d, em, 3.0)
    assert got.c_e == pytest.approx(ref.c_e, abs=1e-7)
    assert np.max(np.abs(got.c_k - ref.c_k)) < 1e-7


def test_analytic_coupling_matches_dense_oracle(small2d):
    em = EmitterSpec(design_gk("chiral", 0.3, small2d))
    got = evolve(small2d, em, 2.0, FINE_DT).final
    ref = dense_oracle_evolve(small2d, em, 2.0)
    assert np.max(np.abs(got.c_k - ref.c_k)) < 1e-7


def test_step_schedule_matches_dense_oracle(small2d):
    sched = step_schedule([(0, 0), (1, 1), (2, 0)], [0.3, 0.3, 0.3], 3.0)
    em = EmitterSpec(sched)
    traj = evolve(small2d, em, 2.5, FINE_DT, snapshot_times=[1.0, 2.5])
    refs = dense_oracle_states(small2d, em, [1.0, 2.5])
    for got, ref in zip(traj, refs):
        assert got.c_e == pytest.approx(ref.c_e, abs=1e-7)
        assert np.max(np.abs(got.c_k - ref.c_k)) < 1e-7


def test_smooth_schedule_matches_dense_oracle(small2d):
    em = EmitterSpec(smooth_two_site_schedule(0.3, 2.0))
    got = evolve(small2d, em, 2.0, FINE_DT).final
    ref = dense_oracle_evolve(small2d, em, 2.0)
    assert got.c_e == pytest.approx(ref.c_e, abs=1e-7)
    assert np.max(np.abs(got.c_k - ref.c_k)) < 1e-7


@pytest.mark.parametrize("spec, design", [(BathSpec(1, 16), "local"),
                                          (BathSpec(3, 4, "bcc_tb"), "bcc_pair"),
                                          (BathSpec(3, 4, "bcc_tb"), "bcc_trap")])
def test_chain_and_bcc_baths_match_dense_oracle(spec, design):
    em = EmitterSpec(named_design(design, 0.4, spec), 0.2)
    got = evolve(spec, em, 2.0, FINE_DT).final
    ref = dense_oracle_evolve(spec, em, 2.0)
    assert got.c_e == pytest.approx(ref.c_e, abs=1e-7)
    assert np.max(np.abs(got.c_k - ref.c_k)) < 1e-7


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_random_profiles_match_dense_oracle(seed):
    spec = BathSpec(2, (12, 14, 16)[seed % 3])
    g = 0.05 + 0.15 * (seed % 4) / 3.0
    em = EmitterSpec(random_profile(spec, 1 + seed % 6, g, seed))
    got = evolve(spec, em, 10.0, 0.002).final
    ref = dense_oracle_evolve(spec, em, 10.0)
    assert abs(got.c_e - ref.c_e) < 1e-8
    assert np.max(np.abs(got.c_k - ref.c_k)) < 1e-8


def test_single_position_drive_equals_its_average(small2d):
    sched = step_schedule([(0, 0)], [0.3], 4.0)
    mov = evolve(small2d, EmitterSpec(sched), 3.0, trace_every=0.1)
    eff = evolve(small2d, EmitterSpec(sched).effective(), 3.0, trace_every=0.1)
    assert np.max(np.abs(mov.trace_ce - eff.trace_ce)) < 1e-6


def test_norm_is_conserved():
    spec = BathSpec(2, 32)
    traj = evolve(spec, EmitterSpec(design_gk("chiral", 0.2, spec)), 4.0, trace_every=0.5)
    assert traj.norm_drift < 1e-9 * 4.0
    assert np.all(np.abs(traj.trace_norm - 1.0) < 1e-9 * 4.0)
    assert traj.final.norm == pytest.approx(1.0, abs=4e-9)


def test_local_emission_has_square_symmetry(medium2d):
    em = EmitterSpec(named_design("local", 0.3, medium2d), 0.5)
    pop = np.abs(evolve(medium2d, em, 3.0).final.c_k) ** 2
    assert np.allclose(pop, pop.T, atol=1e-14)
    flipped = np.roll(pop[::-1, :], 1, axis=0)        # kx -> -kx
    assert np.allclose(pop, flipped, atol=1e-14)


def test_trace_and_snapshots(small2d):
    traj = evolve(small2d, EmitterSpec(named_design("local", 0.2, small2d)), 1.0,
                  snapshot_times=[0.0, 0.35, 1.0], trace_every=0.25)
    assert [s.t for s in traj] == [0.0, 0.35, 1.0]
    assert traj[0].c_e == 1.0
    assert np.allclose(traj.trace_times, [0.0, 0.25, 0.5, 0.75, 1.0])
    assert traj.trace_ce[0] == 1.0
    assert abs(traj.trace_ce[-1] - traj.final.c_e) < 1e-15


def test_realspace_transform_is_unitary(medium2d):
    em = EmitterSpec(named_design("purify", 0.4, medium2d), 0.2)
    st = evolve(medium2d, em, 2.0).final
    cn = bath_realspace(st, medium2d)
    assert math.fsum(np.abs(cn.reshape(-1)) ** 2) == pytest.approx(st.bath_population, rel=1e-12)
    assert np.allclose(bath_momentum(cn, medium2d), st.c_k, atol=1e-15)


def test_local_emission_starts_on_the_coupled_site(small2d):
    em = EmitterSpec(CouplingProfile.from_sites([((1, 2), 0.2)]))
    st = evolve(small2d, em, 0.05).final
    cn = np.abs(bath_realspace(st, small2d)) ** 2
    # centered grid: n = i - N/2
    assert np.unravel_index(np.argmax(cn), cn.shape) == (5, 6)


def test_asymptotic_bath():
    spec = BathSpec(2, 16)
    gk = design_gk("local", 0.2, spec)
    ck = asymptotic_bath(spec, gk, 1.0, 0.05, t=10.0)
    assert math.fsum(np.abs(ck.reshape(-1)) ** 2) == pytest.approx(1.0)
    raw = asymptotic_bath(spec, gk, 1.0, 0.05, t=10.0, normalize=False)
    assert np.allclose(np.abs(raw), np.abs(asymptotic_bath(spec, gk, 1.0, 0.05, 0.0, False)))
    with pytest.raises(ConfigurationError):
        asymptotic_bath(spec, gk, 1.0, 0.0, 1.0)


def test_too_large_step_is_an_integration_error(small2d):
    em = EmitterSpec(named_design("local", 1.0, small2d))
    with pytest.raises(IntegrationError) as info:
        evolve(small2d, em, 2.0, dt=0.5)
    assert info.value.diagnostic["dt"] == 0.5
    assert "norm" in info.value.diagnostic
    assert 0 < info.value.diagnostic["suggested_dt"] < 0.5
    assert "try dt <=" in str(info.value)


def test_suggested_step_follows_the_fifth_power_drift():
    hint = suggest_dt(0.05, 8.3e-8, 6.4e-8)
    assert hint == pytest.approx(0.9 * 0.05 * (6.4 / 8.3) ** 0.2)
    assert 0.04 < hint < 0.045
    assert suggest_dt(0.01, 1e-12, 1e-9) == pytest.approx(0.009)
    assert suggest_dt(0.2, float("nan"), 1e-9) == pytest.approx(0.05)


@pytest.mark.parametrize("kwargs", [
    dict(t_final=1.0, dt=0.0),
    dict(t_final=-1.0),
    dict(t_final=1.0, snapshot_times=[2.0]),
    dict(t_final=1.0, snapshot_times=[0.5, 0.2]),
    dict(t_final=1.0, trace_every=0.0),
])
def test_invalid_evolve_arguments(kwargs, small2d):
    with pytest.raises(ConfigurationError):
        evolve(small2d, EmitterSpec(None), **kwargs)


def test_state_grid_mismatch(small2d):
    st = ExcitationState(1.0, np.zeros((4, 4), complex), 0.0, small2d)
    with pytest.raises(ConfigurationError):
        bath_realspace(st, small2d)
