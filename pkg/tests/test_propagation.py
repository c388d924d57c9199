import numpy as np
import pytest
import scipy.linalg as sl
from hypothesis import given, settings
from hypothesis import strategies as st

from iddecoherence.hilbert import HermitianOperator, StateVector, eigendecompose, free_propagator, kick_operator
from iddecoherence.models import (
    InitialStateSpec,
    KickSpec,
    ModelSpec,
    build_hamiltonian,
    build_kick,
    eigenbasis_ensemble,
    initial_state,
)
from iddecoherence.propagation import (
    ContinuousCoupling,
    KickEvent,
    PathSchedule,
    ScheduleError,
    echo_overlap,
    evolve_schedule,
    fidelity_trace,
    fit_decay_rate,
    interaction_picture_overlap,
    periodic_schedule,
    trotter_evolve,
)

from oracles import chain_state

SX = np.array([[0.0, 1.0], [1.0, 0.0]])


def goe_setup(dim, seed, state_seed=0):
    h = build_hamiltonian(ModelSpec("goe", dim, 1.0, seed))
    s = eigendecompose(h)
    return h, s, initial_state(InitialStateSpec("random-vector", seed=state_seed), s)


class TestSchedule:
    def test_segments(self):
        f = HermitianOperator.zeros(2)
        sched = PathSchedule(1.0, [KickEvent(0.25, f), KickEvent(0.75, f)])
        assert sched.segments == [0.25, 0.5, 0.25]

    @pytest.mark.parametrize("times", [[0.0], [1.0], [0.5, 0.5], [0.6, 0.4], [-0.1]])
    def test_invalid_times(self, times):
        f = HermitianOperator.zeros(2)
        with pytest.raises(ScheduleError):
            PathSchedule(1.0, [KickEvent(t, f) for t in times])

    def test_nonpositive_duration(self):
        with pytest.raises(ScheduleError):
            PathSchedule(0.0)

    def test_periodic_schedule(self):
        sched = periodic_schedule(3.5, 1.0, HermitianOperator.zeros(2))
        assert sched.kick_times == [1.0, 2.0, 3.0]
        assert periodic_schedule(3.0, 1.0, HermitianOperator.zeros(2)).kick_times == [1.0, 2.0]


class TestEvolveSchedule:
    def test_free_flight(self):
        _, s, chi = goe_setup(6, 1)
        out = evolve_schedule(chi, s, PathSchedule(1.0))
        np.testing.assert_allclose(out.amplitudes, free_propagator(s, 1.0).matrix @ chi.amplitudes, atol=1e-13)

    def test_two_kicks_match_chain_oracle(self):
        h, s, chi = goe_setup(8, 2)
        f1 = build_kick(KickSpec(1.3, "rotated", 5), s)
        f2 = build_kick(KickSpec(0.8, "rotated", 6), s)
        sched = PathSchedule(1.7, [KickEvent(0.4, f1), KickEvent(1.1, f2)])
        ref = chain_state(h.matrix, chi.amplitudes, 1.7, [(0.4, f1.matrix), (1.1, f2.matrix)])
        assert np.max(np.abs(evolve_schedule(chi, s, sched).amplitudes - ref)) < 1e-12

    def test_zero_kicks_reduce_to_free_flight(self):
        _, s, chi = goe_setup(5, 3)
        z = HermitianOperator.zeros(5)
        sched = PathSchedule(2.0, [KickEvent(0.5, z), KickEvent(1.5, z)])
        expected = free_propagator(s, 2.0).matrix @ chi.amplitudes
        np.testing.assert_allclose(evolve_schedule(chi, s, sched).amplitudes, expected, atol=1e-12)

    def test_dim_mismatch(self):
        _, s, chi = goe_setup(5, 3)
        with pytest.raises(ValueError):
            evolve_schedule(StateVector.basis(4, 0), s, PathSchedule(1.0))


class TestEcho:
    def test_no_coupling_gives_one(self):
        _, s, chi = goe_setup(16, 4)
        assert abs(echo_overlap(chi, s, PathSchedule(3.0)) - 1.0) < 1e-12

    def test_short_time_gives_one(self):
        _, s, chi = goe_setup(16, 4)
        assert abs(echo_overlap(chi, s, PathSchedule(1e-12)) - 1.0) < 1e-12

    @pytest.mark.parametrize("theta,e1,t1,tau", [(np.pi / 3, 0.7, 0.4, 1.0), (1.1, 2.3, 1.9, 2.5)])
    def test_two_level_closed_form(self, theta, e1, t1, tau):
        # chi0 = (e0 + e1)/sqrt(2), H = diag(0, E1), one kick theta*sigma_x at t1:
        # echo = cos(theta) - i sin(theta) cos(E1 t1)
        s = eigendecompose(HermitianOperator(np.diag([0.0, e1])))
        chi = StateVector.normalized([1.0, 1.0])
        sched = PathSchedule(tau, [KickEvent(t1, HermitianOperator(theta * SX))])
        expected = np.cos(theta) - 1j * np.sin(theta) * np.cos(e1 * t1)
        assert abs(echo_overlap(chi, s, sched) - expected) < 1e-14

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 24), st.integers(0, 2**31), st.floats(0, 4), st.integers(0, 4))
    def test_fidelity_bound(self, dim, seed, eps, nkicks):
        _, s, chi = goe_setup(dim, seed, seed)
        rng = np.random.default_rng(seed)
        times = np.sort(rng.uniform(0.01, 0.99, nkicks))
        if nkicks and np.min(np.diff(np.r_[0, times])) <= 0:
            return
        kicks = [KickEvent(t, build_kick(KickSpec(eps, "rotated", seed + j), s)) for j, t in enumerate(times)]
        assert abs(echo_overlap(chi, s, PathSchedule(1.0, kicks))) <= 1 + 1e-10

    def test_commuting_kicks_independent_of_timing(self):
        h, s, chi = goe_setup(12, 5)
        gens = [build_kick(KickSpec(1.5, "eigenbasis-diagonal", 20 + j), s) for j in range(3)]
        expected = abs(np.vdot(chi.amplitudes, sl.expm(-1j * sum(g.matrix for g in gens)) @ chi.amplitudes))
        for times in ([0.1, 0.2, 0.3], [0.5, 0.8, 0.95], [0.05, 0.5, 0.55]):
            sched = PathSchedule(1.0, [KickEvent(t, g) for t, g in zip(times, gens)])
            assert abs(abs(echo_overlap(chi, s, sched)) - expected) < 1e-12


class TestInteractionPicture:
    def test_no_kicks(self):
        _, s, chi = goe_setup(6, 7)
        assert interaction_picture_overlap(chi, s, PathSchedule(2.0)) == pytest.approx(1.0, abs=1e-14)

    def test_single_kick_on_eigenstate(self):
        _, s, _ = goe_setup(6, 7)
        chi = StateVector.normalized(s.eigenvectors[:, 2])
        f = build_kick(KickSpec(1.2, "rotated", 3), s)
        got = interaction_picture_overlap(chi, s, PathSchedule(2.0, [KickEvent(0.7, f)]))
        direct = np.vdot(chi.amplitudes, kick_operator(f).matrix @ chi.amplitudes)
        assert abs(got - direct) < 1e-12

    def test_two_kicks_agree_with_echo(self):
        _, s, chi = goe_setup(8, 8)
        f1 = build_kick(KickSpec(1.0, "rotated", 1), s)
        f2 = build_kick(KickSpec(2.0, "rotated", 2), s)
        sched = PathSchedule(1.3, [KickEvent(0.2, f1), KickEvent(0.9, f2)])
        assert abs(interaction_picture_overlap(chi, s, sched) - echo_overlap(chi, s, sched)) < 1e-10


class TestFidelityTrace:
    def test_zero_strength(self):
        _, s, chi = goe_setup(16, 9)
        tr = fidelity_trace(chi, s, HermitianOperator.zeros(16), np.linspace(0, 20, 41))
        np.testing.assert_allclose(tr.moduli, 1.0, atol=1e-12)

    def test_starts_at_one(self):
        _, s, chi = goe_setup(16, 9)
        tr = fidelity_trace(chi, s, build_kick(KickSpec(1.0), s), [0.0, 5.0])
        assert tr.moduli[0] == 1.0

    def test_matches_echo_of_truncated_schedule(self):
        _, s, chi = goe_setup(10, 10)
        f = build_kick(KickSpec(0.6, "rotated", 4), s)
        times = np.array([0.0, 0.3, 1.0, 1.5, 2.7, 4.0, 6.25])
        tr = fidelity_trace(chi, s, f, times, period=0.5)
        for t, v in zip(times[1:], tr.values[1:]):
            assert abs(v - echo_overlap(chi, s, periodic_schedule(t, 0.5, f))) < 1e-12

    def test_state_average(self):
        _, s, _ = goe_setup(6, 11)
        f = build_kick(KickSpec(0.6, "rotated", 4), s)
        states = eigenbasis_ensemble(s)
        times = [0.0, 1.5, 3.5]
        avg = fidelity_trace(states, s, f, times).values
        single = np.mean([fidelity_trace(c, s, f, times).values for c in states], axis=0)
        np.testing.assert_allclose(avg, single, atol=1e-13)

    def test_needs_two_times(self):
        _, s, chi = goe_setup(4, 1)
        with pytest.raises(ValueError):
            fidelity_trace(chi, s, HermitianOperator.zeros(4), [1.0])

    def test_goe_decay_slope_grows_with_strength(self):
        _, s, _ = goe_setup(64, 12)
        states = eigenbasis_ensemble(s)
        times = np.arange(0, 400) * 0.02
        slopes = []
        for eps in (0.05, 0.1):
            m = fidelity_trace(states, s, build_kick(KickSpec(eps, "rotated", 3), s), times, period=0.02).moduli
            # first decade of decay: from 1 down to 0.1
            idx = np.arange(np.argmax(m < 0.1)) if np.any(m < 0.1) else np.arange(m.size)
            a = np.column_stack([times[idx], np.ones(idx.size)])
            slope = np.linalg.lstsq(a, np.log(m[idx]), rcond=None)[0][0]
            slopes.append(slope)
        assert slopes[0] < 0
        assert abs(slopes[1]) > abs(slopes[0])


class TestTrotter:
    def test_no_coupling_is_exact(self):
        _, s, chi = goe_setup(8, 13)
        coupling = ContinuousCoupling(lambda t: HermitianOperator.zeros(8), 1.3)
        for dt in (1.3, 0.4, 0.01):
            out = trotter_evolve(chi, s, coupling, dt)
            ref = free_propagator(s, 1.3).matrix @ chi.amplitudes
            assert np.max(np.abs(out.amplitudes - ref)) < 1e-9

    def test_commuting_constant_coupling_is_exact(self):
        h, s, chi = goe_setup(8, 14)
        g = build_kick(KickSpec(2.0, "eigenbasis-diagonal", 1), s)
        coupling = ContinuousCoupling(lambda t: g, 1.0)
        ref = sl.expm(-1j * (h.matrix + g.matrix)) @ chi.amplitudes
        for dt in (1.0, 0.3, 0.05):
            assert np.max(np.abs(trotter_evolve(chi, s, coupling, dt).amplitudes - ref)) < 1e-9

    def test_noncommuting_second_order(self):
        h, s, chi = goe_setup(8, 15)
        g = build_kick(KickSpec(1.0, "rotated", 2), s)
        ref = sl.expm(-1j * 2.0 * (h.matrix + g.matrix)) @ chi.amplitudes
        coupling = ContinuousCoupling(lambda t: g, 2.0)
        errs = [np.linalg.norm(trotter_evolve(chi, s, coupling, dt).amplitudes - ref) for dt in (0.02, 0.01)]
        assert 3.5 < errs[0] / errs[1] < 4.5

    def test_time_dependent_midpoint_order(self):
        # commuting Gamma(t) = g(t) F: exact result is exp(-i H T) exp(-i F int g)
        h, s, chi = goe_setup(6, 16)
        f = build_kick(KickSpec(1.0, "eigenbasis-diagonal", 5), s)
        duration = 1.0
        coupling = ContinuousCoupling(lambda t: np.sin(3 * t) * f, duration)
        integral = (1 - np.cos(3 * duration)) / 3
        ref = sl.expm(-1j * (h.matrix * duration + f.matrix * integral)) @ chi.amplitudes
        errs = [np.linalg.norm(trotter_evolve(chi, s, coupling, dt).amplitudes - ref) for dt in (0.05, 0.025)]
        assert 3.5 < errs[0] / errs[1] < 4.5

    def test_norm_preserved(self):
        _, s, chi = goe_setup(8, 17)
        g = build_kick(KickSpec(3.0, "rotated", 2), s)
        out = trotter_evolve(chi, s, ContinuousCoupling(lambda t: g, 5.0), 0.001)
        assert abs(out.norm - 1) < 1e-10

    @pytest.mark.parametrize("dt", [0.0, -0.1, 2.0])
    def test_bad_step(self, dt):
        _, s, chi = goe_setup(4, 1)
        with pytest.raises(ValueError):
            trotter_evolve(chi, s, ContinuousCoupling(lambda t: HermitianOperator.zeros(4), 1.0), dt)


class TestFit:
    def test_exact_exponential(self):
        t = np.linspace(0, 10, 201)
        fit = fit_decay_rate(t, np.exp(-0.7 * t))
        assert fit["rate"] == pytest.approx(0.7, rel=1e-10)
        assert 0.9 >= np.exp(-0.7 * fit["window_start"]) >= 0.1

    def test_flat_trace(self):
        assert fit_decay_rate([0, 1, 2], [1.0, 1.0, 1.0])["rate"] == 0.0
