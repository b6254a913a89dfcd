import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from daycare_sir.analysis import th_infinity
from daycare_sir.model import (
    DiseaseParams,
    NotConvergedError,
    PopulationState,
    ScenarioConfig,
    attack_rate,
    default_horizon,
    simulate,
    sir_rhs,
)
from daycare_sir.numerics import SolverSettings

BASELINE = DiseaseParams(beta=0.5, gamma=0.1)


def state(s, i, r=0.0):
    return PopulationState(t=0.0, s=s, i=i, r=r, th_cum=0.0)


class TestTypes:
    def test_r0_basic(self):
        assert BASELINE.r0_basic == pytest.approx(5.0)
        assert DiseaseParams.from_r0(9.5, 0.1).beta == pytest.approx(0.95)

    @pytest.mark.parametrize("beta, gamma", [(0.0, 0.1), (0.5, 0.0), (-1.0, 0.1), (math.inf, 0.1)])
    def test_invalid_disease(self, beta, gamma):
        with pytest.raises(ValueError):
            DiseaseParams(beta, gamma)

    @pytest.mark.parametrize("kwargs", [
        dict(attendance=1.1),
        dict(attendance=-0.1),
        dict(attendance=0.5, population=0.0),
        dict(attendance=0.5, s0=0.9, i0=0.05),
        dict(attendance=0.5, s0=1.01, i0=-0.01),
    ])
    def test_invalid_scenario(self, kwargs):
        with pytest.raises(ValueError):
            ScenarioConfig(**kwargs)


class TestRhs:
    def test_disease_free(self):
        assert sir_rhs(state(99.0, 0.0), BASELINE, ScenarioConfig(0.7)) == (0.0, 0.0, 0.0)

    def test_no_attendance(self):
        ds, di, dr = sir_rhs(state(99.0, 1.0), BASELINE, ScenarioConfig(0.0))
        assert ds == 0.0
        assert di == pytest.approx(-0.1)
        assert dr == pytest.approx(0.1)

    def test_full_attendance(self):
        # 0.5/100 * 1 * 99 = 0.495 infections/day, 0.1 recoveries/day
        ds, di, dr = sir_rhs(state(99.0, 1.0), BASELINE, ScenarioConfig(1.0))
        assert ds == pytest.approx(-0.495)
        assert di == pytest.approx(0.395)
        assert dr == pytest.approx(0.1)

    @given(st.floats(0, 1), st.floats(0, 1000), st.floats(0, 1000))
    def test_derivatives_sum_to_zero(self, a, s, i):
        ds, di, dr = sir_rhs(state(s, i), BASELINE, ScenarioConfig(a))
        assert abs(ds + di + dr) <= 1e-12 * max(1.0, abs(ds), abs(dr))


class TestSimulate:
    def test_high_attendance_home_time(self):
        traj = simulate(BASELINE, ScenarioConfig(0.8), t_end=400.0)
        assert traj.th_cum[-1] == pytest.approx(196.0, abs=2.0)
        assert attack_rate(traj) == pytest.approx(0.98, abs=0.005)

    def test_optimal_attendance_home_time(self):
        traj = simulate(BASELINE, ScenarioConfig(0.40), t_end=400.0)
        assert traj.th_cum[-1] == pytest.approx(480.0, abs=5.0)
        assert attack_rate(traj) == pytest.approx(0.80, abs=0.005)

    def test_full_attendance_no_home_time(self):
        traj = simulate(BASELINE, ScenarioConfig(1.0))
        assert traj.th_cum[-1] == 0.0
        assert np.all(traj.i_home == 0.0)

    def test_no_seed(self):
        traj = simulate(BASELINE, ScenarioConfig(0.5, s0=0.9, i0=0.0, r0_frac=0.1))
        assert attack_rate(traj) == 0.1
        assert len(traj) == 1

    def test_split_of_infected(self):
        traj = simulate(BASELINE, ScenarioConfig(0.3), t_end=20.0)
        np.testing.assert_allclose(traj.i_attending + traj.i_home, traj.i, rtol=1e-15)
        np.testing.assert_allclose(traj.i_attending, 0.3 * traj.i)

    def test_home_time_is_integral_of_home_infected(self):
        traj = simulate(BASELINE, ScenarioConfig(0.6), t_end=200.0)
        quad = np.concatenate([[0.0], np.cumsum(np.diff(traj.t) * 0.5 * (traj.i_home[1:] + traj.i_home[:-1]))])
        np.testing.assert_allclose(traj.th_cum, quad, rtol=1e-4, atol=1e-6)

    def test_auto_horizon_stops_after_extinction(self):
        traj = simulate(BASELINE, ScenarioConfig(0.8))
        assert traj.i[-1] < 1e-6 * 100
        assert traj.t[-1] < default_horizon(BASELINE, ScenarioConfig(0.8))
        assert traj.i[-2] >= 1e-6 * 100

    def test_default_horizon(self):
        assert default_horizon(BASELINE, ScenarioConfig(0.5)) == pytest.approx(100 * math.log(1e8))

    def test_samples_view(self):
        traj = simulate(BASELINE, ScenarioConfig(0.4), t_end=1.0)
        samples = traj.samples
        assert len(samples) == len(traj) == 101
        assert samples[0] == PopulationState(0.0, 99.0, 1.0, 0.0, 0.0)
        assert samples[-1] == traj.final

    def test_step_refinement(self):
        coarse = simulate(BASELINE, ScenarioConfig(0.4), t_end=100.0, dt=1.0)
        refined = simulate(BASELINE, ScenarioConfig(0.4), t_end=100.0, dt=1.0, settings=SolverSettings(1e-6))
        fine = simulate(BASELINE, ScenarioConfig(0.4), t_end=100.0, dt=0.01)
        assert abs(refined.s[-1] - fine.s[-1]) < 1e-5
        assert abs(coarse.s[-1] - fine.s[-1]) > abs(refined.s[-1] - fine.s[-1])

    def test_attack_rate_not_converged(self):
        with pytest.raises(NotConvergedError):
            attack_rate(simulate(BASELINE, ScenarioConfig(0.4), t_end=30.0))


@st.composite
def scenarios(draw):
    beta = draw(st.floats(0.05, 2.0))
    gamma = draw(st.floats(0.05, 0.5))
    n = draw(st.floats(10.0, 1000.0))
    i0 = draw(st.floats(1e-3, 0.2))
    r0_frac = draw(st.floats(0.0, 0.3))
    a = draw(st.floats(0.0, 1.0))
    return DiseaseParams(beta, gamma), ScenarioConfig(a, n, 1.0 - i0 - r0_frac, i0, r0_frac)


class TestInvariants:
    @settings(max_examples=25, deadline=None)
    @given(scenarios())
    def test_conservation_and_monotonicity(self, scenario):
        params, config = scenario
        traj = simulate(params, config, dt=0.05)
        n = config.population
        assert np.all(np.abs(traj.s + traj.i + traj.r - n) <= 1e-8 * n)
        assert np.all(np.diff(traj.s) <= 0)
        assert np.all(np.diff(traj.r) >= 0)
        assert np.all(np.diff(traj.th_cum) >= 0)
        assert np.all(np.diff(traj.t) > 0)
        assert min(traj.s.min(), traj.i.min(), traj.r.min()) >= -1e-9

    @pytest.mark.parametrize("a", [0.2, 0.55, 0.9])
    def test_scaling_equivalence(self, a):
        scaled = simulate(DiseaseParams(BASELINE.beta * a, BASELINE.gamma), ScenarioConfig(1.0), t_end=300.0)
        traj = simulate(BASELINE, ScenarioConfig(a), t_end=300.0)
        n = 100.0
        for x, y in ((traj.s, scaled.s), (traj.i, scaled.i), (traj.r, scaled.r)):
            assert np.max(np.abs(x - y)) <= 1e-9 * n
        integral = np.concatenate([[0.0], np.cumsum(np.diff(scaled.t) * 0.5 * (scaled.i[1:] + scaled.i[:-1]))])
        np.testing.assert_allclose(traj.th_cum, (1 - a) * integral, rtol=1e-4, atol=1e-6)

    @pytest.mark.parametrize("r0", [2.0, 5.0, 15.0])
    @pytest.mark.parametrize("a", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    def test_ode_matches_analytic_home_time(self, a, r0):
        params = DiseaseParams.from_r0(r0, 0.1)
        traj = simulate(params, ScenarioConfig(a))
        assert traj.th_cum[-1] == pytest.approx(th_infinity(a, params), rel=0.01)
