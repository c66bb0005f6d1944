import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from conftest import random_state
from scatterwave import (
    LONG_HORIZON,
    Constant,
    DiagonalState,
    FreeSolution,
    NotAsymptoticallyFree,
    PowerPerturbation,
    ProfileError,
    StateVector,
    best_free_fit,
    classify_drift,
    diagonalize,
    dirichlet_interval,
    discrepancy,
    energy,
    energy_lower_bound,
    estimate_wave_speed,
    evolve,
    extract_profile,
    free_state,
    gronwall_tail_bound,
    reconstruct_free,
    time_average_cross,
    undiagonalize,
)
from scatterwave.scattering import (
    antiphase_time,
    discrepancy_certificate,
    discrepancy_series,
    equipartition_bound,
    equipartition_defect,
    cross_term_bound,
    running_wave_speed,
    truncation_time,
)

ZERO = Constant(0.0)


def random_free(seed, n=4):
    rng = np.random.default_rng(seed)
    return FreeSolution(rng.uniform(0.3, 3.0),
                        rng.normal(size=n) + 1j * rng.normal(size=n),
                        rng.normal(size=n) + 1j * rng.normal(size=n))


class TestDiagonalize:
    @given(seed=st.integers(0, 2**32 - 1), t=st.floats(0, 100))
    def test_round_trip(self, seed, t):
        rng = np.random.default_rng(seed)
        sp = dirichlet_interval(4)
        x = random_state(rng, 4)
        c = PowerPerturbation(1.0, 1.0, 2.0)
        back = undiagonalize(diagonalize(x, t, c, sp), t, c, sp)
        assert (back - x).norm() <= 1e-13 * x.norm() * max(1.0, t)

    def test_free_motion_is_stationary(self, rng):
        sp = dirichlet_interval(3)
        c = Constant(1.5)
        x = random_state(rng, 3)
        traj = evolve(sp, x, c, ZERO, [0.0, 50.0], LONG_HORIZON)
        y0, y1 = diagonalize(x, 0.0, c, sp), diagonalize(traj.state(-1), 50.0, c, sp)
        assert (y1 - y0).norm() < 1e-9 * y0.norm()

    def test_diagonal_state_validation(self):
        with pytest.raises(ValueError):
            DiagonalState([1.0], [1.0, 2.0])
        y = DiagonalState([1.0], [2.0])
        assert (2 * y).norm() == pytest.approx(2 * math.sqrt(5.0))


class TestProfile:
    def test_truncation_time_meets_tolerance(self):
        c, b = PowerPerturbation(1, 1, 2), PowerPerturbation(0, 1, 2)
        T = truncation_time(1.0, c, b, 0.1)
        assert gronwall_tail_bound(1.0, c, b, T, math.inf) <= 0.1
        assert gronwall_tail_bound(1.0, c, b, 0.99 * T, math.inf) > 0.1

    def test_truncation_fails_for_slow_tail(self):
        with pytest.raises(ProfileError):
            truncation_time(1.0, PowerPerturbation(1, 1, 1.0001), ZERO, 1e-12, max_time=1e4)

    def test_constant_speed_profile_is_initial_diagonal(self, rng):
        sp = dirichlet_interval(3)
        x = random_state(rng, 3)
        prof = extract_profile(x, Constant(1.0), ZERO, sp, 0.1)
        assert prof.t_trunc == 0.0 and prof.eps_tail == 0.0
        y0 = diagonalize(x, 0.0, Constant(1.0), sp)
        np.testing.assert_array_equal(prof.y1, y0.y1)

    def test_nontrivial_floor(self, rng):
        # |y_inf| >= sqrt(F_lower) / c_inf, so the truncated profile exceeds it minus eps
        sp = dirichlet_interval(4)
        c, b = PowerPerturbation(1, 1, 2), PowerPerturbation(0, 0.3, 2)
        x = random_state(rng, 4)
        prof = extract_profile(x, c, b, sp, 0.05, LONG_HORIZON)
        lb = energy_lower_bound(energy(x, c.value(0.0)), c, b)
        assert prof.norm() >= math.sqrt(lb) / c.limit - prof.eps_tail


class TestFreeWave:
    def test_reconstruct_needs_convergent_drift(self, rng):
        sp = dirichlet_interval(2)
        prof = extract_profile(random_state(rng, 2), Constant(1.0), ZERO, sp, 0.1)
        with pytest.raises(NotAsymptoticallyFree):
            reconstruct_free(prof, classify_drift(PowerPerturbation(1, 1, 1)), 1.0, sp)

    def test_free_state_solves_constant_equation(self, rng):
        sp = dirichlet_interval(3)
        free = random_free(1, 3)
        v0 = free_state(free, 0.0, sp)
        traj = evolve(sp, v0, Constant(free.c_star), ZERO, [0.0, 20.0], LONG_HORIZON)
        assert discrepancy(traj.state(-1), free, 20.0, sp) < 1e-9 * v0.norm()

    def test_best_fit_passes_through_state(self, rng):
        sp = dirichlet_interval(3)
        x = random_state(rng, 3)
        free = best_free_fit(x, 7.5, 1.3, sp)
        assert discrepancy(x, free, 7.5, sp) < 1e-13 * x.norm()

    def test_validation(self):
        with pytest.raises(ValueError):
            FreeSolution(0.0, [1.0], [1.0])
        with pytest.raises(ValueError):
            FreeSolution(1.0, [1.0], [1.0, 2.0])

    def test_sufficiency_decay_and_certificate(self, rng):
        sp = dirichlet_interval(5)
        c, b = PowerPerturbation(1, 1, 2), PowerPerturbation(0, 1, 2)
        x = random_state(rng, 5)
        prof = extract_profile(x, c, b, sp, 0.1, LONG_HORIZON)
        free = reconstruct_free(prof, classify_drift(c), c.limit, sp)
        ts = np.array([0.0, 10.0, 100.0, 1000.0])
        traj = evolve(sp, x, c, b, ts, LONG_HORIZON)
        D = discrepancy_series(traj, free)
        y0 = diagonalize(x, 0.0, c, sp).norm()
        for t, d in zip(ts[1:], D[1:]):
            assert d <= discrepancy_certificate(prof, c, b, sp, t, y0) + 1e-8 * y0
        assert D[3] < D[1]


class TestTimeAverages:
    @given(seed=st.integers(0, 2**32 - 1), T=st.floats(0.1, 1e4))
    def test_cross_term_bound(self, seed, T):
        sp = dirichlet_interval(4)
        free = random_free(seed)
        scale = 1 + 1e-12
        assert T * abs(time_average_cross(free, T, sp)) <= cross_term_bound(free, sp) * scale
        assert T * equipartition_defect(free, T, sp) <= equipartition_bound(free, sp) * scale

    def test_cross_matches_quadrature(self):
        sp = dirichlet_interval(2)
        free = random_free(3, 2)
        T = 2.7

        def integrand(t, part):
            e = np.exp(2j * free.c_star * t * sp.frequencies)
            v = np.sum(e * free.phi * np.conj(free.psi))
            return v.real if part == 0 else v.imag

        re, _ = integrate.quad(integrand, 0, T, args=(0,), limit=200, epsabs=1e-13)
        im, _ = integrate.quad(integrand, 0, T, args=(1,), limit=200, epsabs=1e-13)
        got = time_average_cross(free, T, sp)
        assert abs(got - complex(re, im) / T) < 1e-12

    def test_rejects_non_positive_horizon(self):
        with pytest.raises(ValueError):
            time_average_cross(random_free(0), 0.0, dirichlet_interval(4))


class TestWaveSpeed:
    def test_constant_speed(self, rng):
        sp = dirichlet_interval(3)
        traj = evolve(sp, random_state(rng, 3), Constant(1.7), ZERO,
                      np.linspace(0, 500, 10001))
        assert abs(estimate_wave_speed(traj, 500.0) - 1.7) < 1e-2

    def test_running_estimate_ends_at_full_estimate(self, rng):
        sp = dirichlet_interval(2)
        traj = evolve(sp, random_state(rng, 2), Constant(1.0), ZERO, np.linspace(0, 50, 1001))
        run = running_wave_speed(traj)
        assert run[-1] == pytest.approx(estimate_wave_speed(traj, 50.0), rel=1e-14)
        x0 = traj.state(0)
        assert run[0] == pytest.approx(np.linalg.norm(x0.z) / np.linalg.norm(x0.w), rel=1e-14)

    def test_errors(self, rng):
        sp = dirichlet_interval(1)
        traj = evolve(sp, StateVector.zeros(1), Constant(1.0), ZERO, [0.0, 1.0])
        with pytest.raises(ValueError):
            estimate_wave_speed(traj, 1.0)
        with pytest.raises(ValueError):
            estimate_wave_speed(traj, 5.0)


class TestNecessity:
    def test_antiphase_time(self):
        sp = dirichlet_interval(2)
        c = PowerPerturbation(1, 1, 1)
        T = antiphase_time(c, 10.0, sp)
        assert c.drift(T) - c.drift(10.0) == pytest.approx(math.pi, rel=1e-10)

    def test_antiphase_none_for_convergent_short_tail(self):
        sp = dirichlet_interval(1)
        assert antiphase_time(PowerPerturbation(1, 0.01, 2), 0.0, sp, max_time=1e6) is None

    def test_divergent_drift_defeats_fixed_free_wave(self, rng):
        sp = dirichlet_interval(3)
        c = PowerPerturbation(1, 1, 1)
        x = random_state(rng, 3)
        t0 = 10.0
        T = antiphase_time(c, t0, sp)
        traj = evolve(sp, x, c, ZERO, [0.0, t0, T], LONG_HORIZON)
        free = best_free_fit(traj.state(1), t0, c.limit, sp)
        d_t0 = discrepancy(traj.state(1), free, t0, sp)
        assert d_t0 < 1e-12 * x.norm()
        assert discrepancy(traj.state(2), free, T, sp) > 0.1 * x.norm()
