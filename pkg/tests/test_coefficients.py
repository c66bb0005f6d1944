import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from scatterwave import (
    Constant,
    DriftClassification,
    DriftKind,
    ExpPerturbation,
    PiecewiseLinear,
    PowerPerturbation,
    StepFunction,
    check_speed,
    classify_drift,
    profile_from_dict,
)
from scatterwave.coefficients import (
    antiderivative,
    drift,
    evaluate,
    kernel,
    kernel_derivative,
    l1_norm,
    mollify,
    total_variation,
)


# mpmath values at 30 digits
EXP_ANTIDERIVATIVE = {
    0.5: 0.8934693402873665764,
    3.0: 3.950212931632136057,
    17.0: 17.999999958600622812,
}


class TestEvaluate:
    def test_constant(self):
        assert evaluate(Constant(2.5), 7.0) == 2.5

    def test_power(self):
        assert evaluate(PowerPerturbation(1.0, 1.0, 2.0), 1.0) == 1.25

    def test_step_is_right_continuous(self):
        c = StepFunction([0.0, 1.0], [1.0, 2.0])
        assert evaluate(c, 1.0) == 2.0
        assert evaluate(c, math.nextafter(1.0, 0.0)) == 1.0

    def test_piecewise_linear_midpoint(self):
        c = PiecewiseLinear([0.0, 2.0], [1.0, 3.0])
        assert evaluate(c, 1.0) == 2.0
        assert evaluate(c, 50.0) == 3.0

    def test_infinity_gives_limit(self):
        assert evaluate(PowerPerturbation(1.5, 2.0, 0.5), math.inf) == 1.5
        assert evaluate(ExpPerturbation(0.5, 1.0, 1.0), math.inf) == 0.5

    @pytest.mark.parametrize("c", [Constant(1.0), PowerPerturbation(1, 1, 2),
                                   ExpPerturbation(1, 1, 1), StepFunction([0], [1]),
                                   PiecewiseLinear([0, 1], [1, 2])])
    def test_negative_time_rejected(self, c):
        with pytest.raises(ValueError):
            evaluate(c, -1.0)
        with pytest.raises(ValueError):
            evaluate(c, np.array([0.0, -0.5]))
        with pytest.raises(ValueError):
            evaluate(c, math.nan)

    def test_vectorised_matches_scalar(self):
        c = ExpPerturbation(1.0, 0.7, 0.3)
        ts = np.linspace(0.0, 10.0, 11)
        np.testing.assert_array_equal(c.value(ts), [c.value(float(t)) for t in ts])


class TestConstruction:
    def test_table_validation(self):
        with pytest.raises(ValueError):
            StepFunction([0.0, 0.0], [1.0, 2.0])
        with pytest.raises(ValueError):
            PiecewiseLinear([0.0, 1.0], [1.0])
        with pytest.raises(ValueError):
            StepFunction([-1.0], [1.0])
        with pytest.raises(ValueError):
            PiecewiseLinear([], [])

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            PowerPerturbation(1.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            ExpPerturbation(1.0, 1.0, -1.0)
        with pytest.raises(ValueError):
            Constant(math.inf)

    def test_check_speed(self):
        assert check_speed(Constant(1.0)) == Constant(1.0)
        with pytest.raises(ValueError):
            check_speed(StepFunction([0.0, 1.0], [1.0, 0.0]))
        with pytest.raises(ValueError):
            check_speed(PowerPerturbation(1.0, -1.0, 2.0))
        with pytest.raises(TypeError):
            check_speed(1.0)

    @pytest.mark.parametrize("c", [Constant(1.0), PowerPerturbation(1, 1, 2),
                                   ExpPerturbation(1, 1, 1), StepFunction([0, 1], [1, 2]),
                                   PiecewiseLinear([0, 1], [1, 2])])
    def test_dict_round_trip(self, c):
        assert profile_from_dict(c.to_dict()) == c

    def test_from_dict_errors(self):
        with pytest.raises(ValueError, match="unknown"):
            profile_from_dict({"family": "cubic"})
        with pytest.raises(ValueError, match="unexpected"):
            profile_from_dict({"family": "constant", "value": 1.0, "extra": 2})
        with pytest.raises(ValueError):
            profile_from_dict({"value": 1.0})


class TestVariation:
    def test_power(self):
        c = PowerPerturbation(1.0, 1.0, 2.0)
        assert total_variation(c, 0.0, math.inf) == 1.0
        assert total_variation(c, 1.0, 3.0) == pytest.approx(0.25 - 1 / 16, rel=1e-15)

    def test_step_counts_jumps_inside(self):
        c = StepFunction([0.0, 1.0, 3.0], [2.0, 1.0, 1.5])
        assert total_variation(c) == 1.5
        assert total_variation(c, 0.0, 2.0) == 1.0
        assert total_variation(c, 1.0, 2.0) == 0.0

    def test_piecewise_linear(self):
        c = PiecewiseLinear([0, 1, 2, 5], [2, 3, 2, 1.5])
        assert total_variation(c) == pytest.approx(2.5, rel=1e-15)

    def test_bad_interval(self):
        with pytest.raises(ValueError):
            total_variation(Constant(1.0), 2.0, 1.0)

    @given(s=st.floats(0, 50), d1=st.floats(0, 50), d2=st.floats(0, 50),
           p=st.floats(0.2, 3.0), a=st.floats(-0.9, 3.0))
    def test_additive_and_dominates_jump(self, s, d1, d2, p, a):
        c = PowerPerturbation(1.0, a, p)
        t, u = s + d1, s + d1 + d2
        whole = total_variation(c, s, u)
        parts = total_variation(c, s, t) + total_variation(c, t, u)
        assert whole == pytest.approx(parts, rel=1e-12, abs=1e-15)
        assert abs(c.value(u) - c.value(s)) <= whole + 4 * np.finfo(float).eps * 4.0


class TestAntiderivativeAndDrift:
    @pytest.mark.parametrize("t", sorted(EXP_ANTIDERIVATIVE))
    def test_exp_antiderivative(self, t):
        got = antiderivative(ExpPerturbation(1.0, 1.0, 1.0), t)
        assert got == pytest.approx(EXP_ANTIDERIVATIVE[t], rel=1e-14)

    def test_piecewise_linear_area(self):
        c = PiecewiseLinear([0.0, 1.0, 2.0], [2.0, 3.0, 2.0])
        cls = classify_drift(c)
        assert cls.kind is DriftKind.CONVERGENT
        assert cls.f_inf == 1.0
        assert drift(c, math.inf) == 1.0

    def test_step_drift(self):
        c = StepFunction([0.0, 1.0, 3.0], [2.0, 1.0, 1.5])
        assert drift(c, 10.0) == pytest.approx(0.5 - 1.0, rel=1e-15)

    def test_power_classification(self):
        assert classify_drift(PowerPerturbation(1, 2, 3)).f_inf == 1.0
        assert classify_drift(PowerPerturbation(1, 1, 1)).kind is DriftKind.DIVERGENT_TO_INFINITY
        assert (classify_drift(PowerPerturbation(1, -0.5, 0.5)).kind
                is DriftKind.DIVERGENT_TO_MINUS_INFINITY)
        assert classify_drift(PowerPerturbation(1, 0, 0.5)).f_inf == 0.0

    def test_divergent_drift_at_infinity_raises(self):
        with pytest.raises(ValueError):
            drift(PowerPerturbation(1, 1, 1), math.inf)

    def test_exp_classification(self):
        cls = classify_drift(ExpPerturbation(1.0, 0.5, 0.25))
        assert cls.f_inf == 2.0 and cls.certificate

    def test_classification_round_trip(self):
        cls = classify_drift(PowerPerturbation(1, 1, 2))
        assert DriftClassification.from_dict(cls.to_dict()) == cls

    def test_classification_validates(self):
        with pytest.raises(ValueError):
            DriftClassification(DriftKind.CONVERGENT, None)
        with pytest.raises(ValueError):
            DriftClassification(DriftKind.DIVERGENT_TO_INFINITY, 1.0)

    @pytest.mark.parametrize("c", [PowerPerturbation(1, 0.7, 1.5),
                                   PowerPerturbation(2, -0.5, 0.5),
                                   ExpPerturbation(1, 1, 0.3),
                                   PiecewiseLinear([0, 1, 2, 5], [2, 3, 2, 1.5]),
                                   StepFunction([0, 1, 3], [2, 1, 1.5])])
    @pytest.mark.parametrize("T", [1.0, 10.0, 100.0])
    def test_drift_matches_quadrature(self, c, T):
        pts = [b for b in c.breakpoints if b < T] or None
        ref, _ = integrate.quad(lambda s: c.value(s) - c.limit, 0.0, T,
                                points=pts, limit=400, epsabs=1e-13, epsrel=1e-13)
        assert drift(c, T) == pytest.approx(ref, rel=1e-9, abs=1e-11)


class TestL1Norm:
    def test_power_tail(self):
        c = PowerPerturbation(0.0, 1.0, 2.0)
        assert l1_norm(c) == 1.0
        assert l1_norm(c, 1.0) == pytest.approx(0.5, rel=1e-15)

    def test_sign_change(self):
        c = PiecewiseLinear([0.0, 2.0], [-1.0, 1.0])
        assert l1_norm(c, 0.0, 2.0) == pytest.approx(1.0, rel=1e-15)

    def test_non_integrable(self):
        with pytest.raises(ValueError):
            l1_norm(Constant(1.0))
        with pytest.raises(ValueError):
            l1_norm(PowerPerturbation(0.0, 1.0, 1.0))

    def test_power_crossing(self):
        # c = -0.5 + (1+t)^-1 changes sign at t = 1
        c = PowerPerturbation(-0.5, 1.0, 1.0)
        ref, _ = integrate.quad(lambda s: abs(c.value(s)), 0.0, 5.0, points=[1.0])
        assert l1_norm(c, 0.0, 5.0) == pytest.approx(ref, rel=1e-12)


class TestMollifier:
    def test_kernel_has_unit_mass_and_zero_derivative_mass(self):
        mass, _ = integrate.quad(kernel, -1.0, 1.0)
        assert mass == pytest.approx(1.0, rel=1e-14)
        dmass, _ = integrate.quad(kernel_derivative, -1.0, 1.0)
        assert abs(dmass) < 1e-15
        assert kernel(1.5) == 0.0

    def test_unit_step_values(self):
        m = mollify(StepFunction([0.0, 1.0], [1.0, 2.0]), 0.25)
        assert m.value(1.0) == pytest.approx(1.5, rel=1e-15)
        assert m.value(1.1) == pytest.approx(1.83692, rel=1e-14)
        assert m.value(0.5) == pytest.approx(1.0, rel=4e-16)
        assert m.derivative(1.0) == pytest.approx(3.75, rel=1e-14)

    def test_unit_step_integrals(self):
        m = mollify(StepFunction([0.0, 1.0], [1.0, 2.0]), 0.25)
        assert m.l1_gap(0.0, 2.0) == pytest.approx(0.078125, rel=1e-10)
        assert m.derivative_mass(0.0, 2.0) == pytest.approx(1.0, rel=1e-10)
        # both bounded by delta * Var and Var respectively
        assert m.variation_budget(0.0, 2.0) == 1.0
        assert m.l1_gap(0.0, 2.0) <= 0.25 * m.variation_budget(0.0, 2.0)

    def test_constant_extension_left_of_zero(self):
        m = mollify(PiecewiseLinear([0.0, 1.0], [1.0, 2.0]), 0.5)
        # c~ is flat for t < 0 so c_delta(0) averages 1 on the left and 1 + s on the right
        ref, _ = integrate.quad(lambda s: kernel(s / 0.5) / 0.5 * (1.0 + max(-s, 0.0)),
                                -0.5, 0.5, points=[0.0])
        assert m.value(0.0) == pytest.approx(ref, rel=1e-13)

    def test_delta_validation(self):
        with pytest.raises(ValueError):
            mollify(Constant(1.0), 0.0)
        with pytest.raises(ValueError):
            mollify(Constant(1.0), math.inf)

    @given(delta=st.sampled_from([1.0, 0.1, 0.01]),
           window=st.sampled_from([(0.0, 2.0), (0.5, 3.0), (2.0, 6.0)]),
           which=st.integers(0, 2))
    def test_inequalities(self, delta, window, which):
        c = [StepFunction([0, 1, 3], [2, 1, 1.5]),
             PiecewiseLinear([0, 1, 2, 5], [2, 3, 2, 1.5]),
             PowerPerturbation(1.0, 1.0, 0.5)][which]
        m = mollify(c, delta)
        S, T = window
        budget = m.variation_budget(S, T)
        assert m.l1_gap(S, T) <= delta * budget + 1e-8
        assert m.derivative_mass(S, T) <= budget + 1e-8
