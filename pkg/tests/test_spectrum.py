import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_state
from scatterwave import (
    SpectrumModel,
    StateVector,
    dirichlet_interval,
    spectral_project,
    unitary_shift,
    weighted_norm,
)
from scatterwave.spectrum import ordered_sum, plain_norm


finite = st.floats(-1e3, 1e3, allow_nan=False)


class TestSpectrumModel:
    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            SpectrumModel([0.0, 1.0])
        with pytest.raises(ValueError):
            SpectrumModel([-1.0])

    def test_rejects_unsorted_or_duplicate(self):
        with pytest.raises(ValueError):
            SpectrumModel([2.0, 1.0])
        with pytest.raises(ValueError):
            SpectrumModel([1.0, 1.0])

    def test_rejects_empty_and_nan(self):
        with pytest.raises(ValueError):
            SpectrumModel([])
        with pytest.raises(ValueError):
            SpectrumModel([1.0, np.nan])

    def test_eigenvalues_are_read_only(self):
        sp = SpectrumModel([1.0, 4.0])
        with pytest.raises(ValueError):
            sp.eigenvalues[0] = 3.0

    def test_dirichlet_interval(self):
        sp = dirichlet_interval(3, length=2.0)
        np.testing.assert_allclose(sp.eigenvalues, [(k * math.pi / 2.0) ** 2 for k in (1, 2, 3)])
        assert dirichlet_interval(4) == SpectrumModel([1.0, 4.0, 9.0, 16.0])

    def test_power(self):
        sp = SpectrumModel([1.0, 4.0, 9.0])
        np.testing.assert_allclose(sp.power(0.5), sp.frequencies)


class TestStateVector:
    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            StateVector([1.0, np.inf], [0.0, 0.0])

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            StateVector([1.0, 2.0], [0.0])

    def test_array_round_trip(self, rng):
        x = random_state(rng, 5)
        assert StateVector.from_array(x.to_array()) == x

    def test_spectrum_mismatch(self):
        with pytest.raises(ValueError):
            StateVector.zeros(2).check_spectrum(SpectrumModel([1.0]))


class TestUnitaryShift:
    def test_zero_shift_is_identity(self, rng):
        sp = dirichlet_interval(4)
        x = random_state(rng, 4)
        assert unitary_shift(x, 0.0, sp) == x

    def test_quarter_turn(self):
        out = unitary_shift(np.array([1.0 + 0j]), math.pi / 2, SpectrumModel([4.0]))
        assert out[0] == pytest.approx(-1.0, abs=1e-15)

    def test_norm_preserved_eight_modes(self, rng):
        sp = SpectrumModel(np.cumsum(rng.uniform(0.1, 3.0, 8)))
        x = rng.normal(size=8) + 1j * rng.normal(size=8)
        out = unitary_shift(x, 3.7, sp)
        assert abs(np.linalg.norm(out) - np.linalg.norm(x)) <= 1e-14 * np.linalg.norm(x)

    def test_mode_count_mismatch(self):
        with pytest.raises(ValueError):
            unitary_shift(np.ones(3), 1.0, SpectrumModel([1.0, 2.0]))

    def test_rejects_non_finite_shift(self):
        with pytest.raises(ValueError):
            unitary_shift(np.ones(1), math.inf, SpectrumModel([1.0]))

    @given(s=finite, t=finite, seed=st.integers(0, 2**32 - 1))
    def test_inverse_and_group_law(self, s, t, seed):
        rng = np.random.default_rng(seed)
        sp = SpectrumModel(np.cumsum(rng.uniform(0.1, 5.0, 6)))
        x = random_state(rng, 6)
        back = unitary_shift(unitary_shift(x, s, sp), -s, sp)
        assert (back - x).norm() <= 1e-13 * x.norm()
        # phases of size up to 1e3 * sqrt(lam) lose ~1e-13 in the argument
        lhs = unitary_shift(unitary_shift(x, s, sp), t, sp)
        rhs = unitary_shift(x, s + t, sp)
        assert (lhs - rhs).norm() <= 1e-13 * x.norm() * max(1.0, abs(s) + abs(t))


class TestWeightedNorm:
    def test_order_zero_is_plain_norm(self):
        x = StateVector([3.0], [4.0])
        assert weighted_norm(x, SpectrumModel([2.0]), 0) == 5.0

    def test_order_one_single_mode(self):
        x = StateVector([1.0], [0.0])
        assert weighted_norm(x, SpectrumModel([1.0]), 1) == pytest.approx(math.sqrt(2.0), rel=1e-15)

    def test_order_two_reverse_summation(self, rng):
        sp = SpectrumModel([0.5, 2.0, 7.0])
        x = random_state(rng, 3)
        terms = [(1 + lam ** 2) * (abs(w) ** 2 + abs(z) ** 2)
                 for lam, w, z in zip(sp.eigenvalues, x.w, x.z)]
        oracle = math.sqrt(sum(reversed(terms)))
        assert weighted_norm(x, sp, 2) == pytest.approx(oracle, rel=1e-14)

    def test_negative_order(self):
        with pytest.raises(ValueError):
            weighted_norm(StateVector.zeros(1), SpectrumModel([1.0]), -0.5)

    @given(seed=st.integers(0, 2**32 - 1))
    def test_parallelogram_law(self, seed):
        rng = np.random.default_rng(seed)
        sp = SpectrumModel(np.cumsum(rng.uniform(0.1, 5.0, 5)))
        x, y = random_state(rng, 5), random_state(rng, 5)
        n = lambda v: weighted_norm(v, sp, 0)  # noqa: E731
        lhs = n(x + y) ** 2 + n(x - y) ** 2
        rhs = 2 * n(x) ** 2 + 2 * n(y) ** 2
        assert lhs == pytest.approx(rhs, rel=1e-12)


class TestSpectralProject:
    sp = SpectrumModel([1.0, 4.0, 9.0])

    def test_cutoff_above_all(self, rng):
        x = random_state(rng, 3)
        assert spectral_project(x, self.sp, 100.0) == x

    def test_cutoff_below_all(self, rng):
        x = random_state(rng, 3)
        assert spectral_project(x, self.sp, 0.5) == StateVector.zeros(3)

    def test_keeps_low_modes(self, rng):
        x = random_state(rng, 3)
        p = spectral_project(x, self.sp, 5.0)
        np.testing.assert_array_equal(p.w[:2], x.w[:2])
        np.testing.assert_array_equal(p.z[:2], x.z[:2])
        assert p.w[2] == 0 and p.z[2] == 0

    @given(cut=st.floats(0.1, 20.0), s=finite, seed=st.integers(0, 2**32 - 1))
    def test_idempotent_and_commutes_bitwise(self, cut, s, seed):
        x = random_state(np.random.default_rng(seed), 3)
        p = spectral_project(x, self.sp, cut)
        assert spectral_project(p, self.sp, cut) == p
        assert spectral_project(unitary_shift(x, s, self.sp), self.sp, cut) == unitary_shift(p, s, self.sp)


def test_ordered_sum_is_left_to_right():
    vals = [1e16, 1.0, -1e16, 1.0]
    assert ordered_sum(vals) == ((1e16 + 1.0) - 1e16) + 1.0


def test_plain_norm():
    assert plain_norm(StateVector([3.0, 0.0], [0.0, 4.0])) == 5.0
