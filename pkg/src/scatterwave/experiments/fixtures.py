"""Built-in and seeded random scenarios shared by the harness and the tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..coefficients import (
    CoefficientProfile,
    Constant,
    ExpPerturbation,
    PiecewiseLinear,
    PowerPerturbation,
    StepFunction,
)
from ..spectrum import SpectrumModel, StateVector, dirichlet_interval
from .config import random_initial

__all__ = ["Fixture", "convergent_fixtures", "mollifier_fixtures", "random_fixture"]


@dataclass(frozen=True, eq=False)
class Fixture:
    name: str
    spectrum: SpectrumModel
    c: CoefficientProfile
    b: CoefficientProfile
    initial: StateVector
    seed: int | None = None


def convergent_fixtures(seed: int = 11) -> list[Fixture]:
    """One scenario per profile family, all with convergent drift."""
    sp = dirichlet_interval(5)
    x0 = random_initial(seed, sp.n_modes)
    zero = Constant(0.0)
    cases = [
        ("constant", Constant(1.5), zero),
        ("power", PowerPerturbation(1.0, 1.0, 2.0), PowerPerturbation(0.0, 1.0, 2.0)),
        ("exp", ExpPerturbation(1.0, 0.5, 1.0), ExpPerturbation(0.0, 0.2, 0.5)),
        ("piecewise_linear", PiecewiseLinear([0, 1, 2, 5], [2, 3, 2, 1.5]), zero),
        ("step", StepFunction([0, 1, 3], [2, 1, 1.5]), StepFunction([0, 2], [0.3, 0.0])),
    ]
    return [Fixture(name, sp, c, b, x0, seed) for name, c, b in cases]


def mollifier_fixtures() -> list[CoefficientProfile]:
    """Step and piecewise-linear profiles with several kinks in ``[0, 50]``."""
    return [
        StepFunction([0, 1, 3, 7.5, 20], [2, 1, 1.5, 0.5, 1.25]),
        StepFunction([0, 0.05, 0.1], [1, 3, 1]),
        PiecewiseLinear([0, 1, 2, 5, 30], [2, 3, 2, 1.5, 1]),
        PiecewiseLinear([0, 0.02, 0.5, 49], [1, 2, 0.5, 0.75]),
    ]


def _random_speed(rng) -> CoefficientProfile:
    family = rng.integers(5)
    c_inf = rng.uniform(0.5, 2.0)
    if family == 0:
        return Constant(c_inf)
    if family == 1:
        return PowerPerturbation(c_inf, rng.uniform(-0.4 * c_inf, 1.5), rng.uniform(0.5, 3.0))
    if family == 2:
        return ExpPerturbation(c_inf, rng.uniform(-0.4 * c_inf, 1.5), rng.uniform(0.2, 2.0))
    n = int(rng.integers(2, 5))
    knots = np.concatenate([[0.0], np.sort(rng.uniform(0.1, 20.0, n - 1))])
    values = rng.uniform(0.5, 3.0, n)
    if family == 3:
        return PiecewiseLinear(knots, values)
    return StepFunction(knots, values)


def _random_damping(rng) -> CoefficientProfile:
    family = rng.integers(4)
    if family == 0:
        return Constant(0.0)
    amp = rng.uniform(-0.5, 1.0)
    if family == 1:
        return PowerPerturbation(0.0, amp, rng.uniform(1.2, 3.0))
    if family == 2:
        return ExpPerturbation(0.0, amp, rng.uniform(0.2, 2.0))
    n = int(rng.integers(2, 4))
    knots = np.concatenate([[0.0], np.sort(rng.uniform(0.1, 10.0, n - 1))])
    values = np.concatenate([rng.uniform(-0.3, 0.6, n - 1), [0.0]])
    return StepFunction(knots, values)


def random_fixture(seed: int) -> Fixture:
    """Seeded scenario: 1 to 4 modes, any speed family, integrable damping."""
    rng = np.random.Generator(np.random.Philox(1_000_003 + int(seed)))
    n = int(rng.integers(1, 5))
    lam = np.cumsum(rng.uniform(0.2, 5.0, n))
    c = _random_speed(rng)
    b = _random_damping(rng)
    return Fixture(f"random-{seed}", SpectrumModel(lam), c, b,
                   random_initial(seed, n), seed)
