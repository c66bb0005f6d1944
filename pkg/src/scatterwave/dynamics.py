"""Time integration of the decoupled per-mode system and its a-priori bounds.

Each spectral mode obeys

    w' = sqrt(lam) z,    z' = -c(t)^2 sqrt(lam) w - b(t) z,

with ``w`` the mode coefficient of ``A^(1/2) u`` and ``z`` that of ``u'``.
Modes never couple, so :func:`evolve` is a loop over :func:`evolve_mode`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _dop853
from .coefficients import INF, CoefficientProfile, check_speed
from .spectrum import SpectrumModel, StateVector, ordered_sum

__all__ = [
    "IntegrationError",
    "IntegratorConfig",
    "Trajectory",
    "closed_form_constant",
    "energy",
    "energy_lower_bound",
    "evolve",
    "evolve_mode",
    "gronwall_tail_bound",
    "k1_constant",
    "LONG_HORIZON",
]


class IntegrationError(RuntimeError):
    """The integrator could not advance; carries the failure time and mode."""

    def __init__(self, message, t=None, mode=None):
        super().__init__(message)
        self.t = t
        self.mode = mode


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.1
    breakpoint_splitting: bool = True

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")

    def to_dict(self):
        return {"rel_tol": self.rel_tol, "abs_tol": self.abs_tol,
                "max_step": self.max_step,
                "breakpoint_splitting": self.breakpoint_splitting}


# Tolerances for horizons of order 10^3 and beyond; the defaults accumulate
# about 3e-8 of phase error per 1000 time units at lambda = 25.
LONG_HORIZON = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States sampled at increasing times starting from 0.

    ``w`` and ``z`` have shape ``(n_samples, n_modes)``.
    """

    spectrum: SpectrumModel
    times: np.ndarray
    w: np.ndarray
    z: np.ndarray
    c: CoefficientProfile
    b: CoefficientProfile
    config: IntegratorConfig = field(default_factory=IntegratorConfig)

    def __post_init__(self):
        if self.times.ndim != 1 or self.times.size < 1:
            raise ValueError("need at least one sample time")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        shape = (self.times.size, self.spectrum.n_modes)
        if self.w.shape != shape or self.z.shape != shape:
            raise ValueError("state arrays do not match times x modes")
        if not (np.all(np.isfinite(self.w)) and np.all(np.isfinite(self.z))):
            raise ValueError("trajectory contains non-finite states")

    def __len__(self):
        return self.times.size

    def state(self, i: int) -> StateVector:
        return StateVector(self.w[i], self.z[i])

    def energies(self) -> np.ndarray:
        """``F(t_i)`` along the trajectory."""
        c = np.asarray(self.c.value(self.times), dtype=float)
        kin = np.cumsum(np.abs(self.z) ** 2, axis=1)[:, -1]
        pot = np.cumsum(np.abs(self.w) ** 2, axis=1)[:, -1]
        return 0.5 * kin + 0.5 * c * c * pot


def _segment_tables(profile: CoefficientProfile):
    segs = profile.segments()
    starts = np.array([s[0] for s in segs], dtype=np.float64)
    kinds = np.array([s[1] for s in segs], dtype=np.int64)
    pars = np.array([s[2] for s in segs], dtype=np.float64).reshape(-1, 3)
    return starts, kinds, pars


def _subintervals(c, b, t0, t1, config):
    if config.breakpoint_splitting:
        cuts = sorted({x for x in (*c.breakpoints, *b.breakpoints) if t0 < x < t1})
    else:
        cuts = []
    bounds = np.array([t0, *cuts, t1], dtype=np.float64)
    return bounds


def _pinned_segments(starts, bounds, splitting):
    if not splitting:
        return np.full(bounds.size - 1, -1, dtype=np.int64)
    mids = 0.5 * (bounds[:-1] + bounds[1:])
    return np.array([_dop853.find_segment(m, starts) for m in mids], dtype=np.int64)


def _integrate(lam, w0, z0, c, b, times, config, restoring_sign=1.0):
    """Mode solution sampled at ``times`` (``times[0]`` is the start)."""
    times = np.ascontiguousarray(times, dtype=np.float64)
    n = times.size
    out_w = np.empty(n, dtype=np.complex128)
    out_z = np.empty(n, dtype=np.complex128)
    if n == 1 or times[-1] == times[0]:
        out_w[:] = w0
        out_z[:] = z0
        return out_w, out_z
    cs, ck, cp = _segment_tables(c)
    bs, bk, bp = _segment_tables(b)
    bounds = _subintervals(c, b, times[0], times[-1], config)
    seg_c = _pinned_segments(cs, bounds, config.breakpoint_splitting)
    seg_b = _pinned_segments(bs, bounds, config.breakpoint_splitting)
    status, t_fail, _ = _dop853.integrate_mode(
        math.sqrt(lam), complex(w0), complex(z0), bounds, seg_c, seg_b, times,
        cs, ck, cp, bs, bk, bp, config.rel_tol, config.abs_tol, config.max_step,
        out_w, out_z, float(restoring_sign))
    if status == _dop853.STATUS_STEP_UNDERFLOW:
        raise IntegrationError(f"step size underflow at t={t_fail!r} (lambda={lam!r})", t_fail)
    if status == _dop853.STATUS_NON_FINITE:
        raise IntegrationError(f"non-finite state at t={t_fail!r} (lambda={lam!r})", t_fail)
    return out_w, out_z


def evolve_mode(lam: float, w0: complex, z0: complex, c: CoefficientProfile,
                b: CoefficientProfile, t0: float, t1: float,
                config: IntegratorConfig | None = None) -> tuple[complex, complex]:
    """Advance one mode from ``t0`` to ``t1``; returns ``(w(t1), z(t1))``."""
    config = config or IntegratorConfig()
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if not 0 <= t0 <= t1 or not math.isfinite(t1):
        raise ValueError(f"need 0 <= t0 <= t1 < inf, got t0={t0}, t1={t1}")
    check_speed(c)
    out_w, out_z = _integrate(lam, w0, z0, c, b, np.array([t0, t1], dtype=float), config)
    return complex(out_w[-1]), complex(out_z[-1])


def evolve(spectrum: SpectrumModel, initial: StateVector, c: CoefficientProfile,
           b: CoefficientProfile, sample_times, config: IntegratorConfig | None = None,
           threads: int = 1, _restoring_sign: float = 1.0) -> Trajectory:
    """Evolve every mode independently and sample at ``sample_times``.

    ``sample_times`` must start at 0 and increase strictly.  With
    ``threads > 1`` modes are integrated concurrently; results are written by
    mode index, so the output does not depend on scheduling.
    ``_restoring_sign`` exists only for mutation tests of the invariant harness.
    """
    config = config or IntegratorConfig()
    check_speed(c)
    initial.check_spectrum(spectrum)
    times = np.asarray(sample_times, dtype=np.float64).reshape(-1)
    if times.size == 0 or times[0] != 0.0:
        raise ValueError("sample times must start at 0")
    if np.any(np.diff(times) <= 0) or not np.all(np.isfinite(times)):
        raise ValueError("sample times must be finite and strictly increasing")
    n_modes = spectrum.n_modes
    W = np.empty((times.size, n_modes), dtype=np.complex128)
    Z = np.empty((times.size, n_modes), dtype=np.complex128)

    def one(k):
        try:
            W[:, k], Z[:, k] = _integrate(spectrum.eigenvalues[k], initial.w[k],
                                          initial.z[k], c, b, times, config,
                                          _restoring_sign)
        except IntegrationError as exc:
            raise IntegrationError(f"mode {k}: {exc}", exc.t, k) from exc

    if threads > 1 and n_modes > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(one, range(n_modes)))
    else:
        for k in range(n_modes):
            one(k)
    return Trajectory(spectrum, times, W, Z, c, b, config)


def closed_form_constant(lam: float, w0: complex, z0: complex, c0: float, t):
    """Exact mode solution for constant speed ``c0`` and no damping."""
    if not c0 > 0:
        raise ValueError("c0 must be positive")
    theta = c0 * math.sqrt(lam) * np.asarray(t, dtype=float)
    cos, sin = np.cos(theta), np.sin(theta)
    w = w0 * cos + (z0 / c0) * sin
    z = -c0 * w0 * sin + z0 * cos
    if np.ndim(t) == 0:
        return complex(w), complex(z)
    return w, z


def energy(state: StateVector, c_value: float) -> float:
    """``F = |z|^2 / 2 + c^2 |w|^2 / 2``."""
    if not c_value > 0:
        raise ValueError("c_value must be positive")
    kin = ordered_sum(np.abs(state.z) ** 2)
    pot = ordered_sum(np.abs(state.w) ** 2)
    return 0.5 * kin + 0.5 * c_value ** 2 * pot


def energy_lower_bound(F_at_S: float, c: CoefficientProfile, b: CoefficientProfile) -> float:
    """``F(S) exp(-2 |b|_{L1(0,inf)} - 2 Var(c; [0, inf)) / inf c)``."""
    check_speed(c)
    c0 = c.infimum()
    exponent = -2.0 * b.l1_norm(0.0, INF) - 2.0 * c.total_variation(0.0, INF) / c0
    return F_at_S * math.exp(exponent)


def k1_constant(c: CoefficientProfile) -> float:
    """Constant of the tail bound: ``|Y| |Y^-1| max(C, 1/c0, 1/c0^2)``.

    ``|Y| <= sqrt(2) max(1, C)`` and ``|Y^-1| <= max(1, 1/c0) / sqrt(2)``
    where ``C = sup c`` and ``c0 = inf c``; see ``docs/tail_bound.md``.
    """
    check_speed(c)
    c0, cmax = c.infimum(), c.supremum()
    y_norm = math.sqrt(2.0) * max(1.0, cmax)
    y_inv_norm = max(1.0, 1.0 / c0) / math.sqrt(2.0)
    return y_norm * y_inv_norm * max(cmax, 1.0 / c0, 1.0 / c0 ** 2)


def gronwall_tail_bound(y_norm_at_0: float, c: CoefficientProfile, b: CoefficientProfile,
                        s: float, t: float) -> float:
    """Bound on ``|y(t) - y(s)|`` for the diagonalized state.

    ``K1 (Var(c;[s,t]) + |b|_{L1(s,t)}) exp(K1 Var(c;[0,inf)) + |b|_{L1(0,inf)}) |y(0)|``.
    ``t`` may be ``inf``.
    """
    if s > t:
        raise ValueError("need s <= t")
    k1 = k1_constant(c)
    local = c.total_variation(s, t) + b.l1_norm(s, t)
    growth = math.exp(k1 * c.total_variation(0.0, INF) + b.l1_norm(0.0, INF))
    return k1 * local * growth * y_norm_at_0
