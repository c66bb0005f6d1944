"""Closed-form coefficient profiles for the wave speed and the damping.

Every family knows its exact total variation, antiderivative, drift
``f(t) = int_0^t (c(s) - c_inf) ds``, ``L1`` norm and the convergence class of
the drift, so none of these quantities are estimated numerically.  The only
quadrature in this module lives in :class:`MollifiedProfile`, which exists to
check the two mollifier inequalities, not to drive dynamics.
"""

from __future__ import annotations

import enum
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy import integrate

__all__ = [
    "INF",
    "CoefficientProfile",
    "Constant",
    "PiecewiseLinear",
    "PowerPerturbation",
    "ExpPerturbation",
    "StepFunction",
    "DriftKind",
    "DriftClassification",
    "MollifiedProfile",
    "evaluate",
    "total_variation",
    "antiderivative",
    "drift",
    "classify_drift",
    "l1_norm",
    "mollify",
    "check_speed",
    "profile_from_dict",
    "kernel",
    "kernel_derivative",
]

INF = math.inf

FAMILIES = ("constant", "piecewise_linear", "power", "exp", "step")


def _check_time(t, name="t"):
    t = float(t)
    if math.isnan(t) or t < 0:
        raise ValueError(f"{name} must be a non-negative time, got {t}")
    return t


def _check_interval(s, t):
    s = _check_time(s, "s")
    t = _check_time(t, "t")
    if s > t:
        raise ValueError(f"empty interval: s={s} > t={t}")
    if math.isinf(s):
        raise ValueError("left endpoint must be finite")
    return s, t


def _finite(x, name):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite")
    return x


class DriftKind(str, enum.Enum):
    CONVERGENT = "Convergent"
    DIVERGENT_TO_INFINITY = "DivergentToInfinity"
    DIVERGENT_TO_MINUS_INFINITY = "DivergentToMinusInfinity"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class DriftClassification:
    """Convergence class of ``f(t) = int_0^t (c - c_inf)`` as ``t -> inf``."""

    kind: DriftKind
    f_inf: float | None = None
    certificate: str = ""

    def __post_init__(self):
        if self.kind is DriftKind.CONVERGENT:
            if self.f_inf is None or not math.isfinite(self.f_inf):
                raise ValueError("a convergent drift carries a finite limit")
        elif self.f_inf is not None:
            raise ValueError("only a convergent drift carries a limit")

    @property
    def convergent(self) -> bool:
        return self.kind is DriftKind.CONVERGENT

    def to_dict(self):
        return {"kind": self.kind.value, "f_inf": self.f_inf,
                "certificate": self.certificate}

    @classmethod
    def from_dict(cls, d):
        return cls(DriftKind(d["kind"]), d.get("f_inf"), d.get("certificate", ""))


class CoefficientProfile(ABC):
    """A coefficient ``c(t)`` on ``[0, inf)`` with a limit at infinity."""

    family: str = ""

    @abstractmethod
    def value(self, t):
        """Exact value at ``t``; accepts scalars or arrays."""

    def __call__(self, t):
        return self.value(t)

    @abstractmethod
    def derivative(self, t):
        """Classical (right) derivative; jumps contribute nothing."""

    @property
    @abstractmethod
    def limit(self) -> float:
        """``c_inf = lim_{t -> inf} c(t)``."""

    @property
    def breakpoints(self) -> tuple:
        """Times ``> 0`` where the profile is not smooth."""
        return ()

    @property
    def jumps(self) -> tuple:
        """``(time, size)`` for every discontinuity."""
        return ()

    @abstractmethod
    def infimum(self) -> float: ...

    @abstractmethod
    def supremum(self) -> float: ...

    @abstractmethod
    def total_variation(self, s=0.0, t=INF) -> float: ...

    @abstractmethod
    def drift(self, t) -> float: ...

    def antiderivative(self, t) -> float:
        t = _check_time(t)
        if math.isinf(t):
            raise ValueError("antiderivative needs a finite time")
        return self.limit * t + self.drift(t)

    @abstractmethod
    def l1_norm(self, s=0.0, t=INF) -> float: ...

    @abstractmethod
    def classify_drift(self) -> DriftClassification: ...

    @abstractmethod
    def segments(self) -> list:
        """``[(start, kind, (p0, p1, p2)), ...]`` covering ``[0, inf)``.

        ``kind`` 0 is ``p0 + p1 t``, 1 is ``p0 + p1 (1 + t)**-p2`` and 2 is
        ``p0 + p1 exp(-p2 t)``.
        """

    @abstractmethod
    def to_dict(self) -> dict: ...

    def is_constant(self) -> bool:
        return self.total_variation(0.0, INF) == 0.0

    def mollify(self, delta: float) -> "MollifiedProfile":
        return MollifiedProfile(self, delta)


@dataclass(frozen=True)
class Constant(CoefficientProfile):
    value_: float

    family = "constant"

    def __init__(self, value: float):
        object.__setattr__(self, "value_", _finite(value, "value"))

    def value(self, t):
        if np.ndim(t):
            t = np.asarray(t, dtype=float)
            if np.any(t < 0):
                raise ValueError("negative time")
            return np.full(t.shape, self.value_)
        _check_time(t)
        return self.value_

    def derivative(self, t):
        return np.zeros(np.shape(t)) if np.ndim(t) else 0.0

    @property
    def limit(self):
        return self.value_

    def infimum(self):
        return self.value_

    def supremum(self):
        return self.value_

    def total_variation(self, s=0.0, t=INF):
        _check_interval(s, t)
        return 0.0

    def drift(self, t):
        _check_time(t)
        return 0.0

    def l1_norm(self, s=0.0, t=INF):
        s, t = _check_interval(s, t)
        if math.isinf(t):
            if self.value_ != 0.0:
                raise ValueError("non-zero constant is not integrable on [s, inf)")
            return 0.0
        return abs(self.value_) * (t - s)

    def classify_drift(self):
        return DriftClassification(DriftKind.CONVERGENT, 0.0,
                                   "constant profile: drift vanishes identically")

    def segments(self):
        return [(0.0, 0, (self.value_, 0.0, 0.0))]

    def to_dict(self):
        return {"family": self.family, "value": self.value_}

    def __repr__(self):
        return f"Constant({self.value_!r})"


class _MonotoneTail(CoefficientProfile):
    """Shared logic for ``c_inf + a * g(t)`` with ``g`` positive, decreasing to 0."""

    c_inf: float
    amplitude: float

    @abstractmethod
    def _g(self, t): ...

    @abstractmethod
    def _g_integral(self, t) -> float:
        """``int_0^t g``; ``t`` may be infinite."""

    @abstractmethod
    def _g_inverse(self, y) -> float:
        """Time at which ``g`` equals ``y`` in ``(0, 1]``."""

    def value(self, t):
        if np.ndim(t):
            t = np.asarray(t, dtype=float)
            if np.any(t < 0):
                raise ValueError("negative time")
            return self.c_inf + self.amplitude * self._g(t)
        t = _check_time(t)
        if math.isinf(t):
            return self.c_inf
        return self.c_inf + self.amplitude * float(self._g(t))

    @property
    def limit(self):
        return self.c_inf

    def infimum(self):
        return self.c_inf + min(self.amplitude, 0.0)

    def supremum(self):
        return self.c_inf + max(self.amplitude, 0.0)

    def total_variation(self, s=0.0, t=INF):
        s, t = _check_interval(s, t)
        gt = 0.0 if math.isinf(t) else float(self._g(t))
        return abs(self.amplitude) * abs(float(self._g(s)) - gt)

    def drift(self, t):
        t = _check_time(t)
        if math.isinf(t):
            cls = self.classify_drift()
            if not cls.convergent:
                raise ValueError("drift diverges")
            return cls.f_inf
        return self.amplitude * self._g_integral(t)

    def _primitive(self, t):
        return self.c_inf * t + self.amplitude * self._g_integral(t)

    def l1_norm(self, s=0.0, t=INF):
        s, t = _check_interval(s, t)
        a = self.amplitude
        if math.isinf(t):
            if self.c_inf != 0.0:
                raise ValueError("profile with non-zero limit is not integrable on [s, inf)")
            if a == 0.0:
                return 0.0
            total = self._g_integral(INF)
            if math.isinf(total):
                raise ValueError("tail is not integrable on [s, inf)")
            return abs(a) * (total - self._g_integral(s))
        cuts = [s]
        if a != 0.0 and self.c_inf != 0.0:
            ratio = -self.c_inf / a
            if 0.0 < ratio <= 1.0:
                root = self._g_inverse(ratio)
                if s < root < t:
                    cuts.append(root)
        cuts.append(t)
        return sum(abs(self._primitive(hi) - self._primitive(lo))
                   for lo, hi in zip(cuts[:-1], cuts[1:]))


@dataclass(frozen=True, repr=True)
class PowerPerturbation(_MonotoneTail):
    """``c(t) = c_inf + amplitude * (1 + t)**(-exponent)``."""

    c_inf: float
    amplitude: float
    exponent: float

    family = "power"

    def __post_init__(self):
        for name in ("c_inf", "amplitude", "exponent"):
            object.__setattr__(self, name, _finite(getattr(self, name), name))
        if not self.exponent > 0:
            raise ValueError("exponent must be positive")

    def _g(self, t):
        return (1.0 + t) ** (-self.exponent)

    def _g_integral(self, t):
        p = self.exponent
        if math.isinf(t):
            return 1.0 / (p - 1.0) if p > 1 else INF
        if p == 1.0:
            return math.log1p(t)
        return math.expm1((1.0 - p) * math.log1p(t)) / (1.0 - p)

    def _g_inverse(self, y):
        return y ** (-1.0 / self.exponent) - 1.0

    def derivative(self, t):
        p = self.exponent
        return -self.amplitude * p * (1.0 + np.asarray(t, dtype=float)) ** (-p - 1.0) \
            if np.ndim(t) else -self.amplitude * p * (1.0 + float(t)) ** (-p - 1.0)

    def classify_drift(self):
        a, p = self.amplitude, self.exponent
        if a == 0.0:
            return DriftClassification(DriftKind.CONVERGENT, 0.0,
                                       "zero amplitude: constant speed")
        if p > 1:
            return DriftClassification(
                DriftKind.CONVERGENT, a / (p - 1.0),
                f"int_0^inf a(1+s)^-p ds = a/(p-1) = {a / (p - 1.0)!r} for p={p!r} > 1")
        kind = DriftKind.DIVERGENT_TO_INFINITY if a > 0 else DriftKind.DIVERGENT_TO_MINUS_INFINITY
        growth = "log(1+t)" if p == 1 else f"(1+t)^{1 - p!r}/{1 - p!r}"
        return DriftClassification(
            kind, None, f"p={p!r} <= 1: drift grows like sign(a)*|a|*{growth}")

    def segments(self):
        return [(0.0, 1, (self.c_inf, self.amplitude, self.exponent))]

    def to_dict(self):
        return {"family": self.family, "c_inf": self.c_inf,
                "amplitude": self.amplitude, "exponent": self.exponent}


@dataclass(frozen=True, repr=True)
class ExpPerturbation(_MonotoneTail):
    """``c(t) = c_inf + amplitude * exp(-rate * t)``."""

    c_inf: float
    amplitude: float
    rate: float

    family = "exp"

    def __post_init__(self):
        for name in ("c_inf", "amplitude", "rate"):
            object.__setattr__(self, name, _finite(getattr(self, name), name))
        if not self.rate > 0:
            raise ValueError("rate must be positive")

    def _g(self, t):
        return np.exp(-self.rate * t)

    def _g_integral(self, t):
        if math.isinf(t):
            return 1.0 / self.rate
        return -math.expm1(-self.rate * t) / self.rate

    def _g_inverse(self, y):
        return -math.log(y) / self.rate

    def derivative(self, t):
        r = self.rate
        return -self.amplitude * r * np.exp(-r * np.asarray(t, dtype=float)) \
            if np.ndim(t) else -self.amplitude * r * math.exp(-r * float(t))

    def classify_drift(self):
        f_inf = self.amplitude / self.rate
        return DriftClassification(
            DriftKind.CONVERGENT, f_inf,
            f"int_0^inf a e^(-rs) ds = a/r = {f_inf!r}")

    def segments(self):
        return [(0.0, 2, (self.c_inf, self.amplitude, self.rate))]

    def to_dict(self):
        return {"family": self.family, "c_inf": self.c_inf,
                "amplitude": self.amplitude, "rate": self.rate}


class _Tabulated(CoefficientProfile):
    """Common validation for breakpoint/value tables."""

    def _init_table(self, breakpoints, values):
        bps = tuple(_finite(x, "breakpoint") for x in breakpoints)
        vals = tuple(_finite(x, "value") for x in values)
        if len(bps) == 0 or len(bps) != len(vals):
            raise ValueError("breakpoints and values must be non-empty and of equal length")
        if bps[0] < 0:
            raise ValueError("breakpoints must be non-negative")
        if any(b <= a for a, b in zip(bps[:-1], bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints_", bps)
        object.__setattr__(self, "values", vals)

    @property
    def breakpoints(self):
        return tuple(b for b in self.breakpoints_ if b > 0)

    @property
    def limit(self):
        return self.values[-1]

    def infimum(self):
        return min(self.values)

    def supremum(self):
        return max(self.values)

    def _knots(self, s, t):
        """``s``, the breakpoints strictly inside ``(s, t)``, and ``t``."""
        inner = [b for b in self.breakpoints_ if s < b < t]
        return [s] + inner + [t]

    def _end(self, s, t):
        # past the last breakpoint the profile is constant
        return max(s, self.breakpoints_[-1]) if math.isinf(t) else t

    def drift(self, t):
        t = _check_time(t)
        return self._signed_excess_integral(0.0, self._end(0.0, t))

    def classify_drift(self):
        f_inf = self.drift(INF)
        return DriftClassification(
            DriftKind.CONVERGENT, f_inf,
            f"constant c_inf={self.limit!r} after t={self.breakpoints_[-1]!r}; "
            f"drift equals the exact area {f_inf!r}")

    def to_dict(self):
        return {"family": self.family, "breakpoints": list(self.breakpoints_),
                "values": list(self.values)}


@dataclass(frozen=True, init=False, repr=True)
class PiecewiseLinear(_Tabulated):
    """Linear interpolation through ``(breakpoints, values)``, constant outside."""

    breakpoints_: tuple
    values: tuple

    family = "piecewise_linear"

    def __init__(self, breakpoints, values):
        self._init_table(breakpoints, values)

    def value(self, t):
        if np.ndim(t):
            t = np.asarray(t, dtype=float)
            if np.any(t < 0):
                raise ValueError("negative time")
            return np.interp(t, self.breakpoints_, self.values)
        t = _check_time(t)
        if math.isinf(t):
            return self.values[-1]
        return float(np.interp(t, self.breakpoints_, self.values))

    def _slope(self, t):
        bps, vals = self.breakpoints_, self.values
        i = int(np.searchsorted(bps, t, side="right")) - 1
        if i < 0 or i >= len(bps) - 1:
            return 0.0
        return (vals[i + 1] - vals[i]) / (bps[i + 1] - bps[i])

    def derivative(self, t):
        if np.ndim(t):
            return np.array([self._slope(x) for x in np.ravel(t)]).reshape(np.shape(t))
        return self._slope(float(t))

    def total_variation(self, s=0.0, t=INF):
        s, t = _check_interval(s, t)
        knots = self._knots(s, self._end(s, t))
        vals = [self.value(x) for x in knots]
        return float(sum(abs(b - a) for a, b in zip(vals[:-1], vals[1:])))

    def _signed_excess_integral(self, s, t, shift=None):
        shift = self.limit if shift is None else shift
        knots = self._knots(s, t)
        total = 0.0
        for lo, hi in zip(knots[:-1], knots[1:]):
            total += 0.5 * (hi - lo) * (self.value(lo) + self.value(hi) - 2.0 * shift)
        return total

    def l1_norm(self, s=0.0, t=INF):
        s, t = _check_interval(s, t)
        if math.isinf(t) and self.limit != 0.0:
            raise ValueError("profile with non-zero limit is not integrable on [s, inf)")
        knots = self._knots(s, self._end(s, t))
        total = 0.0
        for lo, hi in zip(knots[:-1], knots[1:]):
            ga, gb = self.value(lo), self.value(hi)
            h = hi - lo
            if ga * gb >= 0:
                total += 0.5 * h * (abs(ga) + abs(gb))
            else:
                total += 0.5 * h * (ga * ga + gb * gb) / (abs(ga) + abs(gb))
        return total

    def segments(self):
        bps, vals = self.breakpoints_, self.values
        segs = []
        if bps[0] > 0:
            segs.append((0.0, 0, (vals[0], 0.0, 0.0)))
        for i in range(len(bps) - 1):
            m = (vals[i + 1] - vals[i]) / (bps[i + 1] - bps[i])
            segs.append((bps[i], 0, (vals[i] - m * bps[i], m, 0.0)))
        segs.append((bps[-1], 0, (vals[-1], 0.0, 0.0)))
        return segs


@dataclass(frozen=True, init=False, repr=True)
class StepFunction(_Tabulated):
    """Right-continuous step function: ``values[i]`` on ``[bp_i, bp_{i+1})``."""

    breakpoints_: tuple
    values: tuple

    family = "step"

    def __init__(self, breakpoints, values):
        self._init_table(breakpoints, values)

    def _index(self, t):
        return max(int(np.searchsorted(self.breakpoints_, t, side="right")) - 1, 0)

    def value(self, t):
        if np.ndim(t):
            t = np.asarray(t, dtype=float)
            if np.any(t < 0):
                raise ValueError("negative time")
            idx = np.clip(np.searchsorted(self.breakpoints_, t, side="right") - 1, 0, None)
            return np.asarray(self.values)[idx]
        t = _check_time(t)
        if math.isinf(t):
            return self.values[-1]
        return self.values[self._index(t)]

    def derivative(self, t):
        return np.zeros(np.shape(t)) if np.ndim(t) else 0.0

    @property
    def jumps(self):
        bps, vals = self.breakpoints_, self.values
        return tuple((bps[i], vals[i] - vals[i - 1]) for i in range(1, len(bps))
                     if vals[i] != vals[i - 1])

    def total_variation(self, s=0.0, t=INF):
        s, t = _check_interval(s, t)
        return float(sum(abs(size) for when, size in self.jumps if s < when <= t))

    def _signed_excess_integral(self, s, t):
        knots = self._knots(s, t)
        return sum((hi - lo) * (self.value(lo) - self.limit)
                   for lo, hi in zip(knots[:-1], knots[1:]))

    def l1_norm(self, s=0.0, t=INF):
        s, t = _check_interval(s, t)
        if math.isinf(t) and self.limit != 0.0:
            raise ValueError("profile with non-zero limit is not integrable on [s, inf)")
        knots = self._knots(s, self._end(s, t))
        return sum((hi - lo) * abs(self.value(lo)) for lo, hi in zip(knots[:-1], knots[1:]))

    def segments(self):
        bps, vals = self.breakpoints_, self.values
        segs = []
        if bps[0] > 0:
            segs.append((0.0, 0, (vals[0], 0.0, 0.0)))
        for b, v in zip(bps, vals):
            segs.append((b, 0, (v, 0.0, 0.0)))
        return segs


# -- module-level operations --------------------------------------------------

def evaluate(profile: CoefficientProfile, t):
    return profile.value(t)


def total_variation(profile: CoefficientProfile, s=0.0, t=INF) -> float:
    return profile.total_variation(s, t)


def antiderivative(profile: CoefficientProfile, t) -> float:
    return profile.antiderivative(t)


def drift(profile: CoefficientProfile, t) -> float:
    return profile.drift(t)


def classify_drift(profile: CoefficientProfile) -> DriftClassification:
    return profile.classify_drift()


def l1_norm(profile: CoefficientProfile, s=0.0, t=INF) -> float:
    return profile.l1_norm(s, t)


def check_speed(profile: CoefficientProfile) -> CoefficientProfile:
    """Reject speed profiles whose infimum is not strictly positive."""
    if not isinstance(profile, CoefficientProfile):
        raise TypeError(f"expected a CoefficientProfile, got {type(profile).__name__}")
    c0 = profile.infimum()
    if not c0 > 0:
        raise ValueError(f"speed profile must satisfy inf c > 0, got inf c = {c0!r}")
    return profile


_FIELDS = {
    "constant": ({"value"}, lambda d: Constant(d["value"])),
    "piecewise_linear": ({"breakpoints", "values"},
                         lambda d: PiecewiseLinear(d["breakpoints"], d["values"])),
    "step": ({"breakpoints", "values"},
             lambda d: StepFunction(d["breakpoints"], d["values"])),
    "power": ({"c_inf", "amplitude", "exponent"},
              lambda d: PowerPerturbation(d["c_inf"], d["amplitude"], d["exponent"])),
    "exp": ({"c_inf", "amplitude", "rate"},
            lambda d: ExpPerturbation(d["c_inf"], d["amplitude"], d["rate"])),
}


def profile_from_dict(d: dict) -> CoefficientProfile:
    """Inverse of ``to_dict``; unknown or missing fields raise ``ValueError``."""
    if "family" not in d:
        raise ValueError("profile needs a 'family' field")
    family = d["family"]
    if family not in _FIELDS:
        raise ValueError(f"unknown profile family {family!r}; expected one of {FAMILIES}")
    fields, build = _FIELDS[family]
    keys = set(d) - {"family"}
    if keys != fields:
        extra, missing = sorted(keys - fields), sorted(fields - keys)
        raise ValueError(f"{family} profile: unexpected fields {extra}, missing {missing}")
    return build(d)


# -- mollification ------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def kernel(x):
    """Polynomial bump ``(15/16)(1 - x^2)^2`` on ``[-1, 1]``: C^1, unit mass."""
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= 1.0, 0.9375 * (1.0 - x * x) ** 2, 0.0)


def kernel_derivative(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= 1.0, -3.75 * x * (1.0 - x * x), 0.0)


class MollifiedProfile:
    """``c_delta = c~ * rho_delta`` with ``c~(t) = c(0)`` for ``t < 0``.

    Values and derivatives are Gauss-Legendre quadratures of the convolution,
    split wherever the extended profile is not smooth, so they are exact for
    the polynomial families and accurate to rounding for the smooth ones.
    """

    def __init__(self, profile: CoefficientProfile, delta: float):
        delta = float(delta)
        if not delta > 0 or not math.isfinite(delta):
            raise ValueError("delta must be a positive finite number")
        self.profile = profile
        self.delta = delta
        # kinks of the extension: t = 0 and the profile's own breakpoints
        self._kinks = (0.0,) + tuple(profile.breakpoints)

    def _extended(self, t):
        return self.profile.value(np.maximum(t, 0.0))

    def _convolve(self, t, weight):
        d = self.delta
        cuts = [-d, d]
        for k in self._kinks:
            if -d < t - k < d:
                cuts.append(t - k)
        cuts = sorted(cuts)
        total = 0.0
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if hi <= lo:
                continue
            half = 0.5 * (hi - lo)
            s = 0.5 * (hi + lo) + half * _GL_X
            total += half * float(np.dot(_GL_W, self._extended(t - s) * weight(s / d)))
        return total

    def value(self, t):
        if np.ndim(t):
            return np.array([self.value(x) for x in np.ravel(t)]).reshape(np.shape(t))
        return self._convolve(float(t), kernel) / self.delta

    __call__ = value

    def derivative(self, t):
        if np.ndim(t):
            return np.array([self.derivative(x) for x in np.ravel(t)]).reshape(np.shape(t))
        return self._convolve(float(t), kernel_derivative) / self.delta ** 2

    def _points(self, S, T):
        d = self.delta
        pts = set()
        for k in self._kinks:
            for p in (k - d, k, k + d):
                if S < p < T:
                    pts.add(p)
        return sorted(pts)

    def _quad(self, f, S, T):
        pts = self._points(S, T)
        edges = [S] + pts + [T]
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            val, _ = integrate.quad(f, lo, hi, limit=200, epsabs=1e-13, epsrel=1e-12)
            total += val
        return total

    def l1_gap(self, S: float, T: float) -> float:
        """``int_S^T |c - c_delta|`` by adaptive quadrature."""
        S, T = _check_interval(S, T)
        return self._quad(lambda t: abs(self.profile.value(t) - self.value(t)), S, T)

    def derivative_mass(self, S: float, T: float) -> float:
        """``int_S^T |c_delta'|`` by adaptive quadrature."""
        S, T = _check_interval(S, T)
        return self._quad(lambda t: abs(self.derivative(t)), S, T)

    def variation_budget(self, S: float, T: float) -> float:
        """``Var(c; [max(S - delta, 0), T + delta])``."""
        return self.profile.total_variation(max(S - self.delta, 0.0), T + self.delta)


def mollify(profile: CoefficientProfile, delta: float) -> MollifiedProfile:
    return MollifiedProfile(profile, delta)
