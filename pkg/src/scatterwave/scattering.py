"""Asymptotic profiles, free-wave reconstruction and the checks around them.

The diagonalizing change of variables, per mode, is

    y1 = exp(-i tau sqrt(lam)) (w - i z / c(t)) / 2
    y2 = exp(+i tau sqrt(lam)) (w + i z / c(t)) / 2,      tau(t) = int_0^t c,

and in these coordinates the state only moves where ``b`` or the variation
of ``c`` is non-zero.  Its limit ``y_inf`` is the scattering profile; when the
drift ``f(t) = tau(t) - c_inf t`` converges, rotating the profile by
``exp(+-i f_inf sqrt(lam))`` gives the free wave that ``u`` approaches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .coefficients import INF, CoefficientProfile, DriftClassification, DriftKind, check_speed
from .dynamics import IntegratorConfig, Trajectory, evolve, gronwall_tail_bound
from .spectrum import SpectrumModel, StateVector, ordered_sum

__all__ = [
    "DiagonalState",
    "FreeSolution",
    "NotAsymptoticallyFree",
    "ProfileError",
    "ScatteringProfile",
    "antiphase_time",
    "best_free_fit",
    "diagonalize",
    "diagonalize_series",
    "discrepancy",
    "discrepancy_certificate",
    "discrepancy_series",
    "equipartition_bound",
    "equipartition_defect",
    "estimate_wave_speed",
    "extract_profile",
    "free_state",
    "free_states",
    "cross_term_bound",
    "phase_profile_error",
    "reconstruct_free",
    "running_wave_speed",
    "speed_sampling_step",
    "time_average_cross",
    "truncation_time",
    "undiagonalize",
]


class NotAsymptoticallyFree(ValueError):
    """The drift does not converge, so no free wave can be reconstructed."""


class ProfileError(RuntimeError):
    """The requested profile tolerance cannot be certified."""


def _vnorm(x) -> float:
    return math.sqrt(ordered_sum(np.abs(x) ** 2))


@dataclass(frozen=True, eq=False)
class DiagonalState:
    """Per-mode pair ``(y1_k, y2_k)`` in diagonal coordinates."""

    y1: np.ndarray
    y2: np.ndarray

    def __post_init__(self):
        y1 = np.array(self.y1, dtype=np.complex128).reshape(-1)
        y2 = np.array(self.y2, dtype=np.complex128).reshape(-1)
        if y1.shape != y2.shape:
            raise ValueError("component length mismatch")
        y1.setflags(write=False)
        y2.setflags(write=False)
        object.__setattr__(self, "y1", y1)
        object.__setattr__(self, "y2", y2)

    @property
    def n_modes(self):
        return self.y1.size

    def norm(self) -> float:
        return math.sqrt(ordered_sum(np.abs(self.y1) ** 2 + np.abs(self.y2) ** 2))

    def __sub__(self, other):
        return DiagonalState(self.y1 - other.y1, self.y2 - other.y2)

    def __mul__(self, scalar):
        return DiagonalState(scalar * self.y1, scalar * self.y2)

    __rmul__ = __mul__


def _tau_phase(t, c, spectrum):
    return np.exp(1j * c.antiderivative(t) * spectrum.frequencies)


def diagonalize(state: StateVector, t: float, c: CoefficientProfile,
                spectrum: SpectrumModel) -> DiagonalState:
    state.check_spectrum(spectrum)
    check_speed(c)
    e = _tau_phase(t, c, spectrum)
    ct = c.value(t)
    return DiagonalState(0.5 * np.conj(e) * (state.w - 1j * state.z / ct),
                         0.5 * e * (state.w + 1j * state.z / ct))


def undiagonalize(y: DiagonalState, t: float, c: CoefficientProfile,
                  spectrum: SpectrumModel) -> StateVector:
    if y.n_modes != spectrum.n_modes:
        raise ValueError("mode count mismatch")
    check_speed(c)
    e = _tau_phase(t, c, spectrum)
    ct = c.value(t)
    a, b = e * y.y1, np.conj(e) * y.y2
    return StateVector(a + b, 1j * ct * (a - b))


def diagonalize_series(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """``(Y1, Y2)`` of shape ``(n_samples, n_modes)`` along a trajectory."""
    tau = np.array([traj.c.antiderivative(t) for t in traj.times])
    ct = np.asarray(traj.c.value(traj.times), dtype=float)[:, None]
    e = np.exp(1j * tau[:, None] * traj.spectrum.frequencies[None, :])
    y1 = 0.5 * np.conj(e) * (traj.w - 1j * traj.z / ct)
    y2 = 0.5 * e * (traj.w + 1j * traj.z / ct)
    return y1, y2


@dataclass(frozen=True, eq=False)
class ScatteringProfile:
    """Truncated profile ``y(T_trunc)`` and its tail certificate.

    ``eps_tail`` bounds ``|y_inf - y(T_trunc)|``.
    """

    y1: np.ndarray
    y2: np.ndarray
    t_trunc: float
    eps_tail: float

    def __post_init__(self):
        if not self.eps_tail >= 0:
            raise ValueError("eps_tail must be non-negative")
        for name in ("y1", "y2"):
            arr = np.array(getattr(self, name), dtype=np.complex128).reshape(-1)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.y1.shape != self.y2.shape:
            raise ValueError("component length mismatch")

    @property
    def n_modes(self):
        return self.y1.size

    def as_diagonal(self) -> DiagonalState:
        return DiagonalState(self.y1, self.y2)

    def norm(self) -> float:
        return self.as_diagonal().norm()


def truncation_time(y_norm_at_0: float, c: CoefficientProfile, b: CoefficientProfile,
                    tol: float, max_time: float = 1e9) -> float:
    """Smallest ``T`` (to bisection precision) with tail bound ``<= tol``."""
    if not tol > 0:
        raise ValueError("tol must be positive")

    def tail(T):
        return gronwall_tail_bound(y_norm_at_0, c, b, T, INF)

    if tail(0.0) <= tol:
        return 0.0
    hi = 1.0
    while tail(hi) > tol:
        hi *= 2.0
        if hi > max_time:
            raise ProfileError(
                f"tail bound stays above tol={tol!r} up to T={max_time!r}")
    lo = hi / 2.0 if hi > 1.0 else 0.0
    for _ in range(200):
        if hi - lo <= 1e-9 * hi:
            break
        mid = 0.5 * (lo + hi)
        if tail(mid) <= tol:
            hi = mid
        else:
            lo = mid
    return hi


def extract_profile(initial: StateVector, c: CoefficientProfile, b: CoefficientProfile,
                    spectrum: SpectrumModel, tol: float,
                    config: IntegratorConfig | None = None, max_time: float = 1e9,
                    threads: int = 1) -> ScatteringProfile:
    """Evolve to a certified truncation time and return ``y`` there.

    The truncation time comes from the a-priori tail bound alone, never from
    watching the trajectory.
    """
    y0 = diagonalize(initial, 0.0, c, spectrum)
    t_trunc = truncation_time(y0.norm(), c, b, tol, max_time)
    if t_trunc == 0.0:
        return ScatteringProfile(y0.y1, y0.y2, 0.0, 0.0)
    traj = evolve(spectrum, initial, c, b, [0.0, t_trunc], config, threads=threads)
    y = diagonalize(traj.state(-1), t_trunc, c, spectrum)
    eps = gronwall_tail_bound(y0.norm(), c, b, t_trunc, INF)
    return ScatteringProfile(y.y1, y.y2, t_trunc, eps)


@dataclass(frozen=True, eq=False)
class FreeSolution:
    """Free wave with speed ``c_star`` and phase amplitudes ``(phi, psi)``."""

    c_star: float
    phi: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        if not self.c_star > 0:
            raise ValueError("c_star must be positive")
        for name in ("phi", "psi"):
            arr = np.array(getattr(self, name), dtype=np.complex128).reshape(-1)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.phi.shape != self.psi.shape:
            raise ValueError("component length mismatch")


def reconstruct_free(profile: ScatteringProfile, drift: DriftClassification,
                     c_inf: float, spectrum: SpectrumModel) -> FreeSolution:
    if drift.kind is not DriftKind.CONVERGENT:
        raise NotAsymptoticallyFree(
            f"drift is {drift.kind.value}: no free wave approximates the solution")
    if profile.n_modes != spectrum.n_modes:
        raise ValueError("mode count mismatch")
    rot = np.exp(1j * drift.f_inf * spectrum.frequencies)
    return FreeSolution(c_inf, rot * profile.y1, np.conj(rot) * profile.y2)


def free_states(free: FreeSolution, times, spectrum: SpectrumModel):
    """``(W, Z)`` of the free wave at each time, shape ``(n_times, n_modes)``."""
    times = np.asarray(times, dtype=float).reshape(-1)
    e = np.exp(1j * free.c_star * times[:, None] * spectrum.frequencies[None, :])
    a, b = e * free.phi, np.conj(e) * free.psi
    return a + b, 1j * free.c_star * (a - b)


def free_state(free: FreeSolution, t: float, spectrum: SpectrumModel) -> StateVector:
    if free.phi.size != spectrum.n_modes:
        raise ValueError("mode count mismatch")
    W, Z = free_states(free, [t], spectrum)
    return StateVector(W[0], Z[0])


def discrepancy(u_state: StateVector, free: FreeSolution, t: float,
                spectrum: SpectrumModel) -> float:
    """``|w_u - w_v| + |z_u - z_v|`` at time ``t``."""
    v = free_state(free, t, spectrum)
    return _vnorm(u_state.w - v.w) + _vnorm(u_state.z - v.z)


def discrepancy_series(traj: Trajectory, free: FreeSolution) -> np.ndarray:
    W, Z = free_states(free, traj.times, traj.spectrum)
    dw = np.sqrt(np.cumsum(np.abs(traj.w - W) ** 2, axis=1)[:, -1])
    dz = np.sqrt(np.cumsum(np.abs(traj.z - Z) ** 2, axis=1)[:, -1])
    return dw + dz


def best_free_fit(u_state: StateVector, t0: float, c_star: float,
                  spectrum: SpectrumModel) -> FreeSolution:
    """The free wave of speed ``c_star`` passing through ``u_state`` at ``t0``."""
    if not c_star > 0:
        raise ValueError("c_star must be positive")
    u_state.check_spectrum(spectrum)
    e = np.exp(1j * c_star * t0 * spectrum.frequencies)
    phi = 0.5 * np.conj(e) * (u_state.w - 1j * u_state.z / c_star)
    psi = 0.5 * e * (u_state.w + 1j * u_state.z / c_star)
    return FreeSolution(c_star, phi, psi)


def time_average_cross(free: FreeSolution, T: float, spectrum: SpectrumModel) -> complex:
    """``(1/T) int_0^T (exp(2 i c* t A^(1/2)) phi, psi) dt`` in closed form."""
    if not T > 0:
        raise ValueError("T must be positive")
    half = free.c_star * T * spectrum.frequencies
    # (e^{2ih} - 1) / (2ih) = e^{ih} sin(h) / h
    factor = np.exp(1j * half) * np.sin(half) / half
    return complex(ordered_sum(free.phi * np.conj(free.psi) * factor))


def cross_term_bound(free: FreeSolution, spectrum: SpectrumModel) -> float:
    """``sum |phi psi| / (c* sqrt(lam))``; bounds ``T |time_average_cross(T)|``."""
    return ordered_sum(np.abs(free.phi * free.psi) / (free.c_star * spectrum.frequencies))


def equipartition_defect(free: FreeSolution, T: float, spectrum: SpectrumModel) -> float:
    """``|c*^2 <|w_v|^2>_T - <|z_v|^2>_T| = 4 c*^2 |Re <cross>_T|``."""
    return 4.0 * free.c_star ** 2 * abs(time_average_cross(free, T, spectrum).real)


def equipartition_bound(free: FreeSolution, spectrum: SpectrumModel) -> float:
    """``4 c* sum |phi psi| / sqrt(lam)``; bounds ``T * equipartition_defect(T)``."""
    return 4.0 * free.c_star ** 2 * cross_term_bound(free, spectrum)


def speed_sampling_step(spectrum: SpectrumModel, c: CoefficientProfile) -> float:
    """Sample spacing resolving the fastest mode: ``min(0.05, period / 20)``."""
    period = 2.0 * math.pi / (c.supremum() * spectrum.frequencies[-1])
    return min(0.05, period / 20.0)


def estimate_wave_speed(traj: Trajectory, T: float) -> float:
    """``sqrt(int_0^T |z|^2 / int_0^T |w|^2)`` by the trapezoid rule."""
    if not T > 0:
        raise ValueError("T must be positive")
    if traj.times[-1] < T * (1 - 1e-12):
        raise ValueError(f"trajectory ends at {traj.times[-1]!r} < T={T!r}")
    mask = traj.times <= T * (1 + 1e-12)
    t = traj.times[mask]
    kin = np.cumsum(np.abs(traj.z[mask]) ** 2, axis=1)[:, -1]
    pot = np.cumsum(np.abs(traj.w[mask]) ** 2, axis=1)[:, -1]
    num, den = np.trapezoid(kin, t), np.trapezoid(pot, t)
    if not den > 0 or not num > 0:
        raise ValueError("trivial trajectory: wave speed undefined")
    return math.sqrt(num / den)


def running_wave_speed(traj: Trajectory) -> np.ndarray:
    """Wave-speed estimate over ``[0, t_i]`` for every sample.

    At ``t = 0`` the average degenerates to the instantaneous ratio, which is
    its limit.
    """
    kin = np.cumsum(np.abs(traj.z) ** 2, axis=1)[:, -1]
    pot = np.cumsum(np.abs(traj.w) ** 2, axis=1)[:, -1]
    dt = np.diff(traj.times)
    num = np.concatenate([[0.0], np.cumsum(0.5 * dt * (kin[1:] + kin[:-1]))])
    den = np.concatenate([[0.0], np.cumsum(0.5 * dt * (pot[1:] + pot[:-1]))])
    out = np.empty_like(num)
    out[0] = math.sqrt(kin[0] / pot[0]) if pot[0] > 0 else math.nan
    with np.errstate(divide="ignore", invalid="ignore"):
        out[1:] = np.sqrt(num[1:] / den[1:])
    return out


def phase_profile_error(profile: ScatteringProfile, free: FreeSolution, drift_value: float,
                        spectrum: SpectrumModel) -> float:
    """``|e^{i f sqrt(lam)} y1 - phi| + |e^{-i f sqrt(lam)} y2 - psi|``."""
    rot = np.exp(1j * drift_value * spectrum.frequencies)
    return _vnorm(rot * profile.y1 - free.phi) + _vnorm(np.conj(rot) * profile.y2 - free.psi)


def discrepancy_certificate(profile: ScatteringProfile, c: CoefficientProfile,
                            b: CoefficientProfile, spectrum: SpectrumModel, t: float,
                            y_norm_at_0: float) -> float:
    """Rigorous upper bound on ``D(t)`` against ``reconstruct_free(profile)``.

    Three pieces: the distance of ``y(t)`` from the truncated profile (tail
    bound between ``t`` and ``T_trunc``), the residual phase
    ``exp(i (f_inf - f(t)) sqrt(lam))``, and the speed gap ``|c(t) - c_inf|``::

        D(t) <= (1 + c(t)) (sqrt(2) G + P(t)) + |c(t) - c_inf| (|y1| + |y2|)
    """
    drift = c.classify_drift()
    if not drift.convergent:
        raise NotAsymptoticallyFree("certificate needs a convergent drift")
    lo, hi = sorted((float(t), profile.t_trunc))
    g = gronwall_tail_bound(y_norm_at_0, c, b, lo, hi)
    theta = (drift.f_inf - c.drift(t)) * spectrum.frequencies
    rot = np.exp(1j * theta)
    phase = _vnorm((1 - rot) * profile.y1) + _vnorm((1 - np.conj(rot)) * profile.y2)
    ct = c.value(t)
    y_sum = _vnorm(profile.y1) + _vnorm(profile.y2)
    return (1.0 + ct) * (math.sqrt(2.0) * g + phase) + abs(ct - c.limit) * y_sum


def antiphase_time(c: CoefficientProfile, t0: float, spectrum: SpectrumModel,
                   max_time: float = 1e12) -> float | None:
    """First ``T > t0`` with ``|f(T) - f(t0)| = pi / min sqrt(lam)``.

    The sign follows the divergence direction of the drift.  Returns ``None``
    when the drift never moves that far before ``max_time``.
    """
    target = math.pi / spectrum.frequencies[0]
    kind = c.classify_drift().kind
    sign = -1.0 if kind is DriftKind.DIVERGENT_TO_MINUS_INFINITY else 1.0
    f0 = c.drift(t0)

    def gap(T):
        return sign * (c.drift(T) - f0) - target

    lo, hi = t0, max(2.0 * t0, t0 + 1.0)
    while gap(hi) < 0:
        lo, hi = hi, 2.0 * hi
        if hi > max_time:
            return None
    return optimize.brentq(gap, lo, hi, xtol=1e-12 * hi, rtol=1e-14, maxiter=500)
