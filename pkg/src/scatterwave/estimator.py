"""Estimator-style wrapper around profile extraction.

The map from initial data to scattering profile is linear and diagonal in
the eigenbasis, so ``fit`` learns one 2x2 complex matrix per mode by evolving
the two unit initial states.  ``transform`` then applies it to any batch of
initial data.  Rows of ``X`` are states laid out as ``[w_1..w_n, z_1..z_n]``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .coefficients import CoefficientProfile, Constant, check_speed
from .dynamics import IntegratorConfig, evolve
from .scattering import NotAsymptoticallyFree, diagonalize, truncation_time
from .spectrum import SpectrumModel, StateVector

__all__ = ["ScatteringTransformer", "check_states"]


def check_states(X, n_modes: int | None = None) -> np.ndarray:
    """Validate a batch of states and return it as a complex 2-D array.

    sklearn's own ``check_array`` refuses complex input, hence this helper.

    Parameters
    ----------
    X : array_like or StateVector
        Shape ``(n_samples, 2 * n_modes)``; a single StateVector or a 1-D row
        is promoted to one sample.
    n_modes : int, optional
        Expected mode count.
    """
    if isinstance(X, StateVector):
        X = np.concatenate([X.w, X.z])
    X = np.asarray(X)
    if X.dtype == object:
        raise TypeError("object arrays are not accepted")
    X = X.astype(np.complex128, copy=False)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D array, got {X.ndim}-D")
    if X.shape[0] == 0:
        raise ValueError("need at least one sample")
    if X.shape[1] % 2:
        raise ValueError("row length must be even: [w..., z...]")
    if n_modes is not None and X.shape[1] != 2 * n_modes:
        raise ValueError(f"rows have {X.shape[1] // 2} modes, expected {n_modes}")
    if not np.all(np.isfinite(X)):
        raise ValueError("input contains NaN or infinity")
    return X


def _as_spectrum(spectrum):
    return spectrum if isinstance(spectrum, SpectrumModel) else SpectrumModel(spectrum)


class ScatteringTransformer(TransformerMixin, BaseEstimator):
    """Initial data to scattering profile, as a fitted linear operator.

    Parameters
    ----------
    spectrum : SpectrumModel or array_like
        Eigenvalues of the spatial operator.
    c, b : CoefficientProfile
        Wave speed and damping.  ``b`` defaults to zero.
    tol : float
        Relative tail tolerance: the certified profile error for input
        ``x`` is ``tol * |y(0)|``.
    rel_tol, abs_tol, max_step : float
        Integrator settings.

    Attributes
    ----------
    n_modes_ : int
    t_trunc_ : float
    drift_ : DriftClassification
    c_star_ : float or None
        Wave speed of the limiting free wave; ``None`` if the drift diverges.
    profile_map_ : ndarray of shape (n_modes, 2, 2)
        ``[y1, y2] = profile_map_[k] @ [w, z]`` per mode.
    """

    def __init__(self, spectrum=None, c=None, b=None, tol=1e-6, rel_tol=1e-10,
                 abs_tol=1e-12, max_step=0.1):
        self.spectrum = spectrum
        self.c = c
        self.b = b
        self.tol = tol
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.max_step = max_step

    def _validated(self):
        if self.spectrum is None:
            raise ValueError("spectrum is required")
        if not isinstance(self.c, CoefficientProfile):
            raise TypeError("c must be a CoefficientProfile")
        b = Constant(0.0) if self.b is None else self.b
        if not isinstance(b, CoefficientProfile):
            raise TypeError("b must be a CoefficientProfile")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        check_speed(self.c)
        config = IntegratorConfig(self.rel_tol, self.abs_tol, self.max_step)
        return _as_spectrum(self.spectrum), self.c, b, config

    def fit(self, X=None, y=None):
        """Learn the per-mode profile map.  ``X``, if given, only fixes the shape."""
        spectrum, c, b, config = self._validated()
        n = spectrum.n_modes
        if X is not None:
            check_states(X, n)
        t_trunc = truncation_time(1.0, c, b, self.tol)
        M = np.empty((n, 2, 2), dtype=np.complex128)
        ones, zeros = np.ones(n), np.zeros(n)
        for col, x0 in enumerate((StateVector(ones, zeros), StateVector(zeros, ones))):
            if t_trunc > 0:
                traj = evolve(spectrum, x0, c, b, [0.0, t_trunc], config)
                x0 = traj.state(-1)
            yd = diagonalize(x0, t_trunc, c, spectrum)
            M[:, 0, col] = yd.y1
            M[:, 1, col] = yd.y2
        drift = c.classify_drift()
        self.n_modes_ = n
        self.t_trunc_ = t_trunc
        self.drift_ = drift
        self.c_star_ = c.limit if drift.convergent else None
        self.profile_map_ = M
        self.frequencies_ = spectrum.frequencies
        return self

    def transform(self, X):
        """Profiles ``[y1..., y2...]`` for each row of initial data."""
        check_is_fitted(self, "profile_map_")
        X = check_states(X, self.n_modes_)
        n = self.n_modes_
        w, z = X[:, :n], X[:, n:]
        M = self.profile_map_
        y1 = M[:, 0, 0] * w + M[:, 0, 1] * z
        y2 = M[:, 1, 0] * w + M[:, 1, 1] * z
        return np.hstack([y1, y2])

    def predict(self, X):
        """Free-wave amplitudes ``[phi..., psi...]`` that each solution approaches."""
        check_is_fitted(self, "profile_map_")
        if self.c_star_ is None:
            raise NotAsymptoticallyFree(
                f"drift is {self.drift_.kind.value}: no limiting free wave")
        Y = self.transform(X)
        n = self.n_modes_
        rot = np.exp(1j * self.drift_.f_inf * self.frequencies_)
        return np.hstack([rot * Y[:, :n], np.conj(rot) * Y[:, n:]])
