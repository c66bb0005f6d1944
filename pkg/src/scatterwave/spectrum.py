"""Finite spectral model of a positive self-adjoint operator.

The operator is represented by finitely many simple eigenvalues; every
quantity used downstream (fractional powers, the unitary group generated by
the square root, spectral projections, weighted norms) is diagonal in the
eigenbasis, so states are just per-mode coefficient vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpectrumModel",
    "StateVector",
    "dirichlet_interval",
    "ordered_sum",
    "plain_norm",
    "spectral_project",
    "unitary_shift",
    "weighted_norm",
]


def ordered_sum(values):
    """Sequential left-to-right sum of a 1-D array (numpy's ``sum`` blocks pairwise)."""
    values = np.asarray(values).reshape(-1)
    if values.size == 0:
        return 0.0
    return np.cumsum(values)[-1].item()


@dataclass(frozen=True, eq=False)
class SpectrumModel:
    """Strictly increasing positive eigenvalues standing in for the operator.

    Parameters
    ----------
    eigenvalues : array_like
        Eigenvalues ``lambda_k``; must be finite, positive, strictly
        increasing, and non-empty.
    """

    eigenvalues: np.ndarray

    def __post_init__(self):
        lam = np.array(self.eigenvalues, dtype=np.float64).reshape(-1)
        if lam.size == 0:
            raise ValueError("spectrum needs at least one mode")
        if not np.all(np.isfinite(lam)):
            raise ValueError("eigenvalues must be finite")
        if np.any(lam <= 0):
            raise ValueError("eigenvalues must be positive (injective operator)")
        if np.any(np.diff(lam) <= 0):
            raise ValueError("eigenvalues must be strictly increasing")
        lam.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)

    @property
    def n_modes(self) -> int:
        return self.eigenvalues.size

    def __len__(self):
        return self.n_modes

    @property
    def frequencies(self) -> np.ndarray:
        """Square roots of the eigenvalues."""
        return np.sqrt(self.eigenvalues)

    def power(self, alpha: float) -> np.ndarray:
        """Diagonal of ``A**alpha``."""
        return self.eigenvalues ** alpha

    def __eq__(self, other):
        if not isinstance(other, SpectrumModel):
            return NotImplemented
        return np.array_equal(self.eigenvalues, other.eigenvalues)

    def __hash__(self):
        return hash(self.eigenvalues.tobytes())

    def __repr__(self):
        return f"SpectrumModel(eigenvalues={self.eigenvalues.tolist()!r})"


def dirichlet_interval(n_modes: int, length: float = np.pi) -> SpectrumModel:
    """Dirichlet Laplacian on ``[0, length]``: ``lambda_k = (k pi / length)**2``."""
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    if not length > 0:
        raise ValueError("length must be positive")
    k = np.arange(1, n_modes + 1, dtype=np.float64)
    return SpectrumModel((k * np.pi / length) ** 2)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Per-mode pair ``(w_k, z_k)`` of the first-order state.

    ``w`` holds the coefficients of ``A**(1/2) u`` and ``z`` those of ``u'``.
    """

    w: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=np.complex128).reshape(-1)
        z = np.array(self.z, dtype=np.complex128).reshape(-1)
        if w.shape != z.shape:
            raise ValueError(f"component length mismatch: {w.size} vs {z.size}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(z))):
            raise ValueError("state entries must be finite")
        w.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "z", z)

    @classmethod
    def zeros(cls, n_modes: int) -> "StateVector":
        return cls(np.zeros(n_modes), np.zeros(n_modes))

    @classmethod
    def from_array(cls, pairs) -> "StateVector":
        """Build from an ``(n_modes, 2)`` complex array."""
        pairs = np.asarray(pairs, dtype=np.complex128)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise ValueError("expected an array of shape (n_modes, 2)")
        return cls(pairs[:, 0], pairs[:, 1])

    def to_array(self) -> np.ndarray:
        return np.stack([self.w, self.z], axis=1)

    @property
    def n_modes(self) -> int:
        return self.w.size

    def __len__(self):
        return self.n_modes

    def norm(self) -> float:
        return plain_norm(self)

    def __add__(self, other):
        return StateVector(self.w + other.w, self.z + other.z)

    def __sub__(self, other):
        return StateVector(self.w - other.w, self.z - other.z)

    def __mul__(self, scalar):
        return StateVector(scalar * self.w, scalar * self.z)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return np.array_equal(self.w, other.w) and np.array_equal(self.z, other.z)

    __hash__ = None

    def check_spectrum(self, spectrum: SpectrumModel) -> None:
        if self.n_modes != spectrum.n_modes:
            raise ValueError(
                f"state has {self.n_modes} modes, spectrum has {spectrum.n_modes}"
            )


def plain_norm(state: StateVector) -> float:
    """``(sum_k |w_k|**2 + |z_k|**2) ** 0.5``, summed in mode order."""
    sq = np.abs(state.w) ** 2 + np.abs(state.z) ** 2
    return float(np.sqrt(ordered_sum(sq)))


def unitary_shift(x, s: float, spectrum: SpectrumModel):
    """Apply ``exp(i s A**(1/2))`` mode by mode.

    ``x`` is either a per-mode coefficient array or a StateVector, in which
    case both components are rotated.
    """
    s = float(s)
    if not np.isfinite(s):
        raise ValueError("shift parameter must be finite")
    phase = np.exp(1j * s * spectrum.frequencies)
    if isinstance(x, StateVector):
        x.check_spectrum(spectrum)
        return StateVector(phase * x.w, phase * x.z)
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[-1] != spectrum.n_modes:
        raise ValueError(
            f"vector has {x.shape[-1]} modes, spectrum has {spectrum.n_modes}"
        )
    return phase * x


def weighted_norm(state: StateVector, spectrum: SpectrumModel, order: float) -> float:
    """Norm with spectral weight ``1 + lambda**order``.

    ``order == 0`` gives the plain state norm (no doubling), which is the
    convention used everywhere a bare state norm appears.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    state.check_spectrum(spectrum)
    if order == 0:
        return plain_norm(state)
    weight = 1.0 + spectrum.eigenvalues ** order
    sq = weight * (np.abs(state.w) ** 2 + np.abs(state.z) ** 2)
    return float(np.sqrt(ordered_sum(sq)))


def spectral_project(state: StateVector, spectrum: SpectrumModel, cutoff: float) -> StateVector:
    """Keep modes with ``lambda_k < cutoff``; zero the rest."""
    if not cutoff > 0:
        raise ValueError("cutoff must be positive")
    state.check_spectrum(spectrum)
    keep = spectrum.eigenvalues < cutoff
    return StateVector(np.where(keep, state.w, 0), np.where(keep, state.z, 0))
