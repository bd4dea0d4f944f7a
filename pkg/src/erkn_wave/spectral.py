"""Fourier coefficient states on the 2K-point periodic grid.

Coefficient vectors are stored in transform-natural order
``j = 0, 1, ..., K-1, -K, ..., -1`` so that evaluation at the collocation
points ``x_k = pi k / K`` is a plain length-2K DFT.  Use :func:`mode_indices`
to recover the wavenumber of each slot, and :func:`to_natural` /
:func:`from_natural` to convert to and from ``-K, ..., K-1`` ordering.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class SizeError(ValueError):
    """Vectors with incompatible mode counts were combined."""


def mode_indices(K: int) -> np.ndarray:
    """Wavenumbers ``j`` of the 2K storage slots, in storage order."""
    if K < 1:
        raise ValueError(f"K must be positive, got {K}")
    return np.fft.fftfreq(2 * K, 1.0 / (2 * K)).astype(np.int64)


def slot(K: int, j: int) -> int:
    """Storage position of wavenumber ``j`` in ``{-K, ..., K-1}``."""
    if not -K <= j <= K - 1:
        raise IndexError(f"wavenumber {j} outside [-{K}, {K - 1}]")
    return j % (2 * K)


def to_natural(v: np.ndarray) -> np.ndarray:
    """Reorder from storage order to ``-K, ..., K-1``."""
    return np.fft.fftshift(v)


def from_natural(v: np.ndarray) -> np.ndarray:
    """Reorder from ``-K, ..., K-1`` to storage order."""
    return np.fft.ifftshift(v)


def unit_mode(K: int, j: int, value: complex = 1.0) -> np.ndarray:
    """Coefficient vector with a single nonzero entry at wavenumber ``j``."""
    v = np.zeros(2 * K, dtype=complex)
    v[slot(K, j)] = value
    return v


def _half_size(v: np.ndarray) -> int:
    n = v.shape[-1]
    if n < 2 or n % 2:
        raise SizeError(f"coefficient vector must have even length 2K >= 2, got {n}")
    return n // 2


def _check_same(*vs: np.ndarray) -> int:
    K = _half_size(vs[0])
    for v in vs[1:]:
        if _half_size(v) != K:
            raise SizeError(f"mode count mismatch: {vs[0].shape[-1]} vs {v.shape[-1]}")
    return K


@dataclass(frozen=True, eq=False)
class FourierState:
    """Coefficients ``(y, ydot)`` of ``u`` and ``u_t``, storage order."""

    y: np.ndarray
    ydot: np.ndarray

    def __post_init__(self):
        y = np.array(self.y, dtype=complex)
        ydot = np.array(self.ydot, dtype=complex)
        if y.ndim != 1 or ydot.ndim != 1:
            raise SizeError("state vectors must be one-dimensional")
        _check_same(y, ydot)
        y.flags.writeable = False
        ydot.flags.writeable = False
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "ydot", ydot)

    @property
    def K(self) -> int:
        return self.y.shape[0] // 2

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.y)) and np.all(np.isfinite(self.ydot)))

    def hermitian_defect(self) -> float:
        """Largest violation of the real-field symmetry in either vector."""
        return max(hermitian_defect(self.y), hermitian_defect(self.ydot))

    def conj(self) -> "FourierState":
        return FourierState(np.conj(self.y), np.conj(self.ydot))

    def __sub__(self, other: "FourierState") -> "FourierState":
        _check_same(self.y, other.y)
        return FourierState(self.y - other.y, self.ydot - other.ydot)

    def allclose(self, other: "FourierState", atol: float = 0.0, rtol: float = 0.0) -> bool:
        return bool(
            np.allclose(self.y, other.y, atol=atol, rtol=rtol)
            and np.allclose(self.ydot, other.ydot, atol=atol, rtol=rtol)
        )


def hermitian_defect(v: np.ndarray) -> float:
    """``max |v_{-j} - conj(v_j)|`` over all ``j``; zero iff the field is real.

    Covers ``j = 0`` and ``j = -K`` too, whose mirror is themselves, so they
    must have zero imaginary part.
    """
    K = _half_size(v)
    mirror = np.conj(v[(-mode_indices(K)) % (2 * K)])
    return float(np.max(np.abs(v - mirror)))


class WeightRule(enum.Enum):
    SPECTRAL_ANGLE = "spectral"
    FINITE_DIFFERENCE = "finite_difference"


@dataclass(frozen=True, eq=False)
class FrequencySet:
    """Per-mode frequencies and the weights used by the Sobolev norms.

    ``omegas`` are in storage order.  ``omega_min`` is the smallest nonzero
    frequency and only matters for the finite-difference weight rule.
    """

    omegas: np.ndarray
    weight_rule: WeightRule
    omega_min: float | None = None
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        om = np.array(self.omegas, dtype=float)
        _half_size(om)
        if np.any(om < 0) or not np.all(np.isfinite(om)):
            raise ValueError("frequencies must be finite and nonnegative")
        om.flags.writeable = False
        object.__setattr__(self, "omegas", om)
        if self.weight_rule is WeightRule.SPECTRAL_ANGLE:
            w = np.maximum(1.0, np.abs(mode_indices(self.K)).astype(float))
        else:
            nonzero = om[om > 0]
            if nonzero.size == 0:
                raise ValueError("finite-difference weights need a nonzero frequency")
            wmin = float(nonzero.min())
            if self.omega_min is not None and self.omega_min != wmin:
                raise ValueError(f"omega_min={self.omega_min} but smallest nonzero frequency is {wmin}")
            object.__setattr__(self, "omega_min", wmin)
            w = np.maximum(om, wmin)
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def K(self) -> int:
        return self.omegas.shape[0] // 2


def discrete_convolution(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Aliased convolution ``(a*b)_j = sum_{k+l = j mod 2K} a_k b_l``.

    Computed through pointwise products at the 2K collocation points; no
    zero-padding, since the mod-2K aliasing is the intended product.
    """
    _check_same(a, b)
    return from_collocation(to_collocation(a) * to_collocation(b))


def nonlinearity(y: np.ndarray, p: int) -> np.ndarray:
    """The p-fold self-convolution ``y * ... * y``."""
    if int(p) != p or p < 2:
        raise ValueError(f"nonlinearity power must be an integer >= 2, got {p}")
    _half_size(y)
    return from_collocation(to_collocation(y) ** int(p))


def to_collocation(v: np.ndarray) -> np.ndarray:
    """Values ``sum_j v_j exp(i j x_k)`` at ``x_k = pi k / K``, storage order in k."""
    n = 2 * _half_size(v)
    return np.fft.ifft(v) * n


def from_collocation(u: np.ndarray) -> np.ndarray:
    """Inverse of :func:`to_collocation`."""
    n = 2 * _half_size(u)
    return np.fft.fft(u) / n


def sobolev_norm(v: np.ndarray, s: float, fs: FrequencySet) -> float:
    """``(sum_j w_j^(2s) |v_j|^2)^(1/2)`` with the weights of ``fs``."""
    if v.shape[-1] != fs.omegas.shape[0]:
        raise SizeError(f"vector has {v.shape[-1]} modes, frequency set has {fs.omegas.shape[0]}")
    w = fs.weights ** (2.0 * s)
    return float(np.sqrt(np.sum(w * (v.real**2 + v.imag**2))))


def pair_norm(st: FourierState, sigma: float, fs: FrequencySet) -> float:
    """Norm on ``H^(sigma+1) x H^sigma``."""
    return float(np.hypot(sobolev_norm(st.y, sigma + 1.0, fs), sobolev_norm(st.ydot, sigma, fs)))
