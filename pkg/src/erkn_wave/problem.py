"""Semidiscrete wave problems and their initial data."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import FourierState, FrequencySet, SizeError, WeightRule, mode_indices

PRNG_NAME = "numpy.random.PCG64"


@dataclass(frozen=True)
class SemidiscreteProblem:
    """``y'' = -Omega^2 y + f(y)`` with ``f`` the p-fold discrete convolution.

    ``linear=True`` switches the nonlinearity off (used for exactness checks).
    """

    fs: FrequencySet
    p: int
    real_field: bool = True
    linear: bool = False

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 2:
            raise ValueError(f"nonlinearity power must be an integer >= 2, got {self.p}")

    @property
    def K(self) -> int:
        return self.fs.K

    @property
    def power(self) -> int | None:
        """Power handed to the stepper; ``None`` for the linear problem."""
        return None if self.linear else self.p

    @property
    def discretization(self) -> str:
        return self.fs.weight_rule.value


def _check_K(K: int) -> None:
    if int(K) != K or K < 1:
        raise ValueError(f"K must be a positive integer, got {K}")


def spectral_frequencies(K: int) -> FrequencySet:
    _check_K(K)
    return FrequencySet(np.abs(mode_indices(K)).astype(float), WeightRule.SPECTRAL_ANGLE)


def fd_frequencies(K: int) -> FrequencySet:
    """Frequencies of the second-order central difference on ``dx = pi/K``."""
    _check_K(K)
    dx = np.pi / K
    j = np.abs(mode_indices(K)).astype(float)
    om = (2.0 / dx) * np.abs(np.sin(j * dx / 2.0))
    # (2/pi)|j| <= omega_j <= |j| holds exactly; clamp away last-ulp rounding (omega_{-K} = 2K/pi)
    om = np.clip(om, 2.0 / np.pi * j, j)
    return FrequencySet(om, WeightRule.FINITE_DIFFERENCE)


def make_spectral_problem(K: int, p: int, linear: bool = False) -> SemidiscreteProblem:
    return SemidiscreteProblem(spectral_frequencies(K), p, linear=linear)


def make_fd_problem(K: int, p: int, linear: bool = False) -> SemidiscreteProblem:
    return SemidiscreteProblem(fd_frequencies(K), p, linear=linear)


def make_problem(discretization: str, K: int, p: int, linear: bool = False) -> SemidiscreteProblem:
    if discretization == "spectral":
        return make_spectral_problem(K, p, linear)
    if discretization == "finite_difference":
        return make_fd_problem(K, p, linear)
    raise ValueError(f"unknown discretization {discretization!r}")


@dataclass(frozen=True)
class SeededRandom:
    """Unit-modulus random coefficients scaled by ``<j>^-decay``.

    Draw order from ``numpy.random.default_rng(seed)``: phases of ``y_1..y_{K-1}``,
    phases of ``ydot_1..ydot_{K-1}`` (uniform on ``[0, 2pi)``), then the signs of
    ``y_0, y_{-K}, ydot_0, ydot_{-K}``.  Negative modes are the conjugates of
    the positive ones.  ``amplitude`` multiplies both vectors at the end.
    """

    seed: int
    decay_y: float = 1.51
    decay_ydot: float = 0.51
    amplitude: float = 1.0


@dataclass(frozen=True)
class ExplicitFourier:
    """Initial coefficients given directly, in storage order."""

    y0: np.ndarray
    ydot0: np.ndarray


InitialDataSpec = SeededRandom | ExplicitFourier


def _hermitian_fill(K: int, phases: np.ndarray, signs: np.ndarray) -> np.ndarray:
    v = np.zeros(2 * K, dtype=complex)
    if K > 1:
        pos = np.exp(1j * phases)
        v[1:K] = pos
        v[2 * K - 1 : K : -1] = np.conj(pos)
    v[0] = signs[0]
    v[K] = signs[1]
    return v


def make_initial_state(prob: SemidiscreteProblem, spec: InitialDataSpec) -> FourierState:
    K = prob.K
    if isinstance(spec, ExplicitFourier):
        st = FourierState(spec.y0, spec.ydot0)
        if st.K != K:
            raise SizeError(f"initial data has K={st.K}, problem has K={K}")
        return st
    if not isinstance(spec, SeededRandom):
        raise TypeError(f"unsupported initial data spec {type(spec).__name__}")
    rng = np.random.default_rng(spec.seed)
    phase_y = rng.uniform(0.0, 2.0 * np.pi, size=K - 1)
    phase_yd = rng.uniform(0.0, 2.0 * np.pi, size=K - 1)
    signs = rng.choice(np.array([-1.0, 1.0]), size=4)
    bracket = np.maximum(1.0, np.abs(mode_indices(K)).astype(float))
    y = _hermitian_fill(K, phase_y, signs[:2]) * bracket ** (-spec.decay_y)
    ydot = _hermitian_fill(K, phase_yd, signs[2:]) * bracket ** (-spec.decay_ydot)
    return FourierState(spec.amplitude * y, spec.amplitude * ydot)
