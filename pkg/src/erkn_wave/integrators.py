"""One-stage explicit ERKN integrators for ``y'' = -Omega^2 y + f(y)``.

All matrix functions are diagonal, so every coefficient is a scalar function
of ``xi = h * omega_j`` evaluated per mode.  The filter functions
``phi_j(V)`` are written here in terms of ``xi`` with ``V = xi**2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .spectral import FourierState, FrequencySet, nonlinearity

__all__ = [
    "ErknScheme",
    "ErknStepper",
    "NonFiniteStateError",
    "erkn_step",
    "exact_linear_flow",
    "get_scheme",
    "phi",
    "register_scheme",
    "scheme_registry",
]

# below this, the closed forms are replaced by a truncated Taylor series
_SERIES_CUTOFF = 1e-4
_SERIES_TERMS = 6


class NonFiniteStateError(FloatingPointError):
    """A NaN or Inf appeared in the solution."""

    def __init__(self, step: int | None, message: str = "non-finite state"):
        self.step = step
        where = "" if step is None else f" at step {step}"
        super().__init__(f"{message}{where}")


def _sinc_series(xi: np.ndarray) -> np.ndarray:
    v = xi * xi
    out = np.zeros_like(xi)
    term = np.ones_like(xi)
    for k in range(_SERIES_TERMS):
        out += term
        term = -term * v / ((2 * k + 2) * (2 * k + 3))
    return out


def phi(j: int, xi):
    """``phi_j(xi**2)`` for ``j`` in ``{0, 1, 2}``.

    ``phi_0 = cos(xi)``, ``phi_1 = sin(xi)/xi``, ``phi_2 = (1 - cos(xi))/xi**2``,
    each even in ``xi`` and with its limit at ``xi = 0``.  ``phi_2`` is
    evaluated as ``phi_1(xi/2)**2 / 2``, which avoids the cancellation in
    ``1 - cos(xi)``; ``phi_1`` switches to its Taylor series near zero.
    """
    if j not in (0, 1, 2):
        raise ValueError(f"phi_{j} is not supported; j must be 0, 1 or 2")
    scalar = np.ndim(xi) == 0
    x = np.abs(np.asarray(xi, dtype=float))
    if j == 0:
        out = np.cos(x)
    elif j == 2:
        out = 0.5 * phi(1, 0.5 * x) ** 2
    else:
        small = x < _SERIES_CUTOFF
        out = np.empty_like(x)
        xs = x[~small]
        out[~small] = np.sin(xs) / xs
        out[small] = _sinc_series(x[small])
    return float(out) if scalar else out


Coefficient = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ErknScheme:
    """Coefficients of a one-stage explicit ERKN method.

    ``bbar`` and ``b`` map an array of ``xi = h*omega`` values to
    ``bbar_1(xi**2)`` and ``b_1(xi**2)``.
    """

    id: str
    c1: float
    bbar: Coefficient
    b: Coefficient
    declared_symmetric: bool
    declared_symplectic: bool

    def coefficients(self, xi) -> tuple[np.ndarray, np.ndarray]:
        x = np.abs(np.asarray(xi, dtype=float))
        return np.asarray(self.bbar(x), dtype=float), np.asarray(self.b(x), dtype=float)


def _phi_of(j: int, scale: float = 1.0) -> Coefficient:
    return lambda xi: phi(j, scale * xi)


def _product(factor: float, *parts: Coefficient) -> Coefficient:
    def coef(xi):
        out = np.full(np.shape(xi), factor, dtype=float)
        for part in parts:
            out = out * part(xi)
        return out

    return coef


# V/4 corresponds to xi/2
_TABLE1 = (
    ErknScheme("ERKN1", 0.5, _product(1.0, _phi_of(2)), _product(1.0, _phi_of(0, 0.5)), False, False),
    ErknScheme("ERKN2", 0.5, _product(1.0, _phi_of(2)), _product(1.0, _phi_of(1)), True, False),
    ErknScheme("ERKN3", 0.5, _product(0.5, _phi_of(1, 0.5)), _product(1.0, _phi_of(0, 0.5)), True, True),
    ErknScheme(
        "ERKN4", 0.5,
        _product(0.5, _phi_of(1, 0.5), _phi_of(1, 0.5)),
        _product(1.0, _phi_of(1, 0.5), _phi_of(0, 0.5)),
        True, False,
    ),
    ErknScheme(
        "ERKN5", 0.5,
        _product(0.5, _phi_of(1), _phi_of(1, 0.5)),
        _product(1.0, _phi_of(1), _phi_of(0, 0.5)),
        True, False,
    ),
)

_REGISTRY: dict[str, ErknScheme] = {s.id: s for s in _TABLE1}


def scheme_registry() -> list[ErknScheme]:
    """The five tabulated schemes ERKN1 to ERKN5, in order."""
    return list(_TABLE1)


def register_scheme(scheme: ErknScheme) -> None:
    if scheme.id in _REGISTRY and _REGISTRY[scheme.id] is not scheme:
        raise ValueError(f"scheme id {scheme.id!r} already registered")
    _REGISTRY[scheme.id] = scheme


def get_scheme(scheme_id: str) -> ErknScheme:
    try:
        return _REGISTRY[scheme_id]
    except KeyError:
        raise KeyError(f"unknown scheme {scheme_id!r}; known: {', '.join(sorted(_REGISTRY))}") from None


class ErknStepper:
    """One ERKN step with the per-mode coefficients precomputed for a fixed ``h``.

    ``f`` maps a position vector to the forcing vector; ``None`` means the
    linear problem (no forcing).  Negative ``h`` is allowed.
    """

    def __init__(self, scheme: ErknScheme, omegas, h: float, f: Callable[[np.ndarray], np.ndarray] | None):
        if h == 0 or not np.isfinite(h):
            raise ValueError(f"step size must be finite and nonzero, got {h}")
        om = np.asarray(omegas, dtype=float)
        xi = abs(h) * om
        c = scheme.c1
        self.scheme = scheme
        self.h = float(h)
        self.f = f
        self.stage_y = phi(0, c * xi)
        self.stage_ydot = h * c * phi(1, c * xi)
        cos_xi = phi(0, xi)
        sinc_xi = phi(1, xi)
        self.yy = cos_xi
        self.yyd = h * sinc_xi
        self.ydy = -h * om**2 * sinc_xi
        self.ydyd = cos_xi
        bbar, b = scheme.coefficients(xi)
        self.fy = h * h * bbar
        self.fyd = h * b

    def __call__(self, y: np.ndarray, ydot: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        y_new = self.yy * y + self.yyd * ydot
        ydot_new = self.ydy * y + self.ydyd * ydot
        if self.f is not None:
            force = self.f(self.stage_y * y + self.stage_ydot * ydot)
            y_new += self.fy * force
            ydot_new += self.fyd * force
        return y_new, ydot_new


def erkn_step(
    scheme: ErknScheme,
    st: FourierState,
    fs: FrequencySet,
    h: float,
    p: int | None,
    step_index: int | None = None,
) -> FourierState:
    """Advance ``st`` by one step of size ``h``; ``p=None`` drops the nonlinearity."""
    if st.K != fs.K:
        raise ValueError(f"state has K={st.K}, frequency set has K={fs.K}")
    if not st.is_finite():
        raise NonFiniteStateError(step_index, "non-finite input state")
    f = None if p is None else (lambda v: nonlinearity(v, p))
    y, ydot = ErknStepper(scheme, fs.omegas, h, f)(st.y, st.ydot)
    return FourierState(y, ydot)


def exact_linear_flow(st: FourierState, fs: FrequencySet, t: float) -> FourierState:
    """Exact solution of ``y'' = -Omega^2 y`` after time ``t``."""
    if st.K != fs.K:
        raise ValueError(f"state has K={st.K}, frequency set has K={fs.K}")
    om = fs.omegas
    c = np.cos(t * om)
    y = c * st.y + t * phi(1, t * om) * st.ydot
    ydot = -om * np.sin(t * om) * st.y + c * st.ydot
    return FourierState(y, ydot)
