"""Numerical checks of symmetry and symplecticity of a scheme."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .integrators import ErknScheme, ErknStepper
from .problem import SeededRandom, make_initial_state, make_spectral_problem
from .spectral import nonlinearity

SYMMETRIC_TOL = 1e-12
NONSYMMETRIC_MIN = 1e-6
SYMPLECTIC_TOL = 1e-7
NONSYMPLECTIC_MIN = 1e-4


def symmetry_defect(scheme: ErknScheme, h: float = 0.1, K: int = 8, p: int = 2, seed: int = 0) -> float:
    """``max |Phi_{-h}(Phi_h(x)) - x|`` over all coefficients, on seeded data."""
    prob = make_spectral_problem(K, p)
    st = make_initial_state(prob, SeededRandom(seed))
    f = lambda v: nonlinearity(v, p)  # noqa: E731
    forward = ErknStepper(scheme, prob.fs.omegas, h, f)
    backward = ErknStepper(scheme, prob.fs.omegas, -h, f)
    y, ydot = backward(*forward(st.y, st.ydot))
    return float(max(np.max(np.abs(y - st.y)), np.max(np.abs(ydot - st.ydot))))


def _scalar_force(q):
    return q * q


def _two_mode_force(q):
    # gradient of q1^3/3 + q1 q2^2
    return np.array([q[0] ** 2 + q[1] ** 2, 2.0 * q[0] * q[1]])


# name -> (frequencies, force, default evaluation point (q..., p...))
TEST_SYSTEMS = {
    "scalar": (np.array([1.0]), _scalar_force, np.array([0.7, 0.4])),
    "two_mode": (np.array([1.0, 2.0]), _two_mode_force, np.array([0.7, 0.4, 0.4, -0.3])),
}


def oscillator_step(scheme: ErknScheme, h: float, system: str = "scalar"):
    """Step map on phase space ``(q, p)`` of one of :data:`TEST_SYSTEMS`.

    ``scalar`` is ``q'' = -q + q^2``.  ``two_mode`` has frequencies 1 and 2
    coupled through a cubic potential; with distinct frequencies the
    coefficient functions no longer commute with the force Jacobian, which is
    what separates symplectic from merely symmetric schemes.  In one degree
    of freedom ERKN2, ERKN4 and ERKN5 are area preserving.
    """
    omegas, force, _ = TEST_SYSTEMS[system]
    n = omegas.size
    stepper = ErknStepper(scheme, omegas, h, force)

    def step(x: np.ndarray) -> np.ndarray:
        q, v = stepper(x[:n], x[n:])
        return np.concatenate([q, v])

    return step


def step_jacobian(step, x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of ``step`` at ``x``."""
    x = np.asarray(x, dtype=float)
    D = np.empty((x.size, x.size))
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = eps
        D[:, k] = (step(x + e) - step(x - e)) / (2 * eps)
    return D


def _canonical(n: int) -> np.ndarray:
    return np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])


def symplecticity_defect(
    scheme: ErknScheme, h: float = 0.5, system: str = "two_mode", point=None, eps: float = 1e-6
) -> float:
    """``max |D^T J D - J|`` for the step map's Jacobian ``D``."""
    x = TEST_SYSTEMS[system][2] if point is None else np.asarray(point, dtype=float)
    D = step_jacobian(oscillator_step(scheme, h, system), x, eps)
    J = _canonical(x.size // 2)
    return float(np.max(np.abs(D.T @ J @ D - J)))


def _classify(defect: float, yes_below: float, no_above: float) -> bool | None:
    if defect <= yes_below:
        return True
    if defect > no_above:
        return False
    return None


@dataclass(frozen=True)
class PropertyReport:
    scheme: str
    symmetry_defect: float
    symplecticity_defect: float
    measured_symmetric: bool | None
    measured_symplectic: bool | None
    declared_symmetric: bool
    declared_symplectic: bool

    @property
    def symmetric_ok(self) -> bool:
        return self.measured_symmetric is self.declared_symmetric

    @property
    def symplectic_ok(self) -> bool:
        return self.measured_symplectic is self.declared_symplectic

    @property
    def passed(self) -> bool:
        return self.symmetric_ok and self.symplectic_ok


def property_probe(scheme: ErknScheme) -> PropertyReport:
    """Measure both defects and compare the classification with the declared flags.

    A defect between the "yes" and "no" thresholds is inconclusive and never
    matches a declared flag.
    """
    sym = symmetry_defect(scheme)
    spl = symplecticity_defect(scheme)
    return PropertyReport(
        scheme.id,
        sym,
        spl,
        _classify(sym, SYMMETRIC_TOL, NONSYMMETRIC_MIN),
        _classify(spl, SYMPLECTIC_TOL, NONSYMPLECTIC_MIN),
        scheme.declared_symmetric,
        scheme.declared_symplectic,
    )
