"""Trajectories, reference solutions, error curves and filter-bound checks."""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .integrators import ErknScheme, ErknStepper, NonFiniteStateError, get_scheme, phi
from .problem import SemidiscreteProblem, SeededRandom, make_initial_state, make_problem
from .spectral import FourierState, nonlinearity, pair_norm, sobolev_norm

log = logging.getLogger(__name__)

REFERENCE_SCHEME = "ERKN3"
DEFAULT_XI_GRID = (1e-6, 1e3, 10_000)
BBAR_SIZE, BBAR_DEFECT, B_DEFECT = "bbar_size", "bbar_defect", "b_defect"


class BlowUpError(NonFiniteStateError):
    """The trajectory produced NaN or Inf."""


Monitor = Callable[[int, float], None]


class RegularityMonitor:
    """Tracks ``pair_norm(sigma=0)`` along a trajectory."""

    def __init__(self, initial_norm: float):
        self.initial = initial_norm
        self.largest = initial_norm

    def __call__(self, step: int, norm: float) -> None:
        if norm > self.largest:
            self.largest = norm

    @property
    def ratio(self) -> float:
        return self.largest / self.initial if self.initial > 0 else (0.0 if self.largest == 0 else math.inf)


def _forcing(prob: SemidiscreteProblem):
    p = prob.power
    return None if p is None else (lambda v: nonlinearity(v, p))


def _steps_for(T: float, h: float) -> int:
    n = T / h
    m = round(n)
    if m < 0 or abs(n - m) > 1e-9 * max(1.0, abs(n)):
        raise ValueError(f"T={T} is not an integer multiple of h={h} (T/h={n})")
    return int(m)


def integrate(
    scheme: ErknScheme,
    prob: SemidiscreteProblem,
    st0: FourierState,
    h: float,
    n_steps: int,
    monitor: Monitor | None = None,
    snapshot_every: int | None = None,
) -> FourierState | tuple[FourierState, list[FourierState]]:
    """Apply ``n_steps`` ERKN steps of size ``h``.

    ``monitor(n, pair_norm_sigma0)`` is called after every step.  With
    ``snapshot_every=m`` the states at steps ``0, m, 2m, ...`` are returned too.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    if st0.K != prob.K:
        raise ValueError(f"state has K={st0.K}, problem has K={prob.K}")
    snaps = [st0] if snapshot_every else None
    if n_steps == 0:
        return (st0, snaps) if snaps is not None else st0
    stepper = ErknStepper(scheme, prob.fs.omegas, h, _forcing(prob))
    y, ydot = st0.y, st0.ydot
    check_every = 1 if monitor is not None else 16
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, n_steps + 1):
            y, ydot = stepper(y, ydot)
            if n % check_every == 0 or n == n_steps:
                if not (np.all(np.isfinite(y)) and np.all(np.isfinite(ydot))):
                    raise BlowUpError(_first_bad_step(stepper, st0, n), "trajectory blew up")
            if monitor is not None:
                monitor(n, float(np.hypot(sobolev_norm(y, 1.0, prob.fs), sobolev_norm(ydot, 0.0, prob.fs))))
            if snaps is not None and n % snapshot_every == 0:
                snaps.append(FourierState(y, ydot))
    final = FourierState(y, ydot)
    return (final, snaps) if snaps is not None else final


def _first_bad_step(stepper: ErknStepper, st0: FourierState, last: int) -> int:
    y, ydot = st0.y, st0.ydot
    with np.errstate(all="ignore"):
        for n in range(1, last + 1):
            y, ydot = stepper(y, ydot)
            if not (np.all(np.isfinite(y)) and np.all(np.isfinite(ydot))):
                return n
    return last


def reference_steps(T: float, h_ref_exponent: int = 13) -> int:
    """Step count of the reference run: ``h_ref = 2**-e`` for ``T = 10``, scaled with ``T``."""
    return max(1, int(round(T / 10.0 * 10 * 2**h_ref_exponent)))


def reference_solution(
    prob: SemidiscreteProblem,
    st0: FourierState,
    T: float,
    h_ref_exponent: int = 13,
    snapshot_every: int | None = None,
):
    """High-accuracy solution at time ``T`` by ERKN3 with a very small step."""
    if T < 0:
        raise ValueError("T must be nonnegative")
    if T == 0:
        return (st0, [st0]) if snapshot_every else st0
    n = reference_steps(T, h_ref_exponent)
    return integrate(get_scheme(REFERENCE_SCHEME), prob, st0, T / n, n, snapshot_every=snapshot_every)


def reference_self_consistency(prob, st0, T, h_ref_exponent: int = 13) -> float:
    """``pair_norm(sigma=0)`` of the change when the reference step is halved."""
    a = reference_solution(prob, st0, T, h_ref_exponent)
    b = reference_solution(prob, st0, T, h_ref_exponent + 1)
    return pair_norm(a - b, 0.0, prob.fs)


def error_norms(diff: FourierState, prob: SemidiscreteProblem, alpha: float, s: float) -> tuple[float, float]:
    return (
        sobolev_norm(diff.y, s + 1.0 - alpha, prob.fs),
        sobolev_norm(diff.ydot, s - alpha, prob.fs),
    )


def error_at(
    scheme: ErknScheme,
    prob: SemidiscreteProblem,
    st0: FourierState,
    h: float,
    T: float,
    alpha: float,
    s: float = 0.0,
    reference: FourierState | None = None,
    h_ref_exponent: int = 13,
) -> tuple[float, float]:
    """Errors in ``H^(s+1-alpha)`` (position) and ``H^(s-alpha)`` (velocity) at ``T``."""
    n = _steps_for(T, h)
    if reference is None:
        reference = reference_solution(prob, st0, T, h_ref_exponent)
    approx = integrate(scheme, prob, st0, h, n)
    return error_norms(reference - approx, prob, alpha, s)


def fit_order(hs: Sequence[float], errs: Sequence[float]) -> float:
    """Least-squares slope of ``log2(err)`` against ``log2(h)``."""
    hs = np.asarray(hs, dtype=float)
    errs = np.asarray(errs, dtype=float)
    if hs.size < 2:
        return math.nan
    return float(np.polyfit(np.log2(hs), np.log2(errs), 1)[0])


def fit_window(errs, scale: float, floor: float, min_points: int = 4) -> np.ndarray:
    """Mask of samples inside the asymptotic window.

    Drops non-finite errors, preasymptotic ones (above 10% of ``scale``) and
    those within a factor 100 of the reference ``floor``.  Returns an
    all-False mask when fewer than ``min_points`` remain.
    """
    e = np.asarray(errs, dtype=float)
    mask = np.isfinite(e) & (e > 0) & (e <= 0.1 * scale) & (e >= 100.0 * floor)
    if mask.sum() < min_points:
        return np.zeros_like(mask)
    return mask


class ErrorSample(NamedTuple):
    h: float
    n_steps: int
    err_y: float
    err_ydot: float
    norm_ratio: float


@dataclass
class ErrorCurve:
    scheme: str
    alpha: float
    samples: list[ErrorSample]
    fitted_order_y: float = math.nan
    fitted_order_ydot: float = math.nan
    window_y: list[float] = field(default_factory=list)
    window_ydot: list[float] = field(default_factory=list)

    def errors(self, which: str = "y") -> np.ndarray:
        col = 2 if which == "y" else 3
        return np.array([smp[col] for smp in self.samples])

    @property
    def hs(self) -> np.ndarray:
        return np.array([smp.h for smp in self.samples])

    @property
    def max_norm_ratio(self) -> float:
        finite = [smp.norm_ratio for smp in self.samples if math.isfinite(smp.norm_ratio)]
        return max(finite, default=math.nan)


def _fit_curve(curve: ErrorCurve, scale_y, scale_ydot, floor_y, floor_ydot) -> None:
    hs = curve.hs
    for which, scale, floor in (("y", scale_y, floor_y), ("ydot", scale_ydot, floor_ydot)):
        errs = curve.errors(which)
        mask = fit_window(errs, scale, floor)
        order = fit_order(hs[mask], errs[mask]) if mask.any() else math.nan
        setattr(curve, f"fitted_order_{which}", order)
        setattr(curve, f"window_{which}", [float(h) for h in hs[mask]])


@dataclass
class _Cell:
    scheme: str
    h: float
    n_steps: int
    final: FourierState | None
    norm_ratio: float
    max_diffs: dict | None = None
    failure: str | None = None


def _run_cell(args) -> _Cell:
    scheme_id, prob, st0, h, T, ref_snaps, ref_stride, alphas, s = args
    scheme = get_scheme(scheme_id)
    n = _steps_for(T, h)
    mon = RegularityMonitor(pair_norm(st0, 0.0, prob.fs))
    try:
        if ref_snaps is None:
            final = integrate(scheme, prob, st0, h, n, monitor=mon)
            return _Cell(scheme_id, h, n, final, mon.ratio)
        # max-over-steps errors: compare against reference snapshots at every t_n
        final, snaps = integrate(scheme, prob, st0, h, n, monitor=mon, snapshot_every=1)
        stride = int(round(h / ref_stride))
        worst = {a: [0.0, 0.0] for a in alphas}
        for k, st in enumerate(snaps):
            diff = ref_snaps[k * stride] - st
            for a in alphas:
                ey, ed = error_norms(diff, prob, a, s)
                worst[a][0] = max(worst[a][0], ey)
                worst[a][1] = max(worst[a][1], ed)
        return _Cell(scheme_id, h, n, final, mon.ratio, max_diffs=worst)
    except NonFiniteStateError as exc:
        log.warning("cell %s h=%g failed: %s", scheme_id, h, exc)
        return _Cell(scheme_id, h, n, None, math.inf, failure=str(exc))


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("ERKN_WAVE_THREADS", "1") or 1)
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


@dataclass
class StudyResult:
    curves: list[ErrorCurve]
    reference_floor: float
    initial_state: FourierState
    failures: dict[tuple[str, float], str]


def run_study(config, threads: int | None = None) -> StudyResult:
    """Full convergence study for an :class:`~erkn_wave.config.ExperimentConfig`."""
    config.validate()
    prob = make_problem(config.discretization, config.K, config.p)
    st0 = make_initial_state(
        prob, SeededRandom(config.seed, config.decay_y, config.decay_ydot, config.amplitude)
    )
    T = config.t_end
    hs = sorted((2.0**-j for j in config.h_exponents), reverse=True)
    for h in hs:
        _steps_for(T, h)

    max_mode = config.error_mode == "max"
    h_min = hs[-1]
    n_ref = reference_steps(T, config.h_ref_exponent)
    stride = int(round(h_min / (T / n_ref)))
    if max_mode and abs(h_min / (T / n_ref) - stride) > 1e-9:
        raise ValueError("max-over-steps errors need the reference step to divide every study step")
    ref_out = reference_solution(prob, st0, T, config.h_ref_exponent, snapshot_every=stride if max_mode else None)
    ref, ref_snaps = ref_out if max_mode else (ref_out, None)
    ref_half = reference_solution(prob, st0, T, config.h_ref_exponent + 1)
    ref_diff = ref - ref_half
    floor = pair_norm(ref_diff, 0.0, prob.fs)

    jobs = [
        (sid, prob, st0, h, T, ref_snaps, h_min if max_mode else None, list(config.alphas), config.s)
        for sid in config.schemes
        for h in hs
    ]
    nthreads = resolve_threads(threads)
    if nthreads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=nthreads) as pool:
            cells = list(pool.map(_run_cell, jobs))
    else:
        cells = [_run_cell(job) for job in jobs]
    by_key = {(c.scheme, c.h): c for c in cells}

    curves = []
    failures = {}
    for sid in config.schemes:
        for alpha in config.alphas:
            samples = []
            for h in hs:
                cell = by_key[(sid, h)]
                if cell.final is None:
                    failures[(sid, h)] = cell.failure
                    samples.append(ErrorSample(h, cell.n_steps, math.inf, math.inf, math.inf))
                    continue
                if cell.max_diffs is not None:
                    ey, ed = cell.max_diffs[alpha]
                else:
                    ey, ed = error_norms(ref - cell.final, prob, alpha, config.s)
                samples.append(ErrorSample(h, cell.n_steps, ey, ed, cell.norm_ratio))
            curve = ErrorCurve(sid, alpha, samples)
            fy, fd = error_norms(ref_diff, prob, alpha, config.s)
            sy = sobolev_norm(st0.y, config.s + 1.0 - alpha, prob.fs)
            sd = sobolev_norm(st0.ydot, config.s - alpha, prob.fs)
            _fit_curve(curve, sy, sd, fy, fd)
            curves.append(curve)
    return StudyResult(curves, floor, st0, failures)


def convergence_study(config, threads: int | None = None) -> list[ErrorCurve]:
    """One :class:`ErrorCurve` per ``(scheme, alpha)`` of ``config``."""
    return run_study(config, threads).curves


@dataclass(frozen=True)
class FilterBoundReport:
    scheme: str
    beta: float
    equation: str
    measured_c: float
    grid_min: float
    grid_max: float
    grid_points: int

    @property
    def finite(self) -> bool:
        return math.isfinite(self.measured_c)


def default_xi_grid() -> np.ndarray:
    lo, hi, n = DEFAULT_XI_GRID
    return np.logspace(math.log10(lo), math.log10(hi), n)


def filter_ratios(scheme: ErknScheme, beta: float, xi: np.ndarray) -> dict[str, np.ndarray]:
    """Ratios whose suprema are the constants of the filter-function bounds.

    Keys: ``bbar_size`` is ``|bbar| / xi^beta`` (only for ``beta <= 0``),
    ``bbar_defect`` is ``|sinc(xi/2)^2/2 - bbar| / xi^beta`` (only for
    ``beta > 0``), ``b_defect`` is ``|1 - b| / xi^(1+beta)``.
    """
    bbar, b = scheme.coefficients(xi)
    out = {}
    with np.errstate(all="ignore"):
        if beta <= 0:
            out[BBAR_SIZE] = np.abs(bbar) / xi**beta
        else:
            out[BBAR_DEFECT] = np.abs(0.5 * phi(1, 0.5 * xi) ** 2 - bbar) / xi**beta
        out[B_DEFECT] = np.abs(1.0 - b) / xi ** (1.0 + beta)
    return out


def check_filter_bounds(scheme: ErknScheme, betas: Sequence[float], xi_grid=None) -> list[FilterBoundReport]:
    xi = default_xi_grid() if xi_grid is None else np.asarray(xi_grid, dtype=float)
    if np.any(xi <= 0):
        raise ValueError("xi grid must be positive")
    reports = []
    for beta in betas:
        if not -1.0 <= beta <= 1.0:
            raise ValueError(f"beta={beta} outside [-1, 1]")
        for eq, ratio in filter_ratios(scheme, beta, xi).items():
            c = float(np.max(ratio)) if np.all(np.isfinite(ratio)) else math.inf
            reports.append(FilterBoundReport(scheme.id, float(beta), eq, c, float(xi.min()), float(xi.max()), int(xi.size)))
    return reports
