"""Primal affine-scaling method for hyperbolic programs.

Each iteration at a center e (strictly feasible, interior):

1. g = grad(-ln p)(e), H = hess(-ln p)(e);
2. x_e = argmin <c, x> over {A x = b} intersected with K_e(alpha);
3. gap = <c, e - x_e>; stop when gap < delta;
4. power sums s_1..s_4 of the eigenvalues of x_e in direction e give the
   strictly convex quadratic q(t) = a t^2 + b t + c with
       a = s1^2 s2 - 2 alpha^2 s1 s3 + alpha^4 s4,
       b = 2 alpha^4 s3 - 2 s1^3,
       c = (d - alpha^2) s1^2;
5. e <- (e + t x_e) / (1 + t) with t = -b / (2a).

Every two iterations contract the gap by at least 1 - kappa/(kappa + sqrt(d)),
kappa = alpha sqrt((1 - alpha)/8).
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .calculus import derivatives
from .errors import InitializationError, NumericalFailure, StepFailure
from .polynomials import instrument
from .qp import QpProblem, QpSolution, solve_qp
from .univariate import EigenMoments, min_eigenvalue, moments

log = logging.getLogger(__name__)


def kappa(alpha):
    return alpha * math.sqrt((1.0 - alpha) / 8.0)


def contraction_bound(d, alpha):
    """Guaranteed two-step gap ratio 1 - kappa / (kappa + sqrt(d))."""
    k = kappa(alpha)
    return 1.0 - k / (k + math.sqrt(d))


def iteration_bound(d, alpha, gap0, delta, factor=2.0):
    """ceil(factor (kappa + sqrt d)/kappa ln(max(gap0, 1)/delta))."""
    k = kappa(alpha)
    logs = math.log(max(gap0, 1.0) / delta)
    return max(1, math.ceil(factor * (k + math.sqrt(d)) / k * logs))


@dataclass(frozen=True)
class StepQuadratic:
    a: float
    b: float
    c: float

    @property
    def minimizer(self):
        return -self.b / (2.0 * self.a)

    def __call__(self, t):
        return self.a * t * t + self.b * t + self.c


def step_quadratic(m: EigenMoments, d, alpha):
    a2 = alpha * alpha
    a = m.s1 * m.s1 * m.s2 - 2.0 * a2 * m.s1 * m.s3 + a2 * a2 * m.s4
    b = 2.0 * a2 * a2 * m.s3 - 2.0 * m.s1**3
    c = (d - a2) * m.s1 * m.s1
    if not a > 0.0:
        raise StepFailure(f"step quadratic is not strictly convex (a = {a:.6e})")
    return StepQuadratic(float(a), float(b), float(c))


@dataclass
class IterateState:
    e: np.ndarray
    iteration: int = 0
    gap: float = float("nan")
    t_step: float = float("nan")
    qp: Optional[QpSolution] = None
    g: Optional[np.ndarray] = None
    H: Optional[np.ndarray] = None
    min_eig: float = float("nan")


@dataclass
class TraceRow:
    iteration: int
    objective: float
    dual_objective: float
    gap: float
    t_step: float
    min_eigenvalue: float
    oracle_calls: int
    wall_time: float

    def to_dict(self):
        return dict(self.__dict__)


TRACE_FIELDS = tuple(TraceRow.__dataclass_fields__)


@dataclass
class SolveReport:
    e: np.ndarray
    objective: float
    gap: float
    iterations: int
    status: str
    trace: list = field(default_factory=list)
    oracle_calls: int = 0
    gap0: float = float("nan")
    message: str = ""

    def to_dict(self, include_trace=True):
        out = {
            "status": self.status,
            "objective": self.objective,
            "gap": self.gap,
            "iterations": self.iterations,
            "oracle_calls": self.oracle_calls,
            "gap0": self.gap0,
            "e": self.e.tolist(),
            "message": self.message,
        }
        if include_trace:
            out["trace"] = [row.to_dict() for row in self.trace]
        return out


class _Problem:
    """The pieces of a hyperbolic program the iteration needs."""

    def __init__(self, A, b, c, p):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.b = np.asarray(b, dtype=float).reshape(-1)
        self.c = np.asarray(c, dtype=float).reshape(-1)
        self.p = p


def _cone_min_eig(p, x, e, opts):
    """Smallest eigenvalue of x in direction e (the previous center).

    The cone does not depend on the interior direction, and relative to e the
    new center's eigenvalues stay near 1, whereas in a fixed direction they
    cluster at 0 near the optimum, where companion roots lose all accuracy.
    """
    if p.analytic is not None and not opts.oracle_derivatives:
        return float(p.analytic.eigenvalues(x, e)[-1])
    return min_eigenvalue(p, x, e, imag_tol=None)


def analyze(prob, e, opts):
    """g(e), H(e) and the QP solution at e."""
    p = prob.p
    g, H = derivatives(p, e, oracle=opts.oracle_derivatives)
    if opts.debug:
        _assert_barrier_identities(e, g, H, p.degree)
    q = QpProblem(prob.A, prob.b, prob.c, e, g, H, opts.alpha, p.degree, opts.residual_tol)
    return g, H, solve_qp(q)


def _assert_barrier_identities(e, g, H, d, tol=1e-6):
    # residuals are measured against the magnitude of the summed terms; near
    # the boundary |H| ~ 1/lambda_min^2 and the raw sums cancel to ~eps cond^2
    absHe = np.abs(H) @ np.abs(e)
    r1 = np.linalg.norm(H @ e + g) / (np.linalg.norm(absHe) + np.linalg.norm(g))
    r2 = abs(e @ H @ e - d) / (d + np.abs(e) @ absHe)
    if r1 > tol or r2 > tol:
        raise NumericalFailure(
            f"barrier identities violated: H e + g (rel {r1:.2e}), e'He - d (rel {r2:.2e})"
        )


def step(prob, state, opts):
    """One affine-scaling update; returns the state at the new center."""
    p = prob.p
    e = state.e
    if state.qp is None:
        state.g, state.H, state.qp = analyze(prob, e, opts)
        state.gap = state.qp.gap
    x_e = state.qp.x_e
    H = state.H
    d = p.degree
    norm2 = float(x_e @ H @ x_e)
    # the eigenvalues of x_e in direction e satisfy sum lambda_j^2 = ||x_e||_e^2
    m = moments(p, x_e, e, scale=math.sqrt(d * norm2))
    sq = step_quadratic(m, d, opts.alpha)
    t = sq.minimizer
    if not t > 0.0:
        raise StepFailure(f"step length t_e = {t:.6e} is not positive")
    if opts.debug and not t > 0.5 * opts.alpha / math.sqrt(norm2):
        raise StepFailure(f"step length t_e = {t:.6e} is below alpha / (2 ||x_e||_e)")
    e_new = (e + t * x_e) / (1.0 + t)
    lam_min = _cone_min_eig(p, e_new, e, opts)
    if not lam_min > opts.interior_tol:
        raise StepFailure(f"updated center left the cone interior (min eigenvalue {lam_min:.3e})")
    resid = np.linalg.norm(prob.A @ e_new - prob.b)
    if resid > opts.residual_tol * (1.0 + np.linalg.norm(prob.b)):
        raise StepFailure(f"updated center violates A e = b (residual {resid:.3e})")
    new = IterateState(e_new, state.iteration + 1, t_step=t)
    new.g, new.H, new.qp = analyze(prob, e_new, opts)
    new.gap = new.qp.gap
    new.min_eig = lam_min
    return new


def solve(hp, opts=None, p=None):
    """Run the affine-scaling method on a :class:`~hypersolve.problems.HyperbolicProgram`.

    ``p`` overrides the polynomial built from ``hp.poly`` (custom oracles).
    Raises InitializationError for a bad starting point and StepFailure (with
    ``.trace`` and ``.report``) when an update cannot be completed.
    """
    from .problems import validate

    opts = hp.options if opts is None else opts
    base_p = hp.polynomial() if p is None else p
    report = validate(hp, p=base_p)
    failed = [c for c in report if not c["passed"]]
    if failed:
        raise InitializationError(
            "invalid hyperbolic program: " + "; ".join(f"{c['name']}: {c['detail']}" for c in failed)
        )
    counted, counter = instrument(base_p)
    prob = _Problem(hp.A, hp.b, hp.c, counted)
    d = counted.degree

    t0 = time.perf_counter()
    e0 = np.asarray(hp.e0, dtype=float)
    state = IterateState(e0.copy())
    try:
        state.g, state.H, state.qp = analyze(prob, e0, opts)
    except (NumericalFailure, StepFailure) as exc:
        raise InitializationError(f"cannot start from e0: {exc}") from exc
    state.gap = state.qp.gap
    gap0 = state.gap
    max_iters = opts.max_iters
    if max_iters is None:
        max_iters = iteration_bound(d, opts.alpha, gap0, opts.delta, factor=4.0)
    trace = []
    status = "max-iterations"
    message = ""
    # rows count the calls of their own step; the setup at e0 is excluded
    calls_before = counter.calls
    while True:
        if state.gap < opts.delta:
            status = "converged"
            break
        if state.iteration >= max_iters:
            break
        row_start = time.perf_counter()
        objective = float(prob.c @ state.e)
        dual = float(prob.b @ state.qp.y_dual)
        gap = state.gap
        try:
            new = step(prob, state, opts)
        except (StepFailure, NumericalFailure) as exc:
            status = "numerical-failure"
            message = str(exc)
            log.warning("iteration %d failed: %s", state.iteration, exc)
            break
        trace.append(
            TraceRow(
                iteration=state.iteration,
                objective=objective,
                dual_objective=dual,
                gap=gap,
                t_step=float(new.t_step),
                min_eigenvalue=float(new.min_eig),
                oracle_calls=counter.calls - calls_before,
                wall_time=time.perf_counter() - row_start,
            )
        )
        calls_before = counter.calls
        log.debug("iter %d gap %.3e t %.3e", state.iteration, gap, new.t_step)
        state = new

    out = SolveReport(
        e=state.e,
        objective=float(prob.c @ state.e),
        gap=float(state.gap),
        iterations=len(trace),
        status=status,
        trace=trace,
        oracle_calls=counter.calls,
        gap0=float(gap0),
        message=message,
    )
    log.info("%s after %d iterations, gap %.3e (%.3fs)", status, out.iterations, out.gap, time.perf_counter() - t0)
    if status == "numerical-failure":
        err = StepFailure(message, trace)
        err.report = out
        raise err
    return out


@dataclass
class AuditResult:
    passed: bool
    bound: float
    checked: int
    worst_index: int
    worst_ratios: tuple

    def to_dict(self):
        return dict(self.__dict__)


def gap_sequence(report):
    return [row.gap for row in report.trace] + [report.gap]


def contraction_audit(report, d, alpha, tol=1e-9):
    """Check that of every two consecutive gap ratios at least one is <= the bound."""
    gaps = np.asarray(gap_sequence(report), dtype=float)
    ratios = gaps[1:] / gaps[:-1]
    bound = contraction_bound(d, alpha)
    worst = (-1, ())
    worst_val = -np.inf
    checked = 0
    for i in range(len(ratios) - 1):
        pair = (float(ratios[i]), float(ratios[i + 1]))
        checked += 1
        if min(pair) > worst_val:
            worst_val = min(pair)
            worst = (i, pair)
    passed = bool(worst_val <= bound + tol) if checked else True
    return AuditResult(passed, bound, checked, worst[0], worst[1])
