"""Exact solution of the quadratic-cone relaxation QP_e(alpha).

    minimize <c, x>  s.t.  A x = b,  x in K_e(alpha),
    K_e(alpha) = {x : <e, x>_e >= alpha ||x||_e},   <u, v>_e = u^T H(e) v.

The optimum lies on the cone boundary.  Stationarity plus feasibility,

    A x = b,   lam c - A^T y + <g, x> g - alpha^2 H x = 0,

is an (n+m) x (n+m+1) linear system in (x, y, lam) whose solutions form a
line.  Substituting that line into the boundary equation
<g, x>^2 - alpha^2 x^T H x = 0 leaves a quadratic in one parameter; of its
two roots, those on the wrong nappe (<e, x>_e < 0) are discarded and the
one with the smaller objective is returned.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import AssumptionError, InputError, NumericalFailure
from .univariate import min_eigenvalue


def row_space_residual(A, c):
    """||(I - A^T (A A^T)^{-1} A) c|| / ||c||."""
    coef, *_ = np.linalg.lstsq(A.T, c, rcond=None)
    nc = np.linalg.norm(c)
    return float(np.linalg.norm(c - A.T @ coef) / nc) if nc > 0.0 else 0.0


def numerical_rank(A, rtol=1e-10):
    if A.size == 0:
        return 0
    _, R, _ = scipy.linalg.qr(A.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    return int(np.sum(diag > rtol * max(diag[0], 1e-300))) if diag.size else 0


@dataclass(frozen=True, eq=False)
class QpProblem:
    """Data of QP_e(alpha) at the current center e."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    e: np.ndarray
    g: np.ndarray
    H: np.ndarray
    alpha: float
    degree: int
    residual_tol: float = 1e-8

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        object.__setattr__(self, "A", A)
        for name in ("b", "c", "e", "g"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(-1))
        object.__setattr__(self, "H", np.asarray(self.H, dtype=float))
        m, n = A.shape
        if self.b.size != m or self.c.size != n or self.e.size != n or self.g.size != n:
            raise InputError("QP data has inconsistent dimensions")
        if self.H.shape != (n, n):
            raise InputError(f"H must be {n} x {n}")
        if not 0.0 < self.alpha < 1.0:
            raise InputError("alpha must lie in (0, 1)")
        if not np.any(self.b):
            raise AssumptionError("b = 0 is excluded")
        if numerical_rank(A) < m:
            raise AssumptionError("A does not have full row rank")
        if row_space_residual(A, self.c) <= 1e-10:
            raise AssumptionError("c lies in the row space of A; the objective is constant on the feasible set")
        if np.linalg.norm(A @ self.e - self.b) > self.residual_tol * (1.0 + np.linalg.norm(self.b)):
            raise AssumptionError("the center e does not satisfy A e = b")

    def local_inner(self, u, v):
        return float(u @ self.H @ v)


@dataclass(frozen=True, eq=False)
class QpSolution:
    x_e: np.ndarray
    y: np.ndarray
    lambda_kkt: float
    lambda_mult: float
    y_dual: np.ndarray
    s_dual: np.ndarray
    gap: float
    candidates: int

    def to_dict(self):
        return {
            "x_e": self.x_e.tolist(),
            "y": self.y.tolist(),
            "lambda_kkt": self.lambda_kkt,
            "lambda_mult": self.lambda_mult,
            "y_dual": self.y_dual.tolist(),
            "s_dual": self.s_dual.tolist(),
            "gap": self.gap,
        }


def _kkt_line(A, c, g, H, alpha):
    """Particular solution and null direction of the stationarity system."""
    m, n = A.shape
    K = np.zeros((n + m, n + m + 1))
    K[:m, :n] = A
    K[m:, :n] = np.outer(g, g) - alpha**2 * H
    K[m:, n : n + m] = -A.T
    K[m:, n + m] = c
    return K


def _solve_line(K, rhs):
    # pivoted QR of K^T: the last column of Q spans null(K), the leading
    # columns give the minimum-norm particular solution
    Q, R, piv = scipy.linalg.qr(K.T, pivoting=True)
    diag = np.abs(np.diag(R))
    rows = K.shape[0]
    if diag[rows - 1] <= 1e-13 * diag[0]:
        raise AssumptionError(
            "the stationarity system is rank deficient (is A full row rank and c outside its row space?)"
        )
    Rt = R[:rows, :rows].T
    z = scipy.linalg.solve_triangular(Rt, rhs[piv], lower=True)
    particular = Q[:, :rows] @ z
    null = Q[:, rows]
    return particular, null


def solve_qp(q):
    """Solve QP_e(alpha) exactly; see the module docstring for the procedure."""
    A, b, c, e, g, H, alpha = q.A, q.b, q.c, q.e, q.g, q.H, q.alpha
    m, n = A.shape
    # Jacobi scaling x = S z keeps the system well conditioned when H is large
    s = 1.0 / np.sqrt(np.clip(np.diag(H), 1e-300, None))
    As, cs, gs = A * s[None, :], c * s, g * s
    Hs = H * np.outer(s, s)
    # equilibrate the objective column and the A rows
    c_scale = np.linalg.norm(cs)
    row_scale = np.linalg.norm(As, axis=1)
    As_eq = As / row_scale[:, None]
    b_eq = b / row_scale
    K = _kkt_line(As_eq, cs / c_scale, gs, Hs, alpha)
    rhs = np.concatenate([b_eq, np.zeros(n)])
    particular, null = _solve_line(K, rhs)

    # near optimality c is almost in the row space and the line runs mostly
    # along (y, lam); measure the parameter in units of x so the boundary
    # quadratic is not mistaken for a linear one
    xn = np.linalg.norm(null[:n])
    if xn == 0.0:
        raise NumericalFailure("the line of stationary points does not move x")
    null = null / xn
    zp, zn = particular[:n], null[:n]
    Qform = np.outer(gs, gs) - alpha**2 * Hs
    qa = zn @ Qform @ zn
    qb = 2.0 * (zp @ Qform @ zn)
    qc = zp @ Qform @ zp
    taus = _quadratic_roots(qa, qb, qc)
    if not taus:
        raise NumericalFailure(
            "the line of stationary points misses the cone boundary, so the relaxation "
            "is unbounded below: the center is not in the swath "
            f"(boundary quadratic {qa:.3e} t^2 + {qb:.3e} t + {qc:.3e})"
        )

    best = None
    for tau in taus:
        sol = particular + tau * null
        x = s * sol[:n]
        side = -(g @ x)  # <e, x>_e = -<g, x> since H(e) e = -g(e)
        if side <= 0.0:
            continue
        obj = c @ x
        key = (obj, -side)
        if best is None or key < best[0]:
            best = (key, x, sol)
    if best is None:
        raise NumericalFailure(
            "both boundary candidates lie on the wrong nappe <e, x>_e <= 0; "
            f"roots {taus}, residual diagnostics: |A e - b| = {np.linalg.norm(A @ e - b):.3e}"
        )
    _, x, sol = best
    y = sol[n : n + m] / row_scale
    lam = sol[n + m] / c_scale
    y_dual, s_dual, lam_mult = _dual(q, x, y, lam)
    gap = float(c @ (e - x))
    return QpSolution(x, y, float(lam), lam_mult, y_dual, s_dual, gap, len(taus))


def _quadratic_roots(a, b, c):
    scale = max(abs(a), abs(b), abs(c))
    if scale == 0.0:
        return []
    a, b, c = a / scale, b / scale, c / scale
    if abs(a) <= 1e-14:
        return [-c / b] if b != 0.0 else []
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        if disc > -1e-12 * (b * b + abs(4.0 * a * c)):
            disc = 0.0
        else:
            return []
    sq = np.sqrt(disc)
    if sq == 0.0:
        return [-b / (2.0 * a)]
    qv = -0.5 * (b + np.copysign(sq, b))
    return sorted({qv / a, c / qv})


def _dual(q, x, y, lam):
    y_dual, s_dual, lam_mult = dual_from_primal(q, x)
    # y / lam from the KKT solve is the same vector in exact arithmetic; keep
    # whichever fits A^T y + s = c and <b, y> = <c, x> better (y and lam both
    # blow up near optimality, so their ratio can lose digits)
    if lam != 0.0:
        alt = y / lam

        def misfit(yd):
            return np.linalg.norm(q.A.T @ yd + s_dual - q.c) + abs(q.b @ yd - q.c @ x)

        if misfit(alt) < misfit(y_dual):
            y_dual = alt
    return y_dual, s_dual, lam_mult


def dual_from_primal(q, x_e):
    """(y_dual, s_dual, lambda_mult) for an accepted primal optimizer x_e.

    lambda_mult = (d - alpha^2) <g, x_e> / <c, e - x_e>,
    s_dual = <c, e - x_e>/(d - alpha^2) * H (e - alpha^2 x_e / <e, x_e>_e),
    and y_dual solves A^T y_dual = c - s_dual.
    """
    A, c, e, g, H, alpha, d = q.A, q.c, q.e, q.g, q.H, q.alpha, q.degree
    gap = c @ (e - x_e)
    ex = q.local_inner(e, x_e)
    if abs(ex) <= 1e-14 * np.sqrt(abs(q.local_inner(e, e) * q.local_inner(x_e, x_e))):
        raise NumericalFailure("<e, x_e>_e vanishes; the dual formulas are undefined")
    lam = (d - alpha**2) * (g @ x_e) / gap
    s_dual = gap / (d - alpha**2) * (H @ (e - alpha**2 / ex * x_e))
    y_dual, *_ = np.linalg.lstsq(A.T, c - s_dual, rcond=None)
    return y_dual, s_dual, float(lam)


def solution_residuals(q, sol):
    """Residuals of every QpSolution invariant (all should be ~0)."""
    A, b, c, e, g, H, alpha = q.A, q.b, q.c, q.e, q.g, q.H, q.alpha
    x = sol.x_e
    gx = g @ x
    xHx = x @ H @ x
    scale_obj = 1.0 + abs(c @ x) + abs(c @ e)
    return {
        "primal_feasibility": float(np.linalg.norm(A @ x - b) / (1.0 + np.linalg.norm(b))),
        "boundary": float(abs(gx**2 - alpha**2 * xHx) / max(gx**2, alpha**2 * xHx, 1e-300)),
        "cone_side": float(-gx),
        "complementarity": float(abs(x @ sol.s_dual) / scale_obj),
        "strong_duality": float(abs(b @ sol.y_dual - c @ x) / scale_obj),
        "gap_identity": float(abs(sol.gap - (c @ e - b @ sol.y_dual)) / scale_obj),
        "dual_feasibility": float(np.linalg.norm(A.T @ sol.y_dual + sol.s_dual - c) / (1.0 + np.linalg.norm(c))),
    }


@dataclass
class ConeReport:
    margin: float
    in_quadratic_cone: bool
    min_eigenvalue: float
    in_hyperbolic_cone: bool

    def to_dict(self):
        return dict(self.__dict__)


def cone_check(q, x, p=None, alpha=None):
    """Membership of x in K_e(alpha) (and in the hyperbolicity cone when p is given).

    ``margin`` is <e, x>_e - alpha ||x||_e.
    """
    alpha = q.alpha if alpha is None else alpha
    x = np.asarray(x, dtype=float)
    ex = q.local_inner(q.e, x)
    margin = ex - alpha * np.sqrt(max(q.local_inner(x, x), 0.0))
    lam = float("nan")
    inside = False
    if p is not None:
        lam = min_eigenvalue(p, x, p.direction)
        inside = lam >= 0.0
    return ConeReport(float(margin), bool(margin >= 0.0), lam, inside)


def quad_cone_margin(H, e, x, alpha):
    ex = e @ H @ x
    return float(ex - alpha * np.sqrt(max(x @ H @ x, 0.0)))
