"""Hyperbolic program construction, validation, JSON IO and reference solvers."""

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import CapabilityError, InitializationError, InputError
from .options import SolverOptions
from .polynomials import PolynomialSpec, packed_weights, sym_pack, sym_unpack
from .qp import numerical_rank, row_space_residual

FORMAT_VERSION = 1


@dataclass(eq=False)
class HyperbolicProgram:
    """minimize <c, x> subject to A x = b, x in the hyperbolicity cone of ``poly``."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    poly: PolynomialSpec
    e0: np.ndarray
    options: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        self.e0 = np.asarray(self.e0, dtype=float).reshape(-1)
        self._p = None

    def polynomial(self):
        if self._p is None:
            self._p = self.poly.build()
        return self._p

    @property
    def shape(self):
        return self.A.shape

    def to_dict(self):
        return {
            "format": FORMAT_VERSION,
            "A": self.A.tolist(),
            "b": self.b.tolist(),
            "c": self.c.tolist(),
            "poly": self.poly.to_dict(),
            "e0": self.e0.tolist(),
            "options": self.options.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise InputError("problem: top level must be a JSON object")
        fmt = data.get("format")
        if fmt != FORMAT_VERSION:
            raise InputError(f"format: expected {FORMAT_VERSION}, got {fmt!r}")
        missing = [k for k in ("A", "b", "c", "poly", "e0") if k not in data]
        if missing:
            raise InputError(f"problem: missing field(s) {missing}")
        arrays = {}
        for key in ("A", "b", "c", "e0"):
            try:
                arrays[key] = np.asarray(data[key], dtype=float)
            except (TypeError, ValueError):
                raise InputError(f"{key}: expected a numeric array") from None
        if arrays["A"].ndim != 2:
            raise InputError("A: expected a nested (m x n) array")
        for key in ("b", "c", "e0"):
            if arrays[key].ndim != 1:
                raise InputError(f"{key}: expected a flat array")
        m, n = arrays["A"].shape
        if arrays["b"].size != m:
            raise InputError(f"b: length {arrays['b'].size} does not match A's {m} rows")
        for key in ("c", "e0"):
            if arrays[key].size != n:
                raise InputError(f"{key}: length {arrays[key].size} does not match A's {n} columns")
        poly = PolynomialSpec.from_dict(data["poly"])
        options = SolverOptions.from_dict(data.get("options", {}))
        return cls(arrays["A"], arrays["b"], arrays["c"], poly, arrays["e0"], options)


# ---------------------------------------------------------------------------
# validation


def _check(name, passed, detail=""):
    return {"name": name, "passed": bool(passed), "detail": detail}


def validate(hp, p=None):
    """Check every program invariant; returns one record per check."""
    from .univariate import min_eigenvalue

    A, b, c, e0 = hp.A, hp.b, hp.c, hp.e0
    m, n = A.shape
    tol = hp.options.residual_tol
    out = []
    try:
        p = hp.polynomial() if p is None else p
    except InputError as exc:
        return [_check("polynomial", False, str(exc))]
    out.append(_check("dimensions", p.dimension == n and c.size == n and e0.size == n and b.size == m,
                      f"poly has {p.dimension} variables, A is {m} x {n}"))
    if not out[-1]["passed"]:
        return out
    rank = numerical_rank(A)
    out.append(_check("full_row_rank", rank == m, f"rank {rank} of {m} rows"))
    out.append(_check("b_nonzero", bool(np.any(b)), "b must not be the zero vector"))
    resid = row_space_residual(A, c)
    out.append(_check("c_not_in_row_space", resid > 1e-10, f"relative distance of c to row space {resid:.3e}"))
    feas = np.linalg.norm(A @ e0 - b)
    out.append(_check("e0_feasible", feas <= tol * (1.0 + np.linalg.norm(b)), f"|A e0 - b| = {feas:.3e}"))
    try:
        if p.analytic is not None:
            lam = float(p.analytic.eigenvalues(e0, p.direction)[-1])
        else:
            lam = min_eigenvalue(p, e0, p.direction, imag_tol=hp.options.imag_tol)
        out.append(_check("e0_interior", lam > 0.0, f"min eigenvalue of e0 = {lam:.6e}"))
    except Exception as exc:  # noqa: BLE001 - any eigen failure means e0 cannot be certified
        out.append(_check("e0_interior", False, f"eigenvalue computation failed: {exc}"))
        return out
    if out[-1]["passed"] and all(c["passed"] for c in out):
        out.append(_swath_check(hp, p))
    return out


def _swath_check(hp, p):
    """QP_e0(alpha) must have an optimum; otherwise the method cannot start."""
    from .calculus import derivatives
    from .errors import HypersolveError
    from .qp import QpProblem, solve_qp

    opts = hp.options
    try:
        g, H = derivatives(p, hp.e0, oracle=opts.oracle_derivatives)
        solve_qp(QpProblem(hp.A, hp.b, hp.c, hp.e0, g, H, opts.alpha, p.degree, opts.residual_tol))
    except HypersolveError as exc:
        return _check("e0_in_swath", False, str(exc))
    return _check("e0_in_swath", True, "")


def require_valid(hp):
    failed = [c for c in validate(hp) if not c["passed"]]
    if failed:
        raise InitializationError("; ".join(f"{c['name']}: {c['detail']}" for c in failed))
    return hp


# ---------------------------------------------------------------------------
# builders


def from_lp(A, b, c, interior_point, options=None):
    """LP  min <c, x>  s.t.  A x = b, x >= 0  as a product-polynomial program."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[1]
    hp = HyperbolicProgram(A, b, c, PolynomialSpec("product", n=n), interior_point,
                           options or SolverOptions())
    return require_valid(hp)


def sdp_vectorize(A_ops, C, k):
    """Packed constraint rows and objective so that packed dot products equal traces."""
    w = packed_weights(k)
    for M in list(A_ops) + [C]:
        M = np.asarray(M, dtype=float)
        if M.shape != (k, k):
            raise InputError(f"SDP data matrices must be {k} x {k}")
        if not np.allclose(M, M.T, rtol=0.0, atol=1e-12):
            raise InputError("SDP data matrices must be symmetric")
    A = np.array([w * sym_pack(np.asarray(M, dtype=float)) for M in A_ops])
    c = w * sym_pack(np.asarray(C, dtype=float))
    return A, c


def from_sdp(A_ops, b, C, interior_X, options=None):
    """SDP  min tr(C X)  s.t.  tr(A_i X) = b_i, X psd  over packed symmetric X."""
    X0 = np.asarray(interior_X, dtype=float)
    k = X0.shape[0]
    if X0.shape != (k, k) or not np.allclose(X0, X0.T, rtol=0.0, atol=1e-12):
        raise InputError("interior_X must be a symmetric square matrix")
    if np.linalg.eigvalsh(X0)[0] <= 0.0:
        raise InitializationError("interior_X is not positive definite")
    A, c = sdp_vectorize(A_ops, C, k)
    hp = HyperbolicProgram(A, b, c, PolynomialSpec("determinant", k=k), sym_pack(X0),
                           options or SolverOptions())
    return require_valid(hp)


def from_socp(A, b, c, interior_point, options=None):
    """min <c, x> s.t. A x = b, x_n >= ||x_{1:n-1}||  (Lorentz cone)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    hp = HyperbolicProgram(A, b, c, PolynomialSpec("lorentz", n=A.shape[1]), interior_point,
                           options or SolverOptions())
    return require_valid(hp)


# ---------------------------------------------------------------------------
# JSON IO


def dumps(hp):
    # json writes floats with repr(), the shortest string that round-trips exactly
    return json.dumps(hp.to_dict(), indent=2)


def loads(text, source="<string>"):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None
    try:
        return HyperbolicProgram.from_dict(data)
    except InputError as exc:
        raise InputError(f"{source}: {exc}") from None


def save(hp, path):
    Path(path).write_text(dumps(hp) + "\n")


def load(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read: {exc.strerror}") from None
    return loads(text, source=str(path))


# ---------------------------------------------------------------------------
# reference solutions (test oracles, independent of the interior point method)


def lp_vertex_enumeration(A, b, c, tol=1e-9):
    """Optimal value of min c'x, Ax = b, x >= 0 by enumerating all bases."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    if n > 10:
        raise CapabilityError("vertex enumeration is limited to n <= 10")
    best = np.inf
    for basis in itertools.combinations(range(n), m):
        B = A[:, basis]
        if abs(np.linalg.det(B)) < 1e-12:
            continue
        xb = np.linalg.solve(B, b)
        if np.all(xb >= -tol):
            best = min(best, float(np.asarray(c)[list(basis)] @ xb))
    return best


def sdp_trace_reference(A1, b1, C):
    """min tr(CX) s.t. tr(A1 X) = b1, X psd, with A1 positive definite: b1 * lambda_min(C, A1)."""
    return float(b1 * scipy.linalg.eigh(C, A1, eigvals_only=True)[0])


def socp_grid_reference(A, b, c, radius=4.0, points=401):
    """Grid search over the (<= 2 dimensional) feasible affine set, then local refinement."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    c = np.asarray(c, dtype=float)
    x0, *_ = np.linalg.lstsq(A, b, rcond=None)
    Z = scipy.linalg.null_space(A)
    k = Z.shape[1]
    if k > 2:
        raise CapabilityError("grid reference supports at most 2 free dimensions")
    axes = [np.linspace(-radius, radius, points)] * k
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
    X = x0[None, :] + grid @ Z.T
    feasible = X[:, -1] >= np.linalg.norm(X[:, :-1], axis=1)
    if not np.any(feasible):
        raise CapabilityError("no feasible grid point")
    vals = X[feasible] @ c
    start = grid[feasible][np.argmin(vals)]

    cons = {"type": "ineq", "fun": lambda u: (x0 + Z @ u)[-1] - np.linalg.norm((x0 + Z @ u)[:-1])}
    res = scipy.optimize.minimize(lambda u: c @ (x0 + Z @ u), start, constraints=[cons],
                                  method="SLSQP", options={"ftol": 1e-12, "maxiter": 500})
    refined = float(c @ (x0 + Z @ res.x))
    xr = x0 + Z @ res.x
    if res.success and xr[-1] - np.linalg.norm(xr[:-1]) >= -1e-8:
        return min(refined, float(vals.min()))
    return float(vals.min())


def brute_force_reference(hp):
    """Reference optimal value by a method independent of the solver."""
    kind = hp.poly.kind
    if kind == "product":
        return lp_vertex_enumeration(hp.A, hp.b, hp.c)
    if kind == "determinant":
        k = hp.poly.k
        if hp.A.shape[0] != 1:
            raise CapabilityError("SDP reference needs a single trace constraint")
        w = packed_weights(k)
        A1 = sym_unpack(hp.A[0] / w, k)
        C = sym_unpack(hp.c / w, k)
        if np.linalg.eigvalsh(A1)[0] <= 0.0:
            raise CapabilityError("SDP reference needs a positive definite constraint matrix")
        return sdp_trace_reference(A1, hp.b[0], C)
    if kind == "lorentz":
        return socp_grid_reference(hp.A, hp.b, hp.c)
    raise CapabilityError(f"no reference solver for kind {kind!r}")


# ---------------------------------------------------------------------------
# fixtures and random instances

SDP3_C = np.array([[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]])


def fixtures(options=None):
    """The named instances used by the acceptance suite and the data/ files."""
    opts = options or SolverOptions()
    return {
        "lp": from_lp([[1.0, 1.0]], [2.0], [1.0, 0.0], [1.0, 1.0], opts),
        "sdp2": from_sdp([np.eye(2)], [1.0], np.diag([1.0, 3.0]), np.eye(2) / 2.0, opts),
        "sdp3": from_sdp([np.eye(3)], [1.0], SDP3_C, np.eye(3) / 3.0, opts),
        "socp": from_socp([[-1.0, 0.0, 1.0]], [1.0], [0.0, 0.0, 1.0], [0.0, 0.0, 1.0], opts),
    }


def random_lp(n, m, rng, options=None):
    """Random LP whose starting point is the analytic center of its feasible set.

    e0 ~ U(0.5, 1.5)^n; A has m - 1 Gaussian rows plus the row 1/e0 (so
    -g(e0) lies in A's row space and the relaxation at e0 is bounded), rows
    orthonormalised; b = A e0; c is a Gaussian vector projected off A's row
    space and normalised.  Since (1/e0)'x = n on the feasible set and x >= 0,
    the feasible set is a bounded polytope and every c gives a finite optimum.
    """
    if not 1 <= m < n:
        raise InputError("random_lp needs 1 <= m < n")
    e0 = rng.uniform(0.5, 1.5, n)
    rows = np.vstack([1.0 / e0, rng.standard_normal((m - 1, n))])
    A = np.linalg.qr(rows.T)[0].T
    c = rng.standard_normal(n)
    c -= A.T @ (A @ c)
    c /= np.linalg.norm(c)
    return HyperbolicProgram(A, A @ e0, c, PolynomialSpec("product", n=n), e0, options or SolverOptions())
