"""Hyperbolic polynomial oracles and the built-in families.

A :class:`HyperbolicPolynomial` is little more than an evaluation oracle
(complex vector in, complex scalar out) together with its degree and a
hyperbolic direction.  The built-in families (product, determinant, Lorentz,
determinantal pencil, sparse monomial) additionally carry closed-form barrier
derivatives which serve as the trusted baseline for the oracle-based
derivatives in :mod:`hypersolve.calculus`.

Symmetric k x k matrices of the determinant family live in R^n with
n = k(k+1)/2, stored as the row-major upper triangle with off-diagonal entries
unscaled.  Under this packing tr(XW) = sum(packed_weights(k) * x * w), i.e.
off-diagonal coordinates carry weight 2.  Gradients and Hessians returned here
are ordinary Euclidean derivatives with respect to the packed coordinates.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .errors import CapabilityError, InputError, SingularityError

# p(x) counts as zero only when it vanishes against ||x||_inf^d at this level;
# interior points near a face legitimately have |p(x)| many orders below 1
SINGULAR_RTOL = 1e-280

KINDS = ("product", "determinant", "lorentz", "pencil", "sparse-monomial")


# ---------------------------------------------------------------------------
# packed symmetric matrices


def packed_dim(k):
    return k * (k + 1) // 2


def side_from_dim(n):
    k = int(round((np.sqrt(8 * n + 1) - 1) / 2))
    if packed_dim(k) != n:
        raise InputError(f"{n} is not a triangular number k(k+1)/2")
    return k


def packed_weights(k):
    """Weights w such that tr(XW) = sum(w * pack(X) * pack(W))."""
    rows, cols = np.triu_indices(k)
    return np.where(rows == cols, 1.0, 2.0)


def sym_pack(X):
    X = np.asarray(X)
    k = X.shape[-1]
    rows, cols = np.triu_indices(k)
    return X[..., rows, cols]


def sym_unpack(x, k=None):
    """Inverse of :func:`sym_pack`; accepts a trailing axis of packed vectors."""
    x = np.asarray(x)
    if k is None:
        k = side_from_dim(x.shape[-1])
    rows, cols = np.triu_indices(k)
    X = np.zeros(x.shape[:-1] + (k, k), dtype=x.dtype)
    X[..., rows, cols] = x
    X[..., cols, rows] = x
    return X


# ---------------------------------------------------------------------------
# oracle


class OracleCounter:
    """Mutable tally of oracle evaluations, one per evaluated point."""

    def __init__(self):
        self.calls = 0

    def reset(self):
        self.calls = 0


@dataclass(frozen=True, eq=False)
class HyperbolicPolynomial:
    """Evaluable homogeneous polynomial with a declared hyperbolic direction.

    ``evaluator`` maps a complex n-vector to a complex scalar.  ``batch`` is an
    optional vectorised version taking an (N, n) array; when absent, batches
    are evaluated point by point.  The oracle must be complex-analytic (it is
    evaluated at complex shifts of real points).
    """

    degree: int
    dimension: int
    direction: np.ndarray
    evaluator: Callable
    batch: Optional[Callable] = None
    analytic: Optional["AnalyticFamily"] = None
    kind: str = "custom"
    counter: Optional[OracleCounter] = field(default=None, repr=False)

    def __post_init__(self):
        if self.degree < 1 or self.dimension < 1:
            raise InputError("degree and dimension must be positive")
        direction = np.asarray(self.direction, dtype=float).reshape(-1)
        if direction.shape != (self.dimension,):
            raise InputError(
                f"direction has length {direction.size}, expected {self.dimension}"
            )
        object.__setattr__(self, "direction", direction)

    def _check(self, X):
        if X.shape[-1] != self.dimension:
            raise InputError(
                f"point has length {X.shape[-1]}, polynomial has {self.dimension} variables"
            )

    def evaluate(self, x):
        x = np.asarray(x, dtype=complex).reshape(-1)
        self._check(x)
        if self.counter is not None:
            self.counter.calls += 1
        return complex(self.evaluator(x))

    def evaluate_many(self, X):
        X = np.asarray(X, dtype=complex)
        if X.ndim != 2:
            raise InputError("evaluate_many expects an (N, n) array")
        self._check(X)
        if self.counter is not None:
            self.counter.calls += X.shape[0]
        if self.batch is not None:
            return np.asarray(self.batch(X), dtype=complex)
        return np.array([complex(self.evaluator(x)) for x in X], dtype=complex)

    def evaluate_real(self, x):
        """p(x) for real x, as a float."""
        return self.evaluate(np.asarray(x, dtype=float)).real

    def with_direction(self, direction):
        return replace(self, direction=np.asarray(direction, dtype=float))


def instrument(p):
    """Return ``(p_counted, counter)``; p_counted shares p's oracle but counts calls."""
    counter = OracleCounter()
    return replace(p, counter=counter), counter


def evaluate(p, x):
    return p.evaluate(x)


# ---------------------------------------------------------------------------
# closed-form barrier derivatives


class AnalyticFamily:
    """Closed-form gradient, Hessian-vector product and eigenvalues of -ln p."""

    def grad_dot(self, x, w):
        raise NotImplementedError

    def hess_vec(self, x, w):
        raise NotImplementedError

    def gradient(self, x):
        n = x.size
        return np.array([self.grad_dot(x, np.eye(n)[i]) for i in range(n)])

    def hessian(self, x):
        n = x.size
        H = np.column_stack([self.hess_vec(x, np.eye(n)[i]) for i in range(n)])
        return 0.5 * (H + H.T)

    def eigenvalues(self, x, e):
        raise NotImplementedError

    def check(self, x):
        """Raise SingularityError when p(x) = 0, without forming p(x).

        p itself can underflow long before x reaches the boundary (a product
        of many small coordinates), so each family tests its own factors.
        """
        raise NotImplementedError


class _Product(AnalyticFamily):
    def grad_dot(self, x, w):
        return -np.sum(w / x)

    def hess_vec(self, x, w):
        return w / x**2

    def gradient(self, x):
        return -1.0 / x

    def hessian(self, x):
        return np.diag(1.0 / x**2)

    def check(self, x):
        if not np.all(np.isfinite(x)) or np.any(x == 0.0):
            raise SingularityError("a coordinate of x is zero: x is on the boundary of the orthant")

    def eigenvalues(self, x, e):
        # p(te - x) = prod(e) * prod(t - x_i/e_i)
        return np.sort(x / e)[::-1]


class _Determinant(AnalyticFamily):
    def __init__(self, k):
        self.k = k
        self.weights = packed_weights(k)

    def _inv(self, x):
        X = sym_unpack(x, self.k)
        try:
            c, low = scipy.linalg.cho_factor(X)
        except np.linalg.LinAlgError:
            raise SingularityError("matrix is not positive definite") from None
        return scipy.linalg.cho_solve((c, low), np.eye(self.k))

    def grad_dot(self, x, w):
        return -np.trace(self._inv(x) @ sym_unpack(w, self.k))

    def hess_vec(self, x, w):
        Xi = self._inv(x)
        return self.weights * sym_pack(Xi @ sym_unpack(w, self.k) @ Xi)

    def gradient(self, x):
        return -self.weights * sym_pack(self._inv(x))

    def hessian(self, x):
        Xi = self._inv(x)
        rows, cols = np.triu_indices(self.k)
        # d^2/dx_a dx_b of -ln det = tr(Xi E_a Xi E_b), E symmetric unit matrices
        M = Xi[np.ix_(rows, rows)] * Xi[np.ix_(cols, cols)] + Xi[np.ix_(rows, cols)] * Xi[np.ix_(cols, rows)]
        W = np.outer(self.weights, self.weights) / 2.0
        return M * W

    def check(self, x):
        X = sym_unpack(x, self.k)
        if not np.all(np.isfinite(X)) or np.linalg.matrix_rank(X) < self.k:
            raise SingularityError("X is singular: x is on the boundary of the psd cone")

    def eigenvalues(self, x, e):
        X = sym_unpack(x, self.k)
        E = sym_unpack(e, self.k)
        return _generalized_eigs(X, E)


class _Lorentz(AnalyticFamily):
    # p(x) = x_n^2 - sum_{i<n} x_i^2.  Verified against finite differences:
    # <grad(-ln p), w> = 2 (sum_{i<n} x_i w_i - x_n w_n) / p, and
    # (hess w)_i = (4 x_i G + 2 p w_i) / p^2 for i < n,
    # (hess w)_n = (-4 x_n G - 2 p w_n) / p^2, with G = sum_{i<n} x_i w_i - x_n w_n.
    def _p(self, x):
        p = x[-1] ** 2 - np.sum(x[:-1] ** 2)
        if p == 0.0 or not np.isfinite(p):
            raise SingularityError("p(x) = 0: x is on the boundary of the Lorentz cone")
        return p

    def check(self, x):
        self._p(x)

    def grad_dot(self, x, w):
        p = self._p(x)
        return 2.0 * (x[:-1] @ w[:-1] - x[-1] * w[-1]) / p

    def hess_vec(self, x, w):
        p = self._p(x)
        G = x[:-1] @ w[:-1] - x[-1] * w[-1]
        out = (4.0 * x * G + 2.0 * p * w) / p**2
        out[-1] = (-4.0 * x[-1] * G - 2.0 * p * w[-1]) / p**2
        return out

    def eigenvalues(self, x, e):
        # roots of p(te - x) = qa t^2 + qb t + qc (real by hyperbolicity)
        J = np.ones_like(x)
        J[:-1] = -1.0
        qa = np.sum(J * e * e)
        qb = -2.0 * np.sum(J * e * x)
        qc = np.sum(J * x * x)
        disc = max(qb * qb - 4.0 * qa * qc, 0.0)
        sq = np.sqrt(disc)
        # numerically stable quadratic roots
        q = -0.5 * (qb + np.copysign(sq, qb)) if qb != 0.0 else -0.5 * sq
        if q == 0.0:
            return np.zeros(2)
        roots = np.array([q / qa, qc / q])
        return np.sort(roots)[::-1]


class _Pencil(AnalyticFamily):
    def __init__(self, mats):
        self.mats = mats

    def _mat(self, x):
        return np.tensordot(x, self.mats, axes=1)

    def _inv(self, x):
        X = self._mat(x)
        try:
            return np.linalg.inv(X)
        except np.linalg.LinAlgError:
            raise SingularityError("pencil matrix is singular") from None

    def grad_dot(self, x, w):
        return -np.trace(self._inv(x) @ self._mat(w))

    def hess_vec(self, x, w):
        Xi = self._inv(x)
        M = Xi @ self._mat(w) @ Xi
        return np.einsum("ij,kji->k", M, self.mats)

    def check(self, x):
        X = self._mat(x)
        if not np.all(np.isfinite(X)) or np.linalg.matrix_rank(X) < X.shape[0]:
            raise SingularityError("pencil matrix is singular: x is on the cone boundary")

    def eigenvalues(self, x, e):
        return _generalized_eigs(self._mat(x), self._mat(e))


def _generalized_eigs(X, E):
    """Roots of det(tE - X), descending; E symmetric positive definite."""
    try:
        vals = scipy.linalg.eigh(X, E, eigvals_only=True)
    except np.linalg.LinAlgError:
        vals = np.linalg.eigvals(np.linalg.solve(E, X)).real
    return np.sort(vals)[::-1]


def _require_analytic(p):
    if p.analytic is None:
        raise CapabilityError(f"no closed-form derivatives for kind {p.kind!r}")
    return p.analytic


def _interior_value(p, x):
    _require_analytic(p).check(x)


def analytic_grad_dot(p, x, w):
    """<grad(-ln p(x)), w> from the family's closed form."""
    fam = _require_analytic(p)
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    _interior_value(p, x)
    return float(fam.grad_dot(x, w))


def analytic_hess_vec(p, x, w):
    """hess(-ln p(x)) @ w from the family's closed form."""
    fam = _require_analytic(p)
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    _interior_value(p, x)
    return np.asarray(fam.hess_vec(x, w), dtype=float)


# ---------------------------------------------------------------------------
# specs and builders


@dataclass(frozen=True, eq=False)
class PolynomialSpec:
    """Serializable description of a built-in polynomial.

    ``n`` is used by product/lorentz, ``k`` by determinant, ``matrices`` by
    pencil and ``terms`` (list of ``(coefficient, exponents)``) by
    sparse-monomial.  ``direction`` defaults per family where one is canonical.
    """

    kind: str
    n: Optional[int] = None
    k: Optional[int] = None
    matrices: Optional[np.ndarray] = None
    terms: Optional[tuple] = None
    direction: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown polynomial kind {self.kind!r}; expected one of {KINDS}")

    def to_dict(self):
        out = {"kind": self.kind}
        if self.kind in ("product", "lorentz"):
            out["n"] = int(self.n)
        elif self.kind == "determinant":
            out["k"] = int(self.k)
        elif self.kind == "pencil":
            out["matrices"] = np.asarray(self.matrices, dtype=float).tolist()
        else:
            out["terms"] = [
                {"coef": float(c), "exponents": [int(a) for a in alpha]} for c, alpha in self.terms
            ]
        if self.direction is not None:
            out["direction"] = np.asarray(self.direction, dtype=float).tolist()
        return out

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict) or "kind" not in data:
            raise InputError("poly: expected an object with a 'kind' field")
        kind = data["kind"]
        direction = data.get("direction")
        if direction is not None:
            direction = np.asarray(direction, dtype=float)
        try:
            if kind in ("product", "lorentz"):
                return cls(kind, n=int(data["n"]), direction=direction)
            if kind == "determinant":
                return cls(kind, k=int(data["k"]), direction=direction)
            if kind == "pencil":
                return cls(kind, matrices=np.asarray(data["matrices"], dtype=float), direction=direction)
            if kind == "sparse-monomial":
                terms = tuple(
                    (float(t["coef"]), tuple(int(a) for a in t["exponents"])) for t in data["terms"]
                )
                return cls(kind, terms=terms, direction=direction)
        except KeyError as exc:
            raise InputError(f"poly: missing field {exc.args[0]!r} for kind {kind!r}") from None
        except (TypeError, ValueError) as exc:
            raise InputError(f"poly: bad payload for kind {kind!r}: {exc}") from None
        raise InputError(f"unknown polynomial kind {kind!r}; expected one of {KINDS}")

    def build(self):
        builder = {
            "product": lambda: product_polynomial(self.n),
            "determinant": lambda: determinant_polynomial(self.k),
            "lorentz": lambda: lorentz_polynomial(self.n),
            "pencil": lambda: pencil_polynomial(self.matrices, self.direction),
            "sparse-monomial": lambda: sparse_monomial_polynomial(self.terms, self.direction),
        }[self.kind]
        p = builder()
        if self.direction is not None and self.kind not in ("pencil", "sparse-monomial"):
            p = p.with_direction(self.direction)
            _check_direction(p)
        return p


def _check_direction(p):
    val = p.evaluate(p.direction)
    if not (val.real > 0.0 and abs(val.imag) <= 1e-12 * abs(val)):
        raise InputError(f"p(direction) = {val} is not real and strictly positive")


def product_polynomial(n):
    """p(x) = x_1 x_2 ... x_n (linear programming)."""
    if n < 1:
        raise InputError("product polynomial needs n >= 1")
    return HyperbolicPolynomial(
        degree=n,
        dimension=n,
        direction=np.ones(n),
        evaluator=np.prod,
        batch=lambda X: np.prod(X, axis=1),
        analytic=_Product(),
        kind="product",
    )


def determinant_polynomial(k):
    """p(x) = det(X) over packed symmetric k x k matrices (semidefinite programming)."""
    if k < 1:
        raise InputError("determinant polynomial needs k >= 1")
    return HyperbolicPolynomial(
        degree=k,
        dimension=packed_dim(k),
        direction=sym_pack(np.eye(k)),
        evaluator=lambda x: np.linalg.det(sym_unpack(x, k)),
        batch=lambda X: np.linalg.det(sym_unpack(X, k)),
        analytic=_Determinant(k),
        kind="determinant",
    )


def lorentz_polynomial(n):
    """p(x) = x_n^2 - (x_1^2 + ... + x_{n-1}^2) (second-order cone)."""
    if n < 2:
        raise InputError("lorentz polynomial needs n >= 2")
    direction = np.zeros(n)
    direction[-1] = 1.0
    return HyperbolicPolynomial(
        degree=2,
        dimension=n,
        direction=direction,
        evaluator=lambda x: x[-1] ** 2 - np.sum(x[:-1] ** 2),
        batch=lambda X: X[:, -1] ** 2 - np.sum(X[:, :-1] ** 2, axis=1),
        analytic=_Lorentz(),
        kind="lorentz",
    )


def pencil_polynomial(matrices, direction=None):
    """p(x) = det(x_1 A_1 + ... + x_n A_n) for symmetric A_i.

    The direction must make sum(e_i A_i) positive definite; when omitted it is
    solved from sum(e_i A_i) = I in the least-squares sense and verified.
    """
    mats = np.asarray(matrices, dtype=float)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise InputError("pencil: expected a list of square matrices")
    if not np.allclose(mats, np.swapaxes(mats, 1, 2), rtol=0.0, atol=1e-12):
        raise InputError("pencil: every A_i must be symmetric")
    n, k = mats.shape[0], mats.shape[1]
    if direction is None:
        flat = mats.reshape(n, -1).T
        direction, *_ = np.linalg.lstsq(flat, np.eye(k).ravel(), rcond=None)
    direction = np.asarray(direction, dtype=float)
    if direction.shape != (n,):
        raise InputError(f"pencil: direction must have length {n}")
    E = np.tensordot(direction, mats, axes=1)
    if not np.allclose(E, np.eye(k), rtol=0.0, atol=1e-12):
        if np.linalg.eigvalsh(E)[0] <= 0.0:
            raise InputError("pencil: sum(e_i A_i) is neither the identity nor positive definite")
    return HyperbolicPolynomial(
        degree=k,
        dimension=n,
        direction=direction,
        evaluator=lambda x: np.linalg.det(np.tensordot(x, mats, axes=1)),
        batch=lambda X: np.linalg.det(np.tensordot(X, mats, axes=1)),
        analytic=_Pencil(mats),
        kind="pencil",
    )


def sparse_monomial_polynomial(terms, direction):
    """p(x) = sum_j c_j x^alpha_j, all monomials of the same total degree.

    Hyperbolicity is not verified; see :func:`hyperbolicity_probe`.
    """
    if not terms:
        raise InputError("sparse-monomial: need at least one term")
    if direction is None:
        raise InputError("sparse-monomial: a hyperbolic direction is required")
    coefs = np.array([float(c) for c, _ in terms])
    exps = np.array([list(alpha) for _, alpha in terms], dtype=int)
    if exps.ndim != 2 or np.any(exps < 0):
        raise InputError("sparse-monomial: exponents must be equal-length non-negative integer lists")
    degrees = exps.sum(axis=1)
    if np.any(degrees != degrees[0]) or degrees[0] < 1:
        raise InputError(f"sparse-monomial: monomials have total degrees {sorted(set(degrees.tolist()))}; all must be equal and >= 1")

    def batch(X):
        return np.prod(X[:, None, :] ** exps[None, :, :], axis=2) @ coefs

    p = HyperbolicPolynomial(
        degree=int(degrees[0]),
        dimension=exps.shape[1],
        direction=np.asarray(direction, dtype=float),
        evaluator=lambda x: batch(x[None, :])[0],
        batch=batch,
        kind="sparse-monomial",
    )
    _check_direction(p)
    return p


# ---------------------------------------------------------------------------
# hyperbolicity diagnostic


@dataclass
class ProbeReport:
    trials: int
    max_abs_imag: float
    max_rel_imag: float
    tolerance: float
    flagged: bool

    def to_dict(self):
        return {
            "trials": self.trials,
            "max_abs_imag": self.max_abs_imag,
            "max_rel_imag": self.max_rel_imag,
            "tolerance": self.tolerance,
            "flagged": self.flagged,
        }


def hyperbolicity_probe(p, trials=20, seed=0, direction=None, tol=1e-7):
    """Look for complex roots of t -> p(x + t e) at random real x.

    Advisory only: a clean report does not certify hyperbolicity.
    """
    from .univariate import restrict, restriction_roots

    e = p.direction if direction is None else np.asarray(direction, dtype=float)
    rng = np.random.default_rng(seed)
    max_abs = 0.0
    max_rel = 0.0
    for _ in range(trials):
        x = rng.standard_normal(p.dimension)
        roots = restriction_roots(restrict(p, x, e).coeffs)
        if roots.size:
            max_abs = max(max_abs, float(np.max(np.abs(roots.imag))))
            max_rel = max(max_rel, float(np.max(np.abs(roots.imag) / (1.0 + np.abs(roots)))))
    return ProbeReport(trials, max_abs, max_rel, tol, max_rel > tol)
