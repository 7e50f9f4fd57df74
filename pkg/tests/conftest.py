"""Shared generators for the test suite."""

import numpy as np
import pytest

from hypersolve.calculus import derivatives
from hypersolve.polynomials import (
    determinant_polynomial,
    lorentz_polynomial,
    pencil_polynomial,
    product_polynomial,
    sym_pack,
)


def random_spd(k, rng, lo=0.5, hi=2.0):
    Q, _ = np.linalg.qr(rng.standard_normal((k, k)))
    return (Q * rng.uniform(lo, hi, k)) @ Q.T


def product_point(n, rng):
    return rng.uniform(0.5, 2.0, n)


def determinant_point(k, rng):
    return sym_pack(random_spd(k, rng))


def lorentz_point(n, rng):
    x = rng.standard_normal(n)
    x[-1] = np.linalg.norm(x[:-1]) + rng.uniform(0.5, 2.0)
    return x


def random_pencil(n, k, rng):
    """A_1 = I plus n - 1 random symmetric matrices; direction (1, 0, ..., 0)."""
    mats = [np.eye(k)]
    for _ in range(n - 1):
        M = rng.standard_normal((k, k))
        mats.append(0.5 * (M + M.T))
    direction = np.zeros(n)
    direction[0] = 1.0
    return pencil_polynomial(np.array(mats), direction)


def pencil_point(p, rng):
    """A point whose pencil matrix has eigenvalues >= 1/2."""
    n = p.dimension
    while True:
        x = p.direction + 0.3 * rng.standard_normal(n)
        lam = p.analytic.eigenvalues(x, p.direction)
        if lam[-1] >= 0.5:
            return x


def family_cases(rng, count):
    """(name, polynomial, point) triples: ``count`` points per built-in family."""
    out = []
    for _ in range(count):
        n = int(rng.integers(2, 9))
        out.append(("product", product_polynomial(n), product_point(n, rng)))
    for _ in range(count):
        k = int(rng.integers(1, 5))
        out.append(("determinant", determinant_polynomial(k), determinant_point(k, rng)))
    for _ in range(count):
        n = int(rng.integers(2, 9))
        out.append(("lorentz", lorentz_polynomial(n), lorentz_point(n, rng)))
    for _ in range(count):
        n = int(rng.integers(2, 5))
        k = int(rng.integers(1, 4))
        p = random_pencil(n, k, rng)
        out.append(("pencil", p, pencil_point(p, rng)))
    return out


def swath_instance(rng, alpha=0.1):
    """Random QP_e(alpha) data (n <= 6, m <= 3, product or Lorentz) with a bounded relaxation.

    The relaxation at e is bounded exactly when the H-orthogonal projection of
    e onto null(A) has local norm below alpha (then null(A) misses K_e(alpha)).
    The first row of A is H e plus noise, and instances failing that test are
    redrawn; the solver itself is never consulted.
    """
    while True:
        family = "product" if rng.random() < 0.5 else "lorentz"
        n = int(rng.integers(2 if family == "product" else 3, 7))
        m = int(rng.integers(1, min(3, n - 1) + 1))
        if family == "product":
            p = product_polynomial(n)
            e = product_point(n, rng)
        else:
            p = lorentz_polynomial(n)
            e = lorentz_point(n, rng)
        g, H = derivatives(p, e)
        first = H @ e
        first = first / np.linalg.norm(first) + 0.3 * alpha * rng.standard_normal(n) / np.sqrt(n)
        A = np.vstack([first, rng.standard_normal((m - 1, n))])
        c = rng.standard_normal(n)
        Z = _null_basis(A)
        # H-orthogonal projection of e onto span(Z)
        G = Z.T @ H @ Z
        coef = np.linalg.solve(G, Z.T @ H @ e)
        proj = Z @ coef
        if np.sqrt(proj @ H @ proj) >= 0.9 * alpha:
            continue
        return dict(family=family, p=p, A=A, b=A @ e, c=c, e=e, g=g, H=H, alpha=alpha)


def _null_basis(A):
    _, s, Vt = np.linalg.svd(A)
    rank = int(np.sum(s > 1e-12 * s[0]))
    return Vt[rank:].T


def boundary_samples(inst, count, rng):
    """Feasible points on the boundary of K_e(alpha): rays from e inside the slice A x = b."""
    A, e, H, alpha = inst["A"], inst["e"], inst["H"], inst["alpha"]
    Z = _null_basis(A)
    U = rng.standard_normal((count, Z.shape[1])) @ Z.T
    # boundary of <e, x>_e^2 = alpha^2 ||x||_e^2 along x = e + s u, s > 0
    d_ee = e @ H @ e
    eu = U @ H @ e
    uu = np.einsum("ij,jk,ik->i", U, H, U)
    a2 = alpha * alpha
    qa = eu * eu - a2 * uu
    qb = 2.0 * (d_ee * eu - a2 * eu)
    qc = d_ee * d_ee - a2 * d_ee
    disc = qb * qb - 4.0 * qa * qc
    sq = np.sqrt(np.maximum(disc, 0.0))
    roots = np.stack([(-qb + sq) / (2.0 * qa), (-qb - sq) / (2.0 * qa)], axis=1)
    roots = np.where(roots > 0.0, roots, np.inf)
    s = roots.min(axis=1)
    return e[None, :] + s[:, None] * U


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
