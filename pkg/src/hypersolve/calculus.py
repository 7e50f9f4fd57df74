"""Gradient and Hessian of the log barrier f(x) = -ln p(x) from an evaluation oracle.

Directional derivatives of p are read off as linear coefficients of
univariate restrictions, which are interpolated at roots of unity:

    <grad p(x), w> = (1/(d r)) sum_k w^{-k} (p(x + r w^k w) - p(x))

and mixed second derivatives come from the same formula applied twice
(a 2-D DFT over the grid x + r_s w^j e_i + r_t w^k w).  The interpolation
radii are picked so the perturbation is comparable to x; the result does not
depend on them in exact arithmetic.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import IndefiniteError, SingularityError
from .polynomials import SINGULAR_RTOL
from .univariate import roots_of_unity


def _radius(x, w):
    nx = float(np.linalg.norm(x))
    nw = float(np.linalg.norm(w))
    return nx / nw if nx > 0.0 else 1.0 / nw


def _p_at(p, x):
    px = p.evaluate_real(x)
    scale = max(1.0, float(np.max(np.abs(x)))) ** p.degree
    if not np.isfinite(px) or abs(px) <= SINGULAR_RTOL * scale:
        raise SingularityError(f"p(x) = {px:.3e}: x is (numerically) on the cone boundary")
    return px


def _linear_coefficients(p, x, directions, px):
    """<grad p(x), v> for each row v of ``directions`` (d calls per row)."""
    d = p.degree
    n_dir = directions.shape[0]
    norms = np.linalg.norm(directions, axis=1)
    out = np.zeros(n_dir)
    live = norms > 0.0
    if not np.any(live):
        return out
    V = directions[live]
    radii = np.array([_radius(x, v) for v in V])
    roots = roots_of_unity(d)
    pts = x[None, None, :] + (radii[:, None, None] * roots[None, :, None]) * V[:, None, :]
    vals = p.evaluate_many(pts.reshape(-1, x.size)).reshape(V.shape[0], d)
    # coefficient of t^1: (1/d) sum_k w^{-k} (f_k - p(x))
    coef = ((vals - px) @ np.conj(roots)) / d
    out[live] = coef.real / radii
    return out


def grad_dot(p, x, w):
    """<grad(-ln p(x)), w> using d + 1 oracle calls."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if not np.any(w):
        return 0.0
    px = _p_at(p, x)
    return float(-_linear_coefficients(p, x, w[None, :], px)[0] / px)


def _p_gradient(p, x, px):
    return _linear_coefficients(p, x, np.eye(x.size), px)


def full_gradient(p, x):
    """g(x) = grad(-ln p(x)) assembled from the n basis directions (n d + 1 calls)."""
    x = np.asarray(x, dtype=float)
    px = _p_at(p, x)
    return -_p_gradient(p, x, px) / px


def _mixed_second(p, x, w, px):
    """<grad d_i p(x), w> for every i, via nested interpolation (n d^2 calls)."""
    d = p.degree
    n = x.size
    if d == 1:
        return np.zeros(n)
    roots = roots_of_unity(d)
    r_s = _radius(x, np.ones(1))
    r_t = _radius(x, w)
    # grid[i, j, k] = x + r_s w^j e_i + r_t w^k w
    base = x[None, :] + r_t * roots[:, None] * w[None, :]
    grid = np.broadcast_to(base, (n, d, d, n)).copy()
    idx = np.arange(n)
    grid[idx, :, :, idx] += (r_s * roots)[None, :, None]
    vals = p.evaluate_many(grid.reshape(-1, n)).reshape(n, d, d)
    # the s^1 t^1 coefficient; all other monomials alias away for d >= 2
    coef = np.einsum("ijk,j,k->i", vals, np.conj(roots), np.conj(roots)) / d**2
    return coef.real / (r_s * r_t)


def hess_vec(p, x, w, _cache=None):
    """hess(-ln p(x)) @ w, coordinate-wise:

        (H w)_i = d_i p <grad p, w> / p^2 - <grad d_i p, w> / p

    with O(n d^2) oracle calls.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if _cache is None:
        px = _p_at(p, x)
        gp = _p_gradient(p, x, px)
    else:
        px, gp = _cache
    if not np.any(w):
        return np.zeros(x.size)
    return gp * (gp @ w) / px**2 - _mixed_second(p, x, w, px) / px


def full_hessian(p, x, check=True):
    """H(x) assembled column by column from hess_vec and symmetrised."""
    x = np.asarray(x, dtype=float)
    n = x.size
    px = _p_at(p, x)
    gp = _p_gradient(p, x, px)
    H = np.column_stack([hess_vec(p, x, np.eye(n)[i], _cache=(px, gp)) for i in range(n)])
    H = 0.5 * (H + H.T)
    if check:
        _check_pd(H)
    return H


def _check_pd(H):
    try:
        scipy.linalg.cho_factor(H)
    except np.linalg.LinAlgError:
        raise IndefiniteError(
            "barrier Hessian is not positive definite: the point is outside the "
            "hyperbolicity cone or the polynomial is not hyperbolic"
        ) from None


def derivatives(p, x, oracle=False, check=True):
    """(g(x), H(x)) by the oracle route or, when available, closed forms."""
    x = np.asarray(x, dtype=float)
    if oracle or p.analytic is None:
        g = full_gradient(p, x)
        H = full_hessian(p, x, check=False)
    else:
        p.analytic.check(x)
        g = np.asarray(p.analytic.gradient(x), dtype=float)
        H = np.asarray(p.analytic.hessian(x), dtype=float)
        H = 0.5 * (H + H.T)
    if check:
        _check_pd(H)
    return g, H


@dataclass
class BarrierPoint:
    """x together with cached p(x), g(x) and H(x)."""

    x: np.ndarray
    p_of_x: float
    gradient: Optional[np.ndarray] = None
    hessian: Optional[np.ndarray] = None

    def identity_residuals(self, degree):
        """Relative residuals of H x = -g and x^T H x = d."""
        Hx = self.hessian @ self.x
        r1 = np.linalg.norm(Hx + self.gradient) / max(np.linalg.norm(self.gradient), 1e-300)
        r2 = abs(self.x @ Hx - degree) / degree
        return float(r1), float(r2)


def barrier_point(p, x, oracle=False):
    x = np.asarray(x, dtype=float)
    px = _p_at(p, x)
    if px <= 0.0:
        raise SingularityError(f"p(x) = {px:.3e} <= 0: x is not interior")
    g, H = derivatives(p, x, oracle=oracle)
    return BarrierPoint(x, px, g, H)


def local_inner(p, x, u, v, H=None):
    """<u, v>_x = u^T H(x) v."""
    if H is None:
        H = derivatives(p, x)[1]
    return float(np.asarray(u) @ H @ np.asarray(v))


def local_norm(p, x, u, H=None):
    return float(np.sqrt(max(local_inner(p, x, u, u, H), 0.0)))


# ---------------------------------------------------------------------------
# finite-difference references


def fd_gradient(p, x, h=1e-5):
    """Central differences of -ln p."""
    x = np.asarray(x, dtype=float)
    f = lambda z: -np.log(p.evaluate_real(z))
    g = np.empty(x.size)
    for i in range(x.size):
        step = np.zeros(x.size)
        step[i] = h
        g[i] = (f(x + step) - f(x - step)) / (2.0 * h)
    return g


def fd_hess_vec(grad, x, w, h=1e-4):
    """(g(x + h w) - g(x - h w)) / (2h) for a gradient callable ``grad``."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    return (grad(x + h * w) - grad(x - h * w)) / (2.0 * h)


def fd_hessian(grad, x, h=1e-4):
    n = len(x)
    H = np.column_stack([fd_hess_vec(grad, x, np.eye(n)[i], h) for i in range(n)])
    return 0.5 * (H + H.T)


@dataclass
class DerivativeCheck:
    name: str
    error: float
    tolerance: float

    @property
    def passed(self):
        return bool(self.error <= self.tolerance)


def check_derivatives(p, points, fd_grad_step=1e-5, fd_hess_step=1e-4, seed=0):
    """Cross-validate oracle, closed-form and finite-difference derivatives.

    Returns a list of :class:`DerivativeCheck` with the worst error over
    ``points``; oracle vs closed form is relative, finite differences absolute.
    """
    rng = np.random.default_rng(seed)
    worst = {}

    def record(name, err, tol):
        prev = worst.get(name)
        if prev is None or err > prev.error:
            worst[name] = DerivativeCheck(name, float(err), tol)

    for x in points:
        x = np.asarray(x, dtype=float)
        w = rng.standard_normal(x.size)
        g = full_gradient(p, x)
        hv = hess_vec(p, x, w)
        record("gradient_vs_fd", np.max(np.abs(g - fd_gradient(p, x, fd_grad_step))), 1e-4)
        hv_fd = fd_hess_vec(lambda z: full_gradient(p, z), x, w, fd_hess_step)
        record("hess_vec_vs_fd", np.max(np.abs(hv - hv_fd)), 1e-3)
        record("euler_identity", abs(grad_dot(p, x, x) + p.degree) / p.degree, 1e-8)
        if p.analytic is not None:
            ga = p.analytic.gradient(x)
            ha = p.analytic.hess_vec(x, w)
            record("gradient_vs_analytic", np.linalg.norm(g - ga) / np.linalg.norm(ga), 1e-8)
            record("hess_vec_vs_analytic", np.linalg.norm(hv - ha) / np.linalg.norm(ha), 1e-6)
    return list(worst.values())
