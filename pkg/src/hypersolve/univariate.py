"""Univariate restrictions t -> p(x + t e), hyperbolic eigenvalues and their moments.

The restriction is recovered from d + 1 oracle calls: p(x) and the values
p(x + r w^k e), k = 1..d, on the circle of radius r (w a primitive d-th root
of unity).  An inverse DFT of length d, normalised by 1/d, returns the scaled
coefficients a_j r^j for j = 1..d.

With p(te - x) = p(e) prod_j (t - lambda_j) we get
p(x + te) = p(e) prod_j (t + lambda_j): the restriction's roots are the
negated eigenvalues and a_{d-k} / a_d is the k-th elementary symmetric
function of the eigenvalues.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateDirectionError, NotHyperbolicError


@dataclass(frozen=True)
class UnivariateRestriction:
    """Coefficients a_0..a_d of t -> p(x + t e) (lowest degree first)."""

    coeffs: np.ndarray
    x: np.ndarray
    e: np.ndarray

    @property
    def degree(self):
        return self.coeffs.size - 1

    def __call__(self, t):
        return np.polynomial.polynomial.polyval(t, self.coeffs)

    def to_dict(self):
        return {"coeffs": self.coeffs.tolist(), "x": self.x.tolist(), "e": self.e.tolist()}


@dataclass(frozen=True)
class EigenMoments:
    """Power sums s_k = sum_j lambda_j^k, k = 1..4."""

    s1: float
    s2: float
    s3: float
    s4: float

    def as_array(self):
        return np.array([self.s1, self.s2, self.s3, self.s4])


def roots_of_unity(d):
    return np.exp(2j * np.pi * np.arange(1, d + 1) / d)


def interpolate_coefficients(p0, values):
    """Scaled coefficients (c_1..c_d) from values f_k = q(w^k), k = 1..d.

    ``q`` is a degree-d polynomial with q(0) = p0; returns c_j for
    q(z) = p0 + sum_j c_j z^j.
    """
    d = values.size
    # index k = d lands on slot 0 since w^d = 1
    shifted = np.roll(values - p0, 1)
    # np.fft.fft uses exp(-2 pi i jk / d), i.e. the inverse-DFT kernel w^{-jk} here
    spectrum = np.fft.fft(shifted) / d
    return np.concatenate([spectrum[1:], spectrum[:1]])


def _restrict_scaled(p, x, e, radius):
    """Coefficients c_j = a_j radius^j of t -> p(x + t e); d + 1 oracle calls."""
    d = p.degree
    x = np.asarray(x, dtype=float)
    e = np.asarray(e, dtype=float)
    pts = x[None, :] + radius * roots_of_unity(d)[:, None] * e[None, :]
    values = p.evaluate_many(pts)
    p0 = p.evaluate(x)
    scaled = np.empty(d + 1, dtype=complex)
    scaled[0] = p0
    scaled[1:] = interpolate_coefficients(p0, values)
    scale = max(float(np.max(np.abs(values))), abs(p0))
    if abs(scaled[-1]) <= 1e-14 * scale or scaled[-1] == 0.0:
        raise DegenerateDirectionError(
            f"leading coefficient {abs(scaled[-1]):.3e} is negligible against "
            f"sample magnitude {scale:.3e}; p(e) is (numerically) zero"
        )
    return scaled.real


def restrict(p, x, e, radius=1.0):
    """Recover the restriction t -> p(x + t e) from d + 1 oracle calls.

    ``radius`` sets the interpolation circle; the returned coefficients are
    independent of it up to rounding.
    """
    x = np.asarray(x, dtype=float)
    e = np.asarray(e, dtype=float)
    scaled = _restrict_scaled(p, x, e, radius)
    coeffs = scaled / radius ** np.arange(p.degree + 1)
    return UnivariateRestriction(coeffs, x.copy(), e.copy())


def power_sums_from_coefficients(scaled, d):
    """Newton identities: power sums of the eigenvalues, scaled by 1/radius^k.

    ``scaled`` holds a_j radius^j, j = 0..d.
    """
    lead = scaled[d]
    elem = [scaled[d - k] / lead if k <= d else 0.0 for k in range(1, 5)]
    e1, e2, e3, e4 = elem
    s1 = e1
    s2 = e1 * s1 - 2.0 * e2
    s3 = e1 * s2 - e2 * s1 + 3.0 * e3
    s4 = e1 * s3 - e2 * s2 + e3 * s1 - 4.0 * e4
    return np.array([s1, s2, s3, s4])


def _initial_radius(x, e, d):
    nx = float(np.linalg.norm(x))
    ne = float(np.linalg.norm(e))
    return np.sqrt(d) * nx / ne if nx > 0.0 and ne > 0.0 else 1.0


def moments(p, x, e, scale=None):
    """First four power sums of the eigenvalues of x in direction e.

    ``scale`` is a rough magnitude for sum_j |lambda_j|; the interpolation
    circle uses it as radius so that the top five coefficients are resolved
    to full precision.  A good value is sqrt(d * ||x||_e^2).  When omitted it
    is estimated from a first pass (costing another d + 1 calls per pass).
    """
    d = p.degree
    if scale is not None and scale > 0.0:
        sums = power_sums_from_coefficients(_restrict_scaled(p, x, e, scale), d)
        r = scale
    else:
        r = _initial_radius(x, e, d)
        for _ in range(4):
            sums = power_sums_from_coefficients(_restrict_scaled(p, x, e, r), d)
            estimate = r * np.sqrt(d * abs(sums[1]))
            if not np.isfinite(estimate) or estimate == 0.0 or 0.5 <= estimate / r <= 2.0:
                break
            r = estimate
    sums = sums * r ** np.arange(1, 5)
    return EigenMoments(*(float(s) for s in sums))


def restriction_roots(coeffs):
    """All complex roots of sum_j coeffs[j] t^j via the companion matrix."""
    coeffs = np.asarray(coeffs, dtype=float)
    monic = coeffs[::-1] / coeffs[-1]
    if monic.size == 1:
        return np.zeros(0, dtype=complex)
    # LAPACK geev balances the companion matrix before the QR iteration
    return np.linalg.eigvals(scipy.linalg.companion(monic))


def eigenvalues(p, x, e, imag_tol=1e-7):
    """Hyperbolic eigenvalues of x in direction e, sorted descending.

    The restriction is re-centred at the mean eigenvalue mu and interpolated
    on a circle whose radius is the eigenvalue spread, so the companion matrix
    sees roots of unit size.  This keeps degree ~30 restrictions with spread
    roots accurate; beyond that the root problem itself is ill-conditioned.
    Raises NotHyperbolicError when a root carries an imaginary part above
    ``imag_tol * (1 + |root|)``; ``imag_tol=None`` skips that test and returns
    real parts (for callers that already trust hyperbolicity, where clustered
    roots would otherwise split into spurious complex pairs).
    """
    d = p.degree
    x = np.asarray(x, dtype=float)
    e = np.asarray(e, dtype=float)
    m = moments(p, x, e)
    mu = m.s1 / d
    var = m.s2 / d - mu * mu
    if imag_tol is not None and var < -imag_tol * (mu * mu + abs(m.s2) / d):
        # real roots cannot have negative variance
        raise NotHyperbolicError(
            f"eigenvalue variance {var:.3e} is negative; p is not hyperbolic along this line"
        )
    spread = np.sqrt(max(var, 0.0))
    if spread <= 1e-7 * abs(mu):
        # sum_j (lambda_j - mu)^2 = d * spread^2, so every eigenvalue is mu to working accuracy
        return np.full(d, mu)
    scaled = _restrict_scaled(p, x - mu * e, e, spread)
    roots = mu - restriction_roots(scaled) * spread
    resid = np.abs(roots.imag) / (1.0 + np.abs(roots))
    if imag_tol is not None and resid.size and resid.max() > imag_tol:
        raise NotHyperbolicError(
            f"restriction has a root with relative imaginary part {resid.max():.3e} "
            f"(> {imag_tol:.1e}); p is not hyperbolic along this line"
        )
    return np.sort(roots.real)[::-1]


def min_eigenvalue(p, x, e, imag_tol=1e-7):
    """Smallest eigenvalue; x is interior to the cone iff this is positive."""
    return float(eigenvalues(p, x, e, imag_tol=imag_tol)[-1])


def sample_interior(p, center, count, rng, spread=0.5, depth=0.5):
    """``count`` random points strictly inside the cone around ``center``.

    Each point is center + r z with z Gaussian scaled to ||center||; r starts
    at ``spread`` and is halved until the point's smallest eigenvalue is at
    least ``depth`` times the center's.
    """
    center = np.asarray(center, dtype=float)
    e = p.direction

    def lam_min(x):
        if p.analytic is not None:
            return float(p.analytic.eigenvalues(x, e)[-1])
        return min_eigenvalue(p, x, e)

    floor = depth * lam_min(center)
    if not floor > 0.0:
        raise DegenerateDirectionError("center is not interior to the cone")
    scale = float(np.linalg.norm(center))
    out = []
    for _ in range(count):
        z = rng.standard_normal(center.size)
        z *= scale / np.linalg.norm(z)
        r = spread
        while True:
            x = center + r * z
            if lam_min(x) >= floor:
                break
            r *= 0.5
        out.append(x)
    return out
