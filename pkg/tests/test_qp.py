import numpy as np
import pytest

from conftest import swath_instance
from hypersolve.calculus import derivatives
from hypersolve.errors import AssumptionError, InputError, NumericalFailure
from hypersolve.polynomials import lorentz_polynomial, product_polynomial
from hypersolve.qp import (
    QpProblem,
    cone_check,
    dual_from_primal,
    numerical_rank,
    solution_residuals,
    solve_qp,
)


def lp_problem(alpha=0.1):
    p = product_polynomial(2)
    e = np.ones(2)
    g, H = derivatives(p, e)
    return QpProblem([[1.0, 1.0]], [2.0], [1.0, 0.0], e, g, H, alpha, 2)


def independent_lp_solution(alpha):
    # x = (t, 2 - t) at e = (1, 1): g = -(1, 1), H = I, so the boundary is
    # 4 = alpha^2 (t^2 + (2 - t)^2); keep the root with the smaller objective t
    roots = np.roots([2 * alpha**2, -4 * alpha**2, 4 * alpha**2 - 4])
    t = min(r.real for r in roots if abs(r.imag) < 1e-12)
    return np.array([t, 2.0 - t])


def test_lp_example():
    q = lp_problem()
    sol = solve_qp(q)
    np.testing.assert_allclose(sol.x_e, independent_lp_solution(0.1), rtol=1e-12)
    assert q.c @ sol.x_e < 1.0
    res = solution_residuals(q, sol)
    for key in ("primal_feasibility", "boundary", "complementarity", "strong_duality", "gap_identity",
                "dual_feasibility"):
        assert res[key] <= 1e-10, key
    assert res["cone_side"] > 0.0


def test_dual_identities():
    q = lp_problem()
    sol = solve_qp(q)
    x, e, H = sol.x_e, q.e, q.H
    assert e @ sol.s_dual == pytest.approx(q.c @ (e - x), rel=1e-10)
    assert x @ sol.s_dual == pytest.approx(0.0, abs=1e-10)
    u = e - q.alpha**2 * x / (e @ H @ x)
    assert u @ H @ u == pytest.approx(q.degree - q.alpha**2, rel=1e-10)
    # multiplier from the closed form agrees with the KKT solve
    assert sol.lambda_mult == pytest.approx(sol.lambda_kkt, rel=1e-8)
    y, s, lam = dual_from_primal(q, x)
    np.testing.assert_allclose(y, sol.y_dual, rtol=1e-8)


def test_random_instances_satisfy_contract():
    rng = np.random.default_rng(7)
    for _ in range(30):
        inst = swath_instance(rng)
        q = QpProblem(inst["A"], inst["b"], inst["c"], inst["e"], inst["g"], inst["H"], 0.1, inst["p"].degree)
        sol = solve_qp(q)
        res = solution_residuals(q, sol)
        assert max(v for k, v in res.items() if k != "cone_side") <= 1e-8
        assert cone_check(q, sol.x_e).margin == pytest.approx(0.0, abs=1e-8 * np.sqrt(sol.x_e @ q.H @ sol.x_e))


def test_assumption_violations():
    p = product_polynomial(3)
    e = np.ones(3)
    g, H = derivatives(p, e)
    with pytest.raises(AssumptionError):
        QpProblem([[1.0, 1.0, 1.0]], [3.0], [1.0, 1.0, 1.0], e, g, H, 0.1, 3)  # c in row space
    with pytest.raises(AssumptionError):
        QpProblem([[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]], [3.0, 6.0], [1.0, 0.0, 0.0], e, g, H, 0.1, 3)
    with pytest.raises(AssumptionError):
        QpProblem([[1.0, -1.0, 0.0]], [0.0], [1.0, 0.0, 0.0], e, g, H, 0.1, 3)  # b = 0
    with pytest.raises(AssumptionError):
        QpProblem([[1.0, 1.0, 1.0]], [4.0], [1.0, 0.0, 0.0], e, g, H, 0.1, 3)  # A e != b
    with pytest.raises(InputError):
        QpProblem([[1.0, 1.0, 1.0]], [3.0], [1.0, 0.0, 0.0], e, g, H, 1.5, 3)


def test_unbounded_relaxation_is_reported():
    # e = (1, 1, 1) is far from the analytic center of x1 = 1: null(A) meets K_e(alpha)
    p = product_polynomial(3)
    e = np.ones(3)
    g, H = derivatives(p, e)
    q = QpProblem([[1.0, 0.0, 0.0]], [1.0], [0.0, 1.0, -1.0], e, g, H, 0.1, 3)
    with pytest.raises(NumericalFailure, match="swath"):
        solve_qp(q)


def test_rank():
    assert numerical_rank(np.array([[1.0, 2.0], [2.0, 4.0]])) == 1
    assert numerical_rank(np.eye(3)) == 3


def test_cone_check_examples():
    q = lp_problem()
    rep = cone_check(q, q.e, p=product_polynomial(2))
    assert rep.margin == pytest.approx(2.0 - 0.1 * np.sqrt(2.0))
    assert rep.in_quadratic_cone and rep.in_hyperbolic_cone


def test_hyperbolic_cone_inside_quadratic_cone():
    rng = np.random.default_rng(9)
    for p in (product_polynomial(4), lorentz_polynomial(4)):
        e = p.direction + 0.2 * np.abs(rng.standard_normal(4))
        g, H = derivatives(p, e)
        q = QpProblem(np.atleast_2d(H @ e), [e @ H @ e], rng.standard_normal(4), e, g, H, 0.5, p.degree)
        d = p.degree
        hits = 0
        while hits < 200:
            x = rng.standard_normal(4) * 3.0
            lam = p.analytic.eigenvalues(x, p.direction)
            if lam[-1] > 0.0:
                hits += 1
                assert cone_check(q, x, alpha=1.0).margin >= -1e-10
            if cone_check(q, x, alpha=np.sqrt(d - 1.0)).margin >= 0.0:
                assert lam[-1] >= -1e-8
