import json

import numpy as np
import pytest

from hypersolve.errors import CapabilityError, InitializationError, InputError
from hypersolve.polynomials import PolynomialSpec, sym_pack
from hypersolve.problems import (
    HyperbolicProgram,
    SDP3_C,
    brute_force_reference,
    dumps,
    fixtures,
    from_lp,
    from_sdp,
    load,
    loads,
    random_lp,
    save,
    sdp_vectorize,
    validate,
)


def failed(hp):
    return {c["name"] for c in validate(hp) if not c["passed"]}


def test_from_lp():
    hp = from_lp([[1, 1]], [2], [1, 0], [1, 1])
    assert hp.polynomial().degree == 2
    np.testing.assert_array_equal(hp.polynomial().direction, [1, 1])
    with pytest.raises(InitializationError, match="e0_interior"):
        from_lp([[1, 1]], [2], [1, 0], [2, 0])
    with pytest.raises(InitializationError, match="e0_feasible"):
        from_lp([[1, 1]], [2], [1, 0], [1, 2])


def test_validate_names_each_violation():
    base = fixtures()["lp"]
    assert failed(base) == set()
    rank_def = HyperbolicProgram([[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]], [3.0, 6.0], [1.0, 0.0, 0.0],
                                 PolynomialSpec("product", n=3), np.ones(3))
    assert "full_row_rank" in failed(rank_def)
    in_row = HyperbolicProgram(base.A, base.b, base.A[0], base.poly, base.e0)
    assert "c_not_in_row_space" in failed(in_row)
    zero_b = HyperbolicProgram([[1.0, -1.0]], [0.0], [1.0, 0.0], base.poly, np.ones(2))
    assert "b_nonzero" in failed(zero_b)
    wrong_dim = HyperbolicProgram(base.A, base.b, [1.0, 0.0, 0.0], base.poly, base.e0)
    assert "dimensions" in failed(wrong_dim)


def test_sdp_vectorization_is_adjoint_consistent(rng):
    k = 3
    C = rng.standard_normal((k, k))
    C = C + C.T
    Ai = rng.standard_normal((k, k))
    Ai = Ai + Ai.T
    A, c = sdp_vectorize([Ai], C, k)
    for _ in range(10):
        X = rng.standard_normal((k, k))
        X = X + X.T
        x = sym_pack(X)
        assert c @ x == pytest.approx(np.trace(C @ X), rel=1e-12, abs=1e-12)
        assert A[0] @ x == pytest.approx(np.trace(Ai @ X), rel=1e-12, abs=1e-12)


def test_from_sdp_errors():
    with pytest.raises(InputError):
        from_sdp([np.eye(2)], [1.0], np.array([[1.0, 2.0], [0.0, 1.0]]), np.eye(2) / 2)
    with pytest.raises(InitializationError):
        from_sdp([np.eye(2)], [1.0], np.diag([1.0, 3.0]), np.diag([1.0, 0.0]))


def test_sdp_with_identity_objective_violates_row_space_assumption():
    # tr(I X) is constant on tr(X) = 1, so c lies in the row space of A
    with pytest.raises(InitializationError, match="c_not_in_row_space"):
        from_sdp([np.eye(2)], [1.0], np.eye(2), np.eye(2) / 2)


def test_references():
    fx = fixtures()
    assert brute_force_reference(fx["lp"]) == pytest.approx(0.0, abs=1e-12)
    assert brute_force_reference(fx["sdp2"]) == pytest.approx(1.0)
    assert brute_force_reference(fx["sdp3"]) == pytest.approx(np.linalg.eigvalsh(SDP3_C)[0])
    assert brute_force_reference(fx["socp"]) == pytest.approx(0.5, abs=1e-6)
    bad = HyperbolicProgram([[1.0, 1.0]], [1.0], [1.0, 0.0],
                            PolynomialSpec("sparse-monomial", terms=((1.0, (1, 1)),), direction=(1.0, 1.0)),
                            [0.5, 0.5])
    with pytest.raises(CapabilityError):
        brute_force_reference(bad)


def test_save_load_roundtrip(tmp_path):
    for name, hp in fixtures().items():
        path = tmp_path / f"{name}.json"
        save(hp, path)
        back = load(path)
        assert back.to_dict() == hp.to_dict()
        assert back.A.tobytes() == hp.A.tobytes()
    hp = random_lp(6, 2, np.random.default_rng(0))
    assert loads(dumps(hp)).c.tobytes() == hp.c.tobytes()


def test_parse_diagnostics():
    with pytest.raises(InputError, match=r"p\.json:2:"):
        loads('{"format": 1,\n "A": [[1, 2]', source="p.json")
    good = json.loads(dumps(fixtures()["lp"]))
    for key, broken, message in [
        ("format", 2, "format"),
        ("b", [1.0, 2.0], "b: length"),
        ("c", "abc", "c:"),
        ("A", [1.0, 2.0], "A:"),
    ]:
        data = dict(good)
        data[key] = broken
        with pytest.raises(InputError, match=message):
            loads(json.dumps(data))
    data = dict(good)
    del data["e0"]
    with pytest.raises(InputError, match="e0"):
        loads(json.dumps(data))
    data = dict(good)
    data["options"] = {"alpha": 0.1, "colour": "red"}
    with pytest.raises(InputError, match="colour"):
        loads(json.dumps(data))


def test_random_lp_is_valid_and_bounded():
    for seed in range(5):
        hp = random_lp(8, 3, np.random.default_rng(seed))
        assert failed(hp) == set()
        np.testing.assert_allclose(hp.A @ hp.A.T, np.eye(3), atol=1e-12)
        assert np.isfinite(brute_force_reference(hp))
