import numpy as np
import pytest

from quasifit import DataSet, ShapeSpec
from quasifit.errors import TooLarge
from quasifit.numeric import QPProblem, solve_qp
from quasifit.oracle import _MinMax, brute_force

from conftest import EX2_OPTIMA, close_to_any


def test_example_has_two_optima(ex2):
    res = brute_force(ex2)
    assert res.objective == pytest.approx(0.5)
    assert len(res.thetas) == 2
    for opt in EX2_OPTIMA:
        assert close_to_any(opt, res.thetas, 1e-9)


def test_two_point_pooling():
    res = brute_force(DataSet([[0.0], [1.0]], [0.0, 1.0]))
    np.testing.assert_allclose(res.theta, [0.5, 0.5])
    assert res.objective == pytest.approx(0.5)


def test_single_point():
    res = brute_force(DataSet([[0.3, 0.1]], [2.0]))
    assert res.objective == 0.0 and res.theta[0] == 2.0


def test_cap():
    data = DataSet(np.arange(12.0).reshape(6, 2), np.zeros(6))
    with pytest.raises(TooLarge):
        brute_force(data)
    with pytest.raises(TooLarge):
        brute_force(DataSet(np.arange(14.0).reshape(7, 2), np.zeros(7)), cap=7)


def test_permutation_invariance():
    rng = np.random.default_rng(4)
    X, y = rng.standard_normal((5, 2)), rng.standard_normal(5)
    perm = rng.permutation(5)
    a = brute_force(DataSet(X, y)).objective
    b = brute_force(DataSet(X[perm], y[perm])).objective
    assert a == pytest.approx(b, abs=1e-12)


def test_min_max_formula_matches_qp():
    rng = np.random.default_rng(8)
    for _ in range(30):
        n = 5
        y, w = rng.standard_normal(n), rng.uniform(0.5, 2, n)
        pairs = {(int(a), int(b)) for a, b in rng.integers(0, n, (4, 2)) if a != b}
        theta = _MinMax(y, w).fit(pairs)
        A = np.zeros((len(pairs), n))
        for r, (a, b) in enumerate(pairs):
            A[r, a], A[r, b] = 1.0, -1.0
        ref = solve_qp(QPProblem(Q=2 * w, c=-2 * w * y, A=A, b=np.zeros(len(pairs))))
        np.testing.assert_allclose(theta, ref.x, atol=1e-8)


def test_quasiconcave_by_negation(ex2):
    flipped = DataSet(ex2.X, -ex2.y)
    res = brute_force(flipped, ShapeSpec("quasiconcave", "increasing"))
    assert res.objective == pytest.approx(brute_force(ex2).objective)
