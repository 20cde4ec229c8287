import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog, minimize

from quasifit.numeric import LPProblem, QPProblem, Status, kkt_residual, solve_lp, solve_qp


def test_lp_empty_box_is_infeasible():
    res = solve_lp(LPProblem(c=[0.0], lo=[0.0], A_ub=[[1.0]], b_ub=[-1.0]))
    assert res.status is Status.INFEASIBLE


def test_lp_separation_of_example_points_is_infeasible():
    d = 1e-6
    A = -np.array([[0.25, -0.75], [-0.75, 0.25]])
    res = solve_lp(LPProblem(c=[0.0, 0.0], A_ub=A, b_ub=[-d, -d]))
    assert res.status is Status.INFEASIBLE


def test_lp_bounded_maximum():
    res = solve_lp(LPProblem(c=[-1.0], A_ub=[[1.0]], b_ub=[3.0]))
    assert res.optimal and res.x[0] == pytest.approx(3.0)


def test_lp_unbounded():
    res = solve_lp(LPProblem(c=[-1.0, 0.0], A_ub=[[0.0, 1.0]], b_ub=[1.0]))
    assert res.status is Status.UNBOUNDED


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 5), m=st.integers(1, 6))
def test_lp_matches_scipy(seed, n, m):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(n)
    A = rng.standard_normal((m, n))
    b = rng.standard_normal(m) + 0.5
    lo, hi = -2.0, 2.0
    ours = solve_lp(LPProblem(c, A_ub=A, b_ub=b, lo=lo, hi=hi))
    ref = linprog(c, A_ub=A, b_ub=b, bounds=[(lo, hi)] * n, method="highs")
    assert ours.optimal == (ref.status == 0)
    if ref.status == 0:
        assert ours.objective == pytest.approx(ref.fun, abs=1e-7)
        assert np.all(A @ ours.x <= b + 1e-8)


def test_lp_equality_constraints():
    # minimize x + 2y with x + y = 1, x, y >= 0
    res = solve_lp(LPProblem([1.0, 2.0], A_eq=[[1.0, 1.0]], b_eq=[1.0]))
    np.testing.assert_allclose(res.x, [1.0, 0.0], atol=1e-12)


def test_qp_clipped_scalar():
    res = solve_qp(QPProblem(Q=[2.0], c=[-2.0], A=[[1.0]], b=[0.0], const=1.0))
    assert res.x[0] == pytest.approx(0.0, abs=1e-12)
    assert res.objective == pytest.approx(1.0)


@pytest.mark.parametrize("row, expected", [
    ([-1.0, 1.0, 0.0], [0.5, 0.5, 0.0]),  # z2 <= z1
    ([0.0, 1.0, -1.0], [0.0, 0.5, 0.5]),  # z2 <= z3
])
def test_qp_halfspace_projection(row, expected):
    y = np.array([0.0, 1.0, 0.0])
    res = solve_qp(QPProblem(Q=2 * np.ones(3), c=-2 * y, A=[row], b=[0.0], const=1.0))
    np.testing.assert_allclose(res.x, expected, atol=1e-12)
    assert res.objective == pytest.approx(0.5)


def _random_qp(rng, n, m):
    Q = rng.uniform(0.5, 2.0, n)
    c = rng.standard_normal(n)
    A = rng.standard_normal((m, n))
    b = rng.uniform(0.0, 1.0, m)
    return QPProblem(Q=Q, c=c, A=A, b=b, lo=-3.0, hi=3.0)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 6), m=st.integers(0, 8))
def test_qp_matches_scipy_and_kkt(seed, n, m):
    rng = np.random.default_rng(seed)
    p = _random_qp(rng, n, m)
    res = solve_qp(p)
    assert res.optimal  # x = 0 is feasible by construction
    assert kkt_residual(p, res) < 1e-7
    cons = [{"type": "ineq", "fun": lambda x, r=r, bb=bb: bb - r @ x} for r, bb in zip(p.A, p.b)]
    ref = minimize(p.objective, np.zeros(n), method="SLSQP", constraints=cons,
                   bounds=[(-3.0, 3.0)] * n, options={"ftol": 1e-12, "maxiter": 500})
    assert res.objective <= ref.fun + 1e-7


def test_qp_local_perturbations_never_improve():
    rng = np.random.default_rng(3)
    p = _random_qp(rng, 5, 6)
    res = solve_qp(p)
    base = p.objective(res.x)
    tried = 0
    while tried < 100:
        v = res.x + 0.05 * rng.standard_normal(5)
        if np.all(p.A @ v <= p.b) and np.all(np.abs(v) <= 3.0):
            assert base <= p.objective(v) + 1e-8
            tried += 1


def test_qp_warm_start_gives_same_answer():
    rng = np.random.default_rng(5)
    p = _random_qp(rng, 6, 8)
    cold = solve_qp(p)
    warm = solve_qp(p, active_set=cold.active)
    np.testing.assert_allclose(warm.x, cold.x, atol=1e-10)
    assert warm.iterations <= cold.iterations


def test_qp_full_matrix_hessian():
    Q = np.array([[2.0, 0.5], [0.5, 1.0]])
    c = np.array([-1.0, -1.0])
    res = solve_qp(QPProblem(Q=Q, c=c, A=[[1.0, 1.0]], b=[0.5]))
    ref = minimize(lambda x: 0.5 * x @ Q @ x + c @ x, np.zeros(2), method="SLSQP",
                   constraints=[{"type": "ineq", "fun": lambda x: 0.5 - x.sum()}])
    np.testing.assert_allclose(res.x, ref.x, atol=1e-6)


def test_qp_infeasible_constraints():
    res = solve_qp(QPProblem(Q=[2.0], c=[0.0], A=[[1.0], [-1.0]], b=[-1.0, -1.0]))
    assert res.status is Status.INFEASIBLE


def test_deterministic():
    rng = np.random.default_rng(9)
    p = _random_qp(rng, 6, 8)
    a, b = solve_qp(p), solve_qp(p)
    assert np.array_equal(a.x, b.x)
