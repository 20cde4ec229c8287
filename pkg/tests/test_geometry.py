import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from quasifit.errors import DimensionMismatch
from quasifit.geometry import (LOWER, PLAIN, UPPER, hull_weights, in_hull, in_lower_hull,
                               in_upper_hull, member, minimal_support, separating_direction)

E1, E2 = [1.0, 0.0], [0.0, 1.0]


@pytest.mark.parametrize("fn, p, S, expected", [
    (in_upper_hull, [1, 1], [[0, 0]], True),
    (in_upper_hull, [0, 0], [E1, E2], False),
    (in_upper_hull, [0.75, 0.75], [E1, E2], True),
    (in_lower_hull, [0, 0], [[1, 1]], True),
    (in_lower_hull, [1, 1], [E1, E2], False),
    (in_lower_hull, [0.25, 0.25], [E1, E2], True),
    (in_hull, [0.5, 0.5], [E1, E2], True),
    (in_hull, [0.75, 0.75], [E1, E2], False),
])
def test_examples(fn, p, S, expected):
    assert fn(p, S) is expected


def test_member_of_set_is_in_hull():
    S = np.random.default_rng(0).standard_normal((5, 3))
    assert all(in_hull(s, S) for s in S)


def test_empty_set_contains_nothing():
    assert not in_upper_hull([0.0, 0.0], np.zeros((0, 2)))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        in_hull([0.0, 0.0, 0.0], [E1, E2])


def _scipy_member(p, S, orthant):
    # sum lam = 1, lam >= 0, S^T lam <= p (upper), >= p (lower), == p (plain)
    k = len(S)
    A = np.asarray(S, dtype=float).T
    A_eq = [np.ones(k)]
    b_eq = [1.0]
    A_ub = b_ub = None
    if orthant == PLAIN:
        A_eq = np.vstack([A_eq, A])
        b_eq = np.r_[b_eq, p]
    else:
        A_ub, b_ub = (A, p) if orthant == UPPER else (-A, -np.asarray(p))
    r = linprog(np.zeros(k), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, method="highs")
    return r.status == 0


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10**6), k=st.integers(1, 6), d=st.integers(1, 3),
       orthant=st.sampled_from([UPPER, LOWER, PLAIN]))
def test_agrees_with_scipy(seed, k, d, orthant):
    rng = np.random.default_rng(seed)
    S = rng.standard_normal((k, d))
    p = rng.standard_normal(d) * 0.7
    assert member(p, S, orthant) == _scipy_member(p, S, orthant)


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 10**6), k=st.integers(1, 5), d=st.integers(1, 3))
def test_upper_hull_properties(seed, k, d):
    rng = np.random.default_rng(seed)
    S = rng.standard_normal((k, d))
    T = np.vstack([S, rng.standard_normal((2, d))])
    p = rng.standard_normal(d)
    q = p + rng.uniform(0, 1, d)
    if in_upper_hull(p, S):
        assert in_upper_hull(q, S)
        assert in_upper_hull(p, T)
    if in_hull(p, S):
        assert in_upper_hull(p, S) and in_lower_hull(p, S)
    assert in_lower_hull(p, S) == in_upper_hull(-p, -S)


def test_weights_certify_membership():
    S = np.array([E1, E2, [2.0, 2.0]])
    lam = hull_weights([0.75, 0.75], S, UPPER)
    assert lam is not None and lam.sum() == pytest.approx(1.0)
    assert np.all(lam @ S <= np.array([0.75, 0.75]) + 1e-9)


def test_minimal_support_is_small_and_still_contains_point():
    rng = np.random.default_rng(1)
    S = rng.uniform(0, 1, (12, 2))
    p = np.array([0.9, 0.9])
    sup = minimal_support(p, S, UPPER)
    assert sup is not None and len(sup) <= 3
    assert in_upper_hull(p, S[sup])


def test_separating_direction_signs_and_margin():
    S = np.array([[1.0, 0.5], [0.6, 1.0]])
    p = np.array([0.2, 0.1])
    margin, xi = separating_direction(p, S, UPPER)
    assert margin > 0 and np.all(xi >= 0) and np.all(xi <= 1)
    assert np.all((S - p) @ xi >= margin - 1e-12)
    # a point inside the upper hull cannot be separated
    margin, _ = separating_direction(np.array([0.9, 0.9]), S, UPPER)
    assert margin <= 1e-12
