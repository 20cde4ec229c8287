"""Membership in convex hulls and their upper/lower orthants.

With ``orthant=+1`` the target set is Cv(S) + R^d_+ (every point that
dominates some convex combination of S), with ``orthant=-1`` it is
Cv(S) - R^d_+, and with ``orthant=0`` it is the plain hull Cv(S). All three
are closed, so boundary points count as members.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch
from .numeric import PHASE1_TOL, LPProblem, solve_lp

UPPER, LOWER, PLAIN = 1, -1, 0


def as_points(S, d=None) -> np.ndarray:
    """Coerce to an (m, d) float array; an empty input gives shape (0, d)."""
    S = np.asarray(S, dtype=float)
    if S.size == 0:
        return np.zeros((0, d if d is not None else 0))
    if S.ndim == 1:
        S = S.reshape(1, -1)
    if d is not None and S.shape[1] != d:
        raise DimensionMismatch(f"expected points of dimension {d}, got {S.shape[1]}")
    return S


def hull_weights(p, S, orthant: int = UPPER) -> np.ndarray | None:
    """Convex weights lambda with sum(lambda_i S_i) within the orthant of p.

    Returns None when p is not a member. The weights come from a basic
    feasible solution, so at most d + 1 of them are nonzero.
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    S = as_points(S, p.size)
    m, d = S.shape
    if m == 0:
        return None
    if orthant == UPPER:
        dom = np.flatnonzero(np.all(S <= p, axis=1))
        if dom.size:
            lam = np.zeros(m)
            lam[dom[0]] = 1.0
            return lam
        if np.any(p < S.min(axis=0) - PHASE1_TOL):
            return None
    elif orthant == LOWER:
        dom = np.flatnonzero(np.all(S >= p, axis=1))
        if dom.size:
            lam = np.zeros(m)
            lam[dom[0]] = 1.0
            return lam
        if np.any(p > S.max(axis=0) + PHASE1_TOL):
            return None
    else:
        same = np.flatnonzero(np.all(S == p, axis=1))
        if same.size:
            lam = np.zeros(m)
            lam[same[0]] = 1.0
            return lam
        if np.any(p < S.min(axis=0) - PHASE1_TOL) or np.any(p > S.max(axis=0) + PHASE1_TOL):
            return None
        if m == 1:
            return None

    # sum_i lam_i S_i + orthant * v = p,  sum lam = 1,  lam, v >= 0
    nv = d if orthant != PLAIN else 0
    A_eq = np.zeros((d + 1, m + nv))
    A_eq[:d, :m] = S.T
    if nv:
        A_eq[:d, m:] = orthant * np.eye(d)
    A_eq[d, :m] = 1.0
    b_eq = np.concatenate([p, [1.0]])
    res = solve_lp(LPProblem(np.zeros(m + nv), A_eq=A_eq, b_eq=b_eq))
    if not res.optimal:
        return None
    return np.clip(res.x[:m], 0.0, None)


def in_upper_hull(p, S) -> bool:
    return hull_weights(p, S, UPPER) is not None


def in_lower_hull(p, S) -> bool:
    return hull_weights(p, S, LOWER) is not None


def in_hull(p, S) -> bool:
    return hull_weights(p, S, PLAIN) is not None


def member(p, S, orthant: int) -> bool:
    return hull_weights(p, S, orthant) is not None


def minimal_support(p, S, orthant: int = UPPER, weights=None) -> list[int] | None:
    """Indices of an inclusion-minimal subset of S whose hull set contains p."""
    S = as_points(S, np.asarray(p).size)
    lam = hull_weights(p, S, orthant) if weights is None else weights
    if lam is None:
        return None
    support = [int(k) for k in np.flatnonzero(lam > 1e-12)]
    k = 0
    while k < len(support) and len(support) > 1:
        trial = support[:k] + support[k + 1:]
        if member(p, S[trial], orthant):
            support = trial
        else:
            k += 1
    return support


def separating_direction(p, S, orthant: int = UPPER, bound: float = 1.0):
    """Max-margin direction xi with xi.(s - p) >= margin for every s in S.

    xi is confined to [0, bound]^d (upper orthant), [-bound, 0]^d (lower) or
    [-bound, bound]^d (plain hull). Returns ``(margin, xi)``; a positive
    margin certifies that p lies outside the corresponding hull set. With S
    empty the margin is +inf and xi = 0.
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    S = as_points(S, p.size)
    d = p.size
    if S.shape[0] == 0:
        return np.inf, np.zeros(d)
    lo = {UPPER: 0.0, LOWER: -bound, PLAIN: -bound}[orthant]
    hi = {UPPER: bound, LOWER: 0.0, PLAIN: bound}[orthant]
    # variables (xi, t): maximize t  s.t.  t - xi.(s - p) <= 0
    diff = S - p
    A_ub = np.hstack([-diff, np.ones((S.shape[0], 1))])
    c = np.zeros(d + 1)
    c[-1] = -1.0
    res = solve_lp(LPProblem(c, A_ub=A_ub, b_ub=np.zeros(S.shape[0]),
                             lo=np.r_[np.full(d, lo), -np.inf],
                             hi=np.r_[np.full(d, hi), np.inf]))
    if not res.optimal:  # pragma: no cover - the box keeps this LP bounded
        return -np.inf, np.zeros(d)
    xi = res.x[:d]
    return float(np.min(diff @ xi)), xi
