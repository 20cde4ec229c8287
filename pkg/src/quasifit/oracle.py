"""Brute-force least-squares fit for tiny problems.

Enumerates the binary indicators column by column: for point j, the set
U_j = {i : u_ij = 1} is admissible when some sign-constrained xi_j in a
box has xi_j.(X_i - X_j) >= delta for all i in U_j. Only inclusion-maximal admissible
sets matter (a larger U_j drops order constraints, so it can only lower the
objective). For every combination the order constraints z_j <= z_i
(i not in U_j) define a weighted isotonic problem, which is solved by the
min-max formula over upper and lower sets instead of a QP solver.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .data import DataSet
from .errors import TooLarge
from .numeric import LPProblem, solve_lp
from .shape import ShapeSpec

DEFAULT_CAP = 5
HARD_CAP = 6


@dataclass
class OracleResult:
    objective: float
    thetas: list = field(default_factory=list)
    assignments: list = field(default_factory=list)

    @property
    def theta(self) -> np.ndarray:
        return self.thetas[0]


def _admissible(X, j, members, sign, delta, bound):
    """Is max_xi min_i xi.(X_i - X_j) >= delta over the signed box?

    Deciding on the optimal margin rather than on phase-1 feasibility keeps
    delta meaningful below the simplex infeasibility threshold.
    """
    if not members:
        return True
    d = X.shape[1]
    diff = X[list(members)] - X[j]
    lo = {1: 0.0, -1: -bound, 0: -bound}[sign]
    hi = {1: bound, -1: 0.0, 0: bound}[sign]
    # variables (xi, t): maximize t subject to t <= xi.diff_i
    A_ub = np.hstack([-diff, np.ones((len(members), 1))])
    c = np.zeros(d + 1)
    c[-1] = -1.0
    res = solve_lp(LPProblem(c, A_ub=A_ub, b_ub=np.zeros(len(members)),
                             lo=np.r_[np.full(d, lo), -np.inf], hi=np.r_[np.full(d, hi), np.inf]))
    return res.optimal and -res.objective >= delta


def _maximal_sets(X, j, sign, delta, bound):
    n = X.shape[0]
    others = [i for i in range(n) if i != j]
    feasible = []
    for r in range(len(others), -1, -1):
        for combo in itertools.combinations(others, r):
            s = frozenset(combo)
            if any(s < f for f in feasible):
                continue
            if _admissible(X, j, combo, sign, delta, bound):
                feasible.append(s)
    return [s for s in feasible if not any(s < f for f in feasible)]


class _MinMax:
    """Weighted isotonic regression on a preorder by enumerating level sets."""

    def __init__(self, y, w):
        n = y.size
        self.n = n
        masks = np.arange(1 << n)
        bits = (masks[:, None] >> np.arange(n)) & 1
        self.bits = bits.astype(bool)
        self.wsum = bits @ w
        self.ysum = bits @ (w * y)

    def fit(self, le_pairs):
        """``le_pairs``: (a, b) meaning z_a <= z_b."""
        bits = self.bits
        upper = np.ones(bits.shape[0], dtype=bool)
        lower = np.ones(bits.shape[0], dtype=bool)
        for a, b in le_pairs:
            upper &= ~bits[:, a] | bits[:, b]
            lower &= ~bits[:, b] | bits[:, a]
        U = np.flatnonzero(upper)
        L = np.flatnonzero(lower)
        inter = U[:, None] & L[None, :]
        ws = self.wsum[inter]
        with np.errstate(invalid="ignore", divide="ignore"):
            av = np.where(ws > 0, self.ysum[inter] / ws, np.nan)
        theta = np.empty(self.n)
        for x in range(self.n):
            rows = bits[U, x]
            cols = bits[L, x]
            sub = av[np.ix_(rows, cols)]
            theta[x] = np.max(np.min(sub, axis=1))
        return theta


def brute_force(data: DataSet, shape: ShapeSpec = ShapeSpec(), gamma: float | None = None,
                delta: float = 1e-9, bound: float = 1.0, cap: int = DEFAULT_CAP,
                rtol: float = 1e-9) -> OracleResult:
    """Exact fit by enumeration; raises TooLarge when n exceeds ``cap``."""
    n = data.n
    if n > min(cap, HARD_CAP):
        raise TooLarge(f"brute force is limited to n <= {min(cap, HARD_CAP)}, got n = {n}")
    X, w = data.X, data.w
    flip = 1.0 if shape.is_convex else -1.0
    base = shape if shape.is_convex else shape.negated()
    sign = {"decreasing": 1, "increasing": -1, "none": 0}[base.monotone]
    y = flip * data.y
    g = float(np.max(np.abs(y))) if gamma is None else float(gamma)

    columns = [_maximal_sets(X, j, sign, delta, bound) for j in range(n)]
    solver = _MinMax(y, w)
    best, thetas, assigns = np.inf, [], []
    seen = {}
    for combo in itertools.product(*columns):
        pairs = frozenset((j, i) for j in range(n) for i in range(n)
                          if i != j and i not in combo[j])
        if pairs in seen:
            theta = seen[pairs]
        else:
            theta = np.clip(solver.fit(pairs), -g, g)
            seen[pairs] = theta
        obj = float(np.sum(w * (y - theta) ** 2))
        u = np.zeros((n, n), dtype=int)
        for j in range(n):
            for i in combo[j]:
                u[i, j] = 1
        tol = rtol * max(1.0, abs(best)) if np.isfinite(best) else 0.0
        if obj < best - tol:
            best, thetas, assigns = obj, [theta], [u]
        elif abs(obj - best) <= tol:
            if not any(np.allclose(theta, t, atol=1e-9) for t in thetas):
                thetas.append(theta)
            assigns.append(u)
    return OracleResult(best, [flip * t for t in thetas], assigns)
