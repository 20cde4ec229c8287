"""Big-M mixed-integer QP for the shape-restricted least-squares fit.

Variables are the fitted values z, one separating vector xi_j per point and
binaries u_ij (i != j). u_ij = 0 forces z_j <= z_i; u_ij = 1 instead asks
xi_j to separate X_j from X_i with margin eps. For M above the validity
thresholds checked in :func:`build_model`, relaxing a free u_ij to [0, 1]
switches both of its constraints off, so a node relaxation splits into

* a weighted isotonic-type QP in z over the arcs fixed at u = 0, and
* one small LP per column j asking whether the points fixed at u_ij = 1 can
  still be separated from X_j.

Branch-and-bound works on that split form. Branching picks the most violated
hull condition of the relaxed z and creates one child per point of a minimal
hull support, with the children made disjoint through u = 1 fixings.
"""

from __future__ import annotations

import heapq
import itertools
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import DataSet
from .errors import InvalidParams, NodeLimitExceeded
from .feasibility import TIE_TOL, snap_ties
from .geometry import LOWER, PLAIN, UPPER, hull_weights, member, minimal_support, separating_direction
from .numeric import QPProblem, QPResult, Status, solve_qp
from .shape import ShapeSpec


@dataclass
class SolverParams:
    """Solver knobs. ``None`` means "derive from the data"."""

    m_z: float | None = None
    m_xi: float | None = None
    eps: float | None = None
    xi_bound: float = 1.0
    gamma: float | None = None
    gap: float | None = None
    max_nodes: int = 20000
    time_limit: float | None = None
    threads: int = 1
    heuristic_every: int = 100
    propagate: bool = True
    strict: bool = False  # raise NodeLimitExceeded instead of returning the incumbent


@dataclass
class MIQPModel:
    X: np.ndarray
    y: np.ndarray
    w: np.ndarray
    shape: ShapeSpec
    orthant: int
    z_lo: float
    z_hi: float
    m_z: float
    m_xi: float
    eps: float
    xi_bound: float
    gamma: float
    gap: float
    params: SolverParams
    root_arcs: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def n_binaries(self) -> int:
        return self.n * (self.n - 1)

    @property
    def n_continuous(self) -> int:
        return self.n + self.n * self.d

    @property
    def xi_box(self) -> tuple[float, float]:
        b = self.xi_bound
        return {UPPER: (0.0, b), LOWER: (-b, 0.0), PLAIN: (-b, b)}[self.orthant]

    def sse(self, z) -> float:
        z = np.asarray(z, dtype=float)
        return float(np.sum(self.w * (self.y - z) ** 2))

    def constraint_violation(self, z, xi, u) -> float:
        """Largest violation of the big-M constraints, box and bounds at (z, xi, u)."""
        z, xi, u = np.asarray(z, float), np.asarray(xi, float), np.asarray(u, float)
        lo, hi = self.xi_box
        worst = max(0.0, float(np.max(self.z_lo - z)), float(np.max(z - self.z_hi)),
                    float(np.max(lo - xi)), float(np.max(xi - hi)))
        n = self.n
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                worst = max(worst, z[j] - z[i] - self.m_z * u[i, j])
                lhs = xi[j] @ (self.X[i] - self.X[j])
                worst = max(worst, self.m_xi * (u[i, j] - 1) + self.eps - lhs)
        return float(worst)


@dataclass(order=True)
class BBNode:
    bound: float
    seq: int
    depth: int = field(compare=False, default=0)
    arcs: tuple = field(compare=False, default=())  # extra (i, j) arcs: z_j <= z_i
    fixed_one: dict = field(compare=False, default_factory=dict)  # j -> frozenset of i
    z: np.ndarray | None = field(compare=False, default=None)
    active: list | None = field(compare=False, default=None)


@dataclass
class ThetaSolution:
    theta: np.ndarray
    xi: np.ndarray
    u: np.ndarray
    objective: float
    gap: float
    nodes: int
    wall_time: float
    status: str = "optimal"
    m_z: float = np.nan
    m_xi: float = np.nan
    eps: float = np.nan
    gamma: float = np.nan
    min_margin: float = np.nan

    def stats(self) -> dict:
        return {"objective": self.objective, "gap": self.gap, "nodes": self.nodes,
                "wall_ms": 1000.0 * self.wall_time, "m_z": self.m_z, "m_xi": self.m_xi,
                "eps": self.eps, "gamma": self.gamma, "status": self.status}


# ---------------------------------------------------------------------------
# model construction


def _root_arcs(X, orthant):
    """Hasse diagram of the forced order: (i, j) with X_j in the orthant of X_i."""
    if orthant == PLAIN:
        return []
    if orthant == UPPER:
        le = np.all(X[:, None, :] <= X[None, :, :], axis=2)
    else:
        le = np.all(X[:, None, :] >= X[None, :, :], axis=2)
    np.fill_diagonal(le, False)
    # keep (i, j) unless some k sits strictly between them
    between = (le.astype(int) @ le.astype(int)) > 0
    keep = le & ~between
    return [(int(i), int(j)) for i, j in zip(*np.nonzero(keep))]


def build_model(data: DataSet, shape: ShapeSpec = ShapeSpec(), params: SolverParams | None = None,
                y_offset: float = 0.0) -> MIQPModel:
    """Instantiate the MIQP for a quasiconvex shape.

    ``y_offset`` is added back to z before applying the |z| <= gamma box, so
    callers can pass centered responses.
    """
    params = params or SolverParams()
    if not shape.is_convex:
        raise InvalidParams("the solver takes quasiconvex shapes; negate y for quasiconcave fits")
    X, y, w = data.X, data.y, data.w
    n, d = X.shape
    span = float(np.max(np.ptp(X, axis=0))) if n > 1 else 0.0
    yr = float(np.ptp(y)) if n > 1 else 0.0

    gamma = float(np.max(np.abs(y + y_offset))) if params.gamma is None else float(params.gamma)
    if gamma < 0:
        raise InvalidParams("gamma must be nonnegative")
    xi_bound = float(params.xi_bound)
    eps = 1e-6 * span if params.eps is None else float(params.eps)
    if eps == 0.0 and params.eps is None:
        eps = 1e-6
    m_z = 2.0 * yr + 1.0 if params.m_z is None else float(params.m_z)
    m_xi = 2.0 * d * xi_bound * span + 1.0 if params.m_xi is None else float(params.m_xi)
    for name, val in (("m_z", m_z), ("m_xi", m_xi), ("eps", eps), ("xi_bound", xi_bound)):
        if not val > 0:
            raise InvalidParams(f"{name} must be positive, got {val}")
    # below these values u = 1 no longer releases the order constraint (m_z) or
    # u = 0 no longer releases the separation constraint (m_xi)
    if m_z <= yr:
        raise InvalidParams(f"m_z={m_z} does not exceed the response range {yr}")
    if m_xi < d * xi_bound * span + eps:
        raise InvalidParams(f"m_xi={m_xi} is below d * xi_bound * span + eps")
    if params.gap is None:
        var = float(np.var(y)) if n > 1 else 0.0
        gap = max(1e-7 * n * var, 1e-9)
    else:
        gap = float(params.gap)

    return MIQPModel(X=X, y=y, w=w, shape=shape, orthant=shape.orthant,
                     z_lo=-gamma - y_offset, z_hi=gamma - y_offset,
                     m_z=m_z, m_xi=m_xi, eps=eps, xi_bound=xi_bound, gamma=gamma, gap=gap,
                     params=params, root_arcs=_root_arcs(X, shape.orthant))


# ---------------------------------------------------------------------------
# relaxation


def _arc_problem(model: MIQPModel, arcs) -> QPProblem:
    n = model.n
    A = np.zeros((len(arcs), n))
    for r, (i, j) in enumerate(arcs):
        A[r, j] += 1.0
        A[r, i] -= 1.0
    return QPProblem(Q=2.0 * model.w, c=-2.0 * model.w * model.y, A=A, b=np.zeros(len(arcs)),
                     lo=model.z_lo, hi=model.z_hi, const=float(np.sum(model.w * model.y**2)))


def _polish(model: MIQPModel, arcs, res: QPResult) -> np.ndarray:
    """Snap the QP solution to exact block values.

    Blocks are the connected components of the active order constraints;
    each takes its clipped weighted mean, which is what the QP solution
    equals up to rounding.
    """
    n = model.n
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    m = len(arcs)
    for idx in res.active:
        if idx < m:
            i, j = arcs[idx]
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(k) for k in range(n)])
    wsum = np.bincount(roots, weights=model.w, minlength=n)
    ysum = np.bincount(roots, weights=model.w * model.y, minlength=n)
    means = np.divide(ysum, wsum, out=np.zeros(n), where=wsum > 0)
    z = np.clip(means[roots], model.z_lo, model.z_hi)
    # fall back to the raw solution if snapping broke an order constraint
    if arcs:
        ii = np.array([a[0] for a in arcs])
        jj = np.array([a[1] for a in arcs])
        if np.any(z[jj] - z[ii] > 1e-9):
            return res.x.copy()
    return z


def qp_relaxation(node: BBNode, model: MIQPModel) -> QPResult:
    """Continuous relaxation at ``node``: the z-QP over root and fixed-0 arcs.

    ``x`` of the result is the polished relaxed z and ``objective`` its
    weighted SSE.
    """
    arcs = list(model.root_arcs) + list(node.arcs)
    prob = _arc_problem(model, arcs)
    res = solve_qp(prob, active_set=node.active)
    if not res.optimal:
        return res
    z = _polish(model, arcs, res)
    res.x = z
    res.objective = model.sse(z)
    return res


# ---------------------------------------------------------------------------
# branching helpers


class _Geometry:
    """Hull queries on the model's points with a membership cache."""

    def __init__(self, model: MIQPModel):
        self.X = model.X
        self.orthant = model.orthant
        self.model = model
        self._cache: dict = {}

    def member(self, j, idx) -> bool:
        idx = np.asarray(idx, dtype=int)
        if idx.size == 0:
            return False
        key = (j, np.sort(idx).tobytes())
        hit = self._cache.get(key)
        if hit is None:
            hit = member(self.X[j], self.X[idx], self.orthant)
            if len(self._cache) > 200000:
                self._cache.clear()
            self._cache[key] = hit
        return hit

    def separable(self, j, idx) -> bool:
        """Can xi_j (in its box) separate X_j from X[idx] with margin eps?"""
        idx = sorted(idx)
        if not idx:
            return True
        key = ("sep", j, tuple(idx))
        hit = self._cache.get(key)
        if hit is None:
            margin, _ = separating_direction(self.X[j], self.X[idx], self.orthant, self.model.xi_bound)
            hit = margin >= self.model.eps * (1 - 1e-9)
            self._cache[key] = hit
        return hit


def _most_violated(z, geo: _Geometry):
    """(j, support) for the largest hull-condition violation of z, or None.

    For each j the smallest level alpha with X_j inside the hull set of
    {i : z_i <= alpha} is located by bisection over the distinct levels
    below z_j; the violation is z_j - alpha.
    """
    zs = snap_ties(z)
    levels = np.unique(zs)
    best = None
    for j in range(zs.size):
        below = np.flatnonzero(zs < zs[j])
        if below.size == 0 or not geo.member(j, below):
            continue
        cand = levels[levels < zs[j]]
        lo, hi = 0, cand.size - 1  # member at hi
        while lo < hi:
            mid = (lo + hi) // 2
            if geo.member(j, np.flatnonzero(zs <= cand[mid])):
                hi = mid
            else:
                lo = mid + 1
        alpha = cand[lo]
        viol = zs[j] - alpha
        if best is None or viol > best[0] + TIE_TOL:
            best = (viol, j, np.flatnonzero(zs <= alpha))
    if best is None:
        return None
    _, j, pool = best
    lam = hull_weights(geo.X[j], geo.X[pool], geo.orthant)
    sup = minimal_support(geo.X[j], geo.X[pool], geo.orthant, weights=lam)
    support = [int(pool[k]) for k in sup]
    # cheapest repair first: the support point whose value is closest to z_j
    support.sort(key=lambda i: (-zs[i], i))
    return j, support


def _closure_heuristic(model: MIQPModel, z, geo: _Geometry) -> np.ndarray:
    """Feasible point near z: grow closed blocks in order of z, then pool.

    Each block is the closure of the previous blocks plus the lowest remaining
    point; values are then made nondecreasing across blocks by weighted
    pool-adjacent-violators. Every prefix of blocks is closed, so every lower
    level set of the result is too.
    """
    n = model.n
    order = list(np.argsort(z, kind="stable"))
    remaining = dict.fromkeys(order)
    placed: list[int] = []
    blocks = []
    while remaining:
        seed = next(iter(remaining))
        block = [seed]
        del remaining[seed]
        grown = True
        while grown:
            grown = False
            base = placed + block
            for k in list(remaining):
                if geo.member(k, base):
                    block.append(k)
                    del remaining[k]
                    base = placed + block
                    grown = True
        placed.extend(block)
        blocks.append(block)

    # pool adjacent violators over blocks
    stack = []  # [wsum, mean, members]
    for block in blocks:
        wsum = float(np.sum(model.w[block]))
        mean = float(np.sum(model.w[block] * model.y[block]) / wsum)
        cur = [wsum, mean, list(block)]
        while stack and stack[-1][1] >= cur[1]:
            prev = stack.pop()
            tot = prev[0] + cur[0]
            cur = [tot, (prev[0] * prev[1] + cur[0] * cur[1]) / tot, prev[2] + cur[2]]
        stack.append(cur)
    out = np.empty(n)
    for wsum, mean, members in stack:
        out[members] = mean
    return np.clip(out, model.z_lo, model.z_hi)


# ---------------------------------------------------------------------------
# branch and bound


def _finish(model: MIQPModel, theta, nodes, t0, gap, status) -> ThetaSolution:
    n = model.n
    theta = np.asarray(theta, dtype=float)
    zs = snap_ties(theta)
    u = (zs[:, None] < zs[None, :]).astype(int)
    xi = np.zeros_like(model.X)
    min_margin = np.inf
    for j in range(n):
        below = np.flatnonzero(zs < zs[j])
        if below.size:
            m, v = separating_direction(model.X[j], model.X[below], model.orthant, model.xi_bound)
            xi[j] = v
            min_margin = min(min_margin, m)
    return ThetaSolution(theta=theta, xi=xi, u=u, objective=model.sse(theta), gap=float(max(gap, 0.0)),
                         nodes=nodes, wall_time=time.perf_counter() - t0, status=status,
                         m_z=model.m_z, m_xi=model.m_xi, eps=model.eps, gamma=model.gamma,
                         min_margin=float(min_margin))


def _remap_active(active, m_parent, m_child):
    if active is None:
        return None
    return [a if a < m_parent else a + (m_child - m_parent) for a in active]


def _children(node: BBNode, j, support, model: MIQPModel, geo: _Geometry, seq) -> list[BBNode]:
    out = []
    fixed_j = node.fixed_one.get(j, frozenset())
    existing = set(model.root_arcs) | set(node.arcs)
    m_parent = len(model.root_arcs) + len(node.arcs)
    ones = set(fixed_j)
    for i in support:
        if i in ones:
            # u_ij already fixed to 1 on this path: that child is empty
            continue
        new_ones = frozenset(ones)
        arcs = list(node.arcs)
        if (i, j) not in existing:
            arcs.append((i, j))
        fixed = dict(node.fixed_one)
        if new_ones != fixed_j:
            if not geo.separable(j, new_ones):
                ones.add(i)
                continue
            fixed[j] = new_ones
            if model.params.propagate:
                have = existing | set(arcs)
                for k in range(model.n):
                    if k == j or k in new_ones or (k, j) in have:
                        continue
                    if geo.member(j, sorted(new_ones | {k})):
                        arcs.append((k, j))
        m_child = len(model.root_arcs) + len(arcs)
        out.append(BBNode(bound=node.bound, seq=next(seq), depth=node.depth + 1, arcs=tuple(arcs),
                          fixed_one=fixed, active=_remap_active(node.active, m_parent, m_child)))
        ones.add(i)
    return out


def solve(model: MIQPModel) -> ThetaSolution:
    """Globally minimize the weighted SSE over the MIQP's feasible z."""
    t0 = time.perf_counter()
    params = model.params
    n = model.n
    if n == 1:
        theta = np.clip(model.y, model.z_lo, model.z_hi)
        return _finish(model, theta, 1, t0, 0.0, "optimal")

    geo = _Geometry(model)
    seq = itertools.count()
    root = BBNode(bound=-np.inf, seq=next(seq))
    res = qp_relaxation(root, model)
    root.bound, root.z, root.active = res.objective, res.x, res.active

    incumbent = _closure_heuristic(model, root.z, geo)
    best = model.sse(incumbent)
    heap = [root]
    nodes = 0
    status = "optimal"
    pool = ThreadPoolExecutor(params.threads) if params.threads > 1 else None

    def evaluate(child: BBNode):
        r = qp_relaxation(child, model)
        if r.status is Status.INFEASIBLE:
            return None
        child.bound, child.z, child.active = r.objective, r.x, r.active
        return child

    try:
        while heap:
            if heap[0].bound >= best - model.gap:
                break
            if nodes >= params.max_nodes or (
                    params.time_limit is not None and time.perf_counter() - t0 > params.time_limit):
                status = "node_limit"
                break
            node = heapq.heappop(heap)
            nodes += 1
            branch = _most_violated(node.z, geo)
            if branch is None:
                if node.bound < best:
                    best, incumbent = node.bound, node.z.copy()
                continue
            if params.heuristic_every and nodes % params.heuristic_every == 0:
                cand = _closure_heuristic(model, node.z, geo)
                val = model.sse(cand)
                if val < best:
                    best, incumbent = val, cand
            kids = _children(node, *branch, model, geo, seq)
            evaluated = list(pool.map(evaluate, kids)) if pool else [evaluate(k) for k in kids]
            for child in evaluated:
                if child is not None and child.bound < best - model.gap:
                    heapq.heappush(heap, child)
    finally:
        if pool is not None:
            pool.shutdown()

    lower = heap[0].bound if heap else best
    sol = _finish(model, incumbent, nodes, t0, best - min(lower, best), status)
    if status != "optimal":
        msg = f"node limit reached after {nodes} nodes; incumbent gap {sol.gap:.3g}"
        if params.strict:
            raise NodeLimitExceeded(msg, sol)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return sol


def fit_values(data: DataSet, shape: ShapeSpec = ShapeSpec(), params: SolverParams | None = None,
               y_offset: float = 0.0) -> ThetaSolution:
    return solve(build_model(data, shape, params, y_offset))
