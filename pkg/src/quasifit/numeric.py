"""Dense LP and convex QP kernels.

``solve_lp`` is a two-phase tableau simplex with Bland's rule, so its output
depends only on its input. ``solve_qp`` is the Goldfarb-Idnani dual
active-set method; it needs a positive definite quadratic term, which is
always the case for the weighted least-squares objectives used here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, NumericalFailure

LP_TOL = 1e-9
QP_TOL = 1e-8
PHASE1_TOL = 1e-7
_PIVOT_TOL = 1e-10


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


def _as_matrix(a, ncols):
    if a is None:
        return np.zeros((0, ncols))
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return np.zeros((0, ncols))
    return a


def _as_vector(v, n, fill):
    if v is None:
        return np.full(n, fill, dtype=float)
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size == 1 and n != 1:
        v = np.full(n, float(v[0]))
    return v


@dataclass
class LPProblem:
    """minimize c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  lo <= x <= hi.

    Bounds default to ``0 <= x < inf``; use ``-np.inf`` for free variables.
    """

    c: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lo: np.ndarray | float | None = None
    hi: np.ndarray | float | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        n = self.c.size
        self.A_ub = _as_matrix(self.A_ub, n)
        self.A_eq = _as_matrix(self.A_eq, n)
        self.b_ub = _as_vector(self.b_ub, self.A_ub.shape[0], 0.0)
        self.b_eq = _as_vector(self.b_eq, self.A_eq.shape[0], 0.0)
        self.lo = _as_vector(self.lo, n, 0.0)
        self.hi = _as_vector(self.hi, n, np.inf)
        if self.A_ub.shape[1] != n or self.A_eq.shape[1] != n:
            raise DimensionMismatch("constraint matrices must have len(c) columns")
        if self.A_ub.shape[0] != self.b_ub.size or self.A_eq.shape[0] != self.b_eq.size:
            raise DimensionMismatch("row counts of A and b differ")
        if self.lo.size != n or self.hi.size != n:
            raise DimensionMismatch("bounds must have len(c) entries")
        if np.any(self.lo > self.hi):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def n(self):
        return self.c.size


@dataclass
class LPResult:
    status: Status
    x: np.ndarray | None = None
    objective: float = np.nan
    iterations: int = 0

    @property
    def optimal(self):
        return self.status is Status.OPTIMAL


@dataclass
class QPProblem:
    """minimize 0.5 x'Qx + c.x + const  s.t.  A x <= b,  lo <= x <= hi.

    Bounds default to free (``-inf < x < inf``).
    """

    Q: np.ndarray
    c: np.ndarray
    A: np.ndarray | None = None
    b: np.ndarray | None = None
    lo: np.ndarray | float | None = None
    hi: np.ndarray | float | None = None
    const: float = 0.0

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        n = self.c.size
        Q = np.asarray(self.Q, dtype=float)
        if Q.ndim == 1:
            Q = np.diag(Q)
        self.Q = np.atleast_2d(Q)
        self.A = _as_matrix(self.A, n)
        self.b = _as_vector(self.b, self.A.shape[0], 0.0)
        self.lo = _as_vector(self.lo, n, -np.inf)
        self.hi = _as_vector(self.hi, n, np.inf)
        if self.Q.shape != (n, n):
            raise DimensionMismatch("Q must be n x n")
        if self.A.shape[1] != n or self.A.shape[0] != self.b.size:
            raise DimensionMismatch("A must be m x n with len(b) == m")
        if self.lo.size != n or self.hi.size != n:
            raise DimensionMismatch("bounds must have n entries")
        if not np.allclose(self.Q, self.Q.T):
            raise ValueError("Q must be symmetric")

    @property
    def n(self):
        return self.c.size

    def objective(self, x):
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.Q @ x + self.c @ x + self.const)

    def constraint_rows(self):
        """All constraints as ``G x >= h`` (inequality rows, then bounds)."""
        n = self.n
        eye = np.eye(n)
        lo_idx = np.flatnonzero(np.isfinite(self.lo))
        hi_idx = np.flatnonzero(np.isfinite(self.hi))
        G = np.vstack([-self.A, eye[lo_idx], -eye[hi_idx]])
        h = np.concatenate([-self.b, self.lo[lo_idx], -self.hi[hi_idx]])
        return G, h


@dataclass
class QPResult:
    status: Status
    x: np.ndarray | None = None
    objective: float = np.nan
    iterations: int = 0
    active: list = field(default_factory=list)
    multipliers: np.ndarray | None = None

    @property
    def optimal(self):
        return self.status is Status.OPTIMAL


# ---------------------------------------------------------------------------
# simplex


def _pivot(T, row, col):
    T[row] /= T[row, col]
    colv = T[:, col].copy()
    colv[row] = 0.0
    T -= np.outer(colv, T[row])


def _run_simplex(T, basis, allowed, max_iter):
    """Bland's-rule pivoting on tableau ``T`` (last row = reduced costs).

    Returns ("optimal" | "unbounded", iterations).
    """
    m = T.shape[0] - 1
    it = 0
    while True:
        red = T[-1, :-1]
        cand = np.flatnonzero((red < -LP_TOL) & allowed)
        if cand.size == 0:
            return "optimal", it
        col = cand[0]
        colv = T[:m, col]
        pos = np.flatnonzero(colv > _PIVOT_TOL)
        if pos.size == 0:
            return "unbounded", it
        ratios = T[pos, -1] / colv[pos]
        best = ratios.min()
        ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
        row = ties[np.argmin(np.asarray(basis)[ties])]
        _pivot(T, row, col)
        basis[row] = col
        it += 1
        if it > max_iter:
            raise NumericalFailure(f"simplex exceeded {max_iter} pivots")


def solve_lp(p: LPProblem, max_iter: int | None = None) -> LPResult:
    n = p.n
    # x = shift + D y with y >= 0
    cols, shift = [], np.zeros(n)
    ub_rows = []  # (column index in y, bound) rows y_k <= ub
    for k in range(n):
        lo, hi = p.lo[k], p.hi[k]
        if np.isfinite(lo):
            shift[k] = lo
            cols.append((k, 1.0))
            if np.isfinite(hi):
                ub_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            shift[k] = hi
            cols.append((k, -1.0))
        else:
            cols.append((k, 1.0))
            cols.append((k, -1.0))
    ny = len(cols)
    D = np.zeros((n, ny))
    for j, (k, s) in enumerate(cols):
        D[k, j] = s

    A_ub = p.A_ub @ D
    b_ub = p.b_ub - p.A_ub @ shift
    if ub_rows:
        B = np.zeros((len(ub_rows), ny))
        for r, (j, bound) in enumerate(ub_rows):
            B[r, j] = 1.0
        A_ub = np.vstack([A_ub, B])
        b_ub = np.concatenate([b_ub, [bnd for _, bnd in ub_rows]])
    A_eq = p.A_eq @ D
    b_eq = p.b_eq - p.A_eq @ shift
    c_y = D.T @ p.c

    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq
    if m == 0:
        if np.any(c_y < -LP_TOL):
            return LPResult(Status.UNBOUNDED)
        x = shift.copy()
        return LPResult(Status.OPTIMAL, x, float(p.c @ x))

    rows = np.zeros((m, ny + m_ub))
    rhs = np.concatenate([b_ub, b_eq])
    rows[:m_ub, :ny] = A_ub
    rows[:m_ub, ny:] = np.eye(m_ub)
    rows[m_ub:, :ny] = A_eq
    neg = rhs < 0
    rows[neg] *= -1.0
    rhs = np.where(neg, -rhs, rhs)

    needs_art = np.ones(m, dtype=bool)
    needs_art[:m_ub] = neg[:m_ub]
    art_rows = np.flatnonzero(needs_art)
    n_real = ny + m_ub
    n_art = art_rows.size
    T = np.zeros((m + 1, n_real + n_art + 1))
    T[:m, :n_real] = rows
    T[:m, -1] = rhs
    basis = [0] * m
    for i in range(m_ub):
        if not neg[i]:
            basis[i] = ny + i
    for a, i in enumerate(art_rows):
        T[i, n_real + a] = 1.0
        basis[i] = n_real + a

    if max_iter is None:
        max_iter = 5000 + 50 * (m + n_real)
    iters = 0
    if n_art:
        T[-1, :] = 0.0
        T[-1, n_real:n_real + n_art] = 1.0
        for i in art_rows:
            T[-1] -= T[i]
        allowed = np.zeros(n_real + n_art, dtype=bool)
        allowed[:n_real] = True
        _, it = _run_simplex(T, basis, allowed, max_iter)
        iters += it
        if -T[-1, -1] > PHASE1_TOL:
            return LPResult(Status.INFEASIBLE, iterations=iters)
        # drive remaining artificials out of the basis
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= n_real:
                nz = np.flatnonzero(np.abs(T[i, :n_real]) > 1e-9)
                if nz.size:
                    _pivot(T, i, nz[0])
                    basis[i] = nz[0]
                    iters += 1
                else:
                    keep[i] = False
        T = np.vstack([T[:m][keep], T[-1:]])
        T = np.hstack([T[:, :n_real], T[:, -1:]])
        basis = [b for b, k in zip(basis, keep) if k]
        m = len(basis)

    c_std = np.concatenate([c_y, np.zeros(m_ub)])
    T[-1, :] = 0.0
    T[-1, :n_real] = c_std
    for i, bidx in enumerate(basis):
        if c_std[bidx] != 0.0:
            T[-1] -= c_std[bidx] * T[i]
    status, it = _run_simplex(T, basis, np.ones(n_real, dtype=bool), max_iter)
    iters += it
    if status == "unbounded":
        return LPResult(Status.UNBOUNDED, iterations=iters)
    y_std = np.zeros(n_real)
    for i, bidx in enumerate(basis):
        y_std[bidx] = T[i, -1]
    x = shift + D @ y_std[:ny]
    return LPResult(Status.OPTIMAL, x, float(p.c @ x), iters)


# ---------------------------------------------------------------------------
# Goldfarb-Idnani dual active set


def _factor(Q):
    """Return (J0, diag_flag) with J0 = L^{-T} for Q = L L'."""
    d = np.diag(Q)
    if np.count_nonzero(Q - np.diag(d)) == 0:
        scale = max(float(np.max(np.abs(d))) if d.size else 1.0, 1.0)
        for ridge in (0.0, 1e-12, 1e-10, 1e-8):
            dd = d + ridge * scale
            if np.all(dd > 0):
                return np.diag(1.0 / np.sqrt(dd)), np.sqrt(dd)
        raise NumericalFailure("quadratic term is not positive definite")
    scale = max(float(np.max(np.abs(d))), 1.0)
    for ridge in (0.0, 1e-12, 1e-10, 1e-8):
        try:
            L = np.linalg.cholesky(Q + ridge * scale * np.eye(Q.shape[0]))
        except np.linalg.LinAlgError:
            continue
        return solve_triangular(L, np.eye(Q.shape[0]), lower=True).T, None
    raise NumericalFailure("quadratic term is not positive definite")


def _unconstrained(Q, c, sqrt_diag):
    if sqrt_diag is not None:
        return -c / sqrt_diag**2
    return np.linalg.solve(Q, -c)


def _kkt_start(Q, c, G, h, active):
    """Equality-constrained minimizer on ``active``; None if not dual feasible."""
    n = Q.shape[0]
    q = len(active)
    N = G[active]
    K = np.zeros((n + q, n + q))
    K[:n, :n] = Q
    K[:n, n:] = -N.T
    K[n:, :n] = N
    rhs = np.concatenate([-c, h[active]])
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(sol)):
        return None
    u = sol[n:]
    if np.any(u < -1e-12):
        return None
    return sol[:n], np.maximum(u, 0.0)


def solve_qp(p: QPProblem, active_set=None, max_iter: int | None = None) -> QPResult:
    """Solve a strictly convex QP.

    ``active_set`` optionally names constraint rows (indices into
    ``p.constraint_rows()``) believed active at the optimum; it is used as a
    warm start when its KKT multipliers are nonnegative and ignored otherwise.
    """
    G, h = p.constraint_rows()
    n = p.n
    J0, sqrt_diag = _factor(p.Q)
    if sqrt_diag is not None:
        Qd = np.diag(sqrt_diag**2)
    else:
        Qd = p.Q

    rownorm = np.linalg.norm(G, axis=1) if G.size else np.zeros(0)
    rownorm = np.where(rownorm > 0, rownorm, 1.0)
    viol_tol = 1e-11 * (1.0 + np.abs(h))

    x, active, u = None, [], np.zeros(0)
    if active_set:
        start = _kkt_start(Qd, p.c, G, h, list(active_set))
        if start is not None:
            x, u = start
            active = list(active_set)
    if x is None:
        x = _unconstrained(Qd, p.c, sqrt_diag)

    if max_iter is None:
        max_iter = 20 * (G.shape[0] + n) + 100
    it = 0
    while True:
        s = G @ x - h if G.size else np.zeros(0)
        scaled = s / rownorm
        viol = np.flatnonzero(s < -viol_tol)
        if viol.size == 0:
            break
        pidx = viol[np.argmin(scaled[viol])]
        npv = G[pidx]
        up = 0.0
        while True:
            it += 1
            if it > max_iter:
                raise NumericalFailure(f"QP exceeded {max_iter} iterations")
            q = len(active)
            if q:
                Bm = J0.T @ G[active].T
                Qm, R = np.linalg.qr(Bm, mode="complete")
                J = J0 @ Qm
                R = R[:q, :q]
            else:
                J = J0
            dvec = J.T @ npv
            z = J[:, q:] @ dvec[q:]
            r = solve_triangular(R, dvec[:q]) if q else np.zeros(0)
            t1, drop = np.inf, None
            for k in range(q):
                if r[k] > 1e-12:
                    ratio = u[k] / r[k]
                    if ratio < t1:
                        t1, drop = ratio, k
            sp = float(npv @ x - h[pidx])
            zn = float(z @ npv)
            full = zn > 1e-14 * max(1.0, float(npv @ npv))
            t2 = -sp / zn if full else np.inf
            t = min(t1, t2)
            if not np.isfinite(t):
                return QPResult(Status.INFEASIBLE, iterations=it)
            if not full:
                u = u - t * r
                up += t
                u = np.delete(u, drop)
                active.pop(drop)
                continue
            x = x + t * z
            u = u - t * r
            up += t
            if t2 <= t1:
                active.append(int(pidx))
                u = np.append(u, up)
                break
            u = np.delete(u, drop)
            active.pop(drop)

    return QPResult(Status.OPTIMAL, x, p.objective(x), it, active, u)


def kkt_residual(p: QPProblem, res: QPResult) -> float:
    """Max of stationarity, primal and complementarity residuals."""
    G, h = p.constraint_rows()
    x = res.x
    lam = np.zeros(G.shape[0])
    if res.active:
        lam[res.active] = res.multipliers
    grad = p.Q @ x + p.c - G.T @ lam
    s = G @ x - h if G.size else np.zeros(0)
    prim = float(np.max(np.maximum(-s, 0.0))) if s.size else 0.0
    comp = float(np.max(np.abs(lam * s))) if s.size else 0.0
    dual = float(np.max(np.maximum(-lam, 0.0))) if lam.size else 0.0
    return max(float(np.max(np.abs(grad))) if grad.size else 0.0, prim, comp, dual)
