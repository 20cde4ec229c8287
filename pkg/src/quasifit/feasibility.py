"""Certify that fitted values are realizable by a function of a given shape.

For a quasiconvex target the test runs, for every index i, one hull
membership problem: X_i must not lie in the hull set (upper orthant of the
hull, lower orthant, or plain hull, per monotonicity) of the points whose
values are strictly below z_i. n such tests are sufficient.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch
from .geometry import as_points, member, separating_direction
from .shape import ShapeSpec

TIE_TOL = 1e-12


@dataclass
class FeasibilityReport:
    feasible: bool
    index: int | None = None
    below: tuple = field(default_factory=tuple)

    def as_dict(self) -> dict:
        out = {"feasible": self.feasible}
        if not self.feasible:
            out["witness"] = self.index
            out["set"] = list(self.below)
        return out


def snap_ties(z, tol: float = TIE_TOL) -> np.ndarray:
    """Replace runs of values within ``tol`` of their neighbour by the run minimum."""
    z = np.asarray(z, dtype=float)
    out = z.copy()
    order = np.argsort(z, kind="stable")
    rep = z[order[0]] if z.size else 0.0
    prev = rep
    for k in order:
        if z[k] - prev > tol:
            rep = z[k]
        out[k] = rep
        prev = z[k]
    return out


def _prepare(z, X, shape):
    X = as_points(X)
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.size != X.shape[0]:
        raise DimensionMismatch(f"{z.size} values for {X.shape[0]} points")
    if not shape.is_convex:
        z, shape = -z, shape.negated()
    return snap_ties(z), X, shape.orthant


def _violations(z, X, shape, first_only):
    zs, X, orthant = _prepare(z, X, shape)
    found = []
    for i in range(zs.size):
        below = np.flatnonzero(zs < zs[i])
        if below.size and member(X[i], X[below], orthant):
            found.append((i, tuple(int(j) for j in below)))
            if first_only:
                break
    return found


def check(z, X, shape: ShapeSpec = ShapeSpec()) -> FeasibilityReport:
    """Decide whether z is the vector of values of a function of ``shape`` at X.

    Indices in the witness are 0-based.
    """
    found = _violations(z, X, shape, first_only=True)
    if not found:
        return FeasibilityReport(True)
    i, below = found[0]
    return FeasibilityReport(False, i, below)


def violating_constraints(z, X, shape: ShapeSpec = ShapeSpec()) -> list[tuple[int, tuple]]:
    """All (i, S) pairs, S = {j : z_j < z_i}, whose hull condition fails."""
    return _violations(z, X, shape, first_only=False)


def monotone_violations(z, X, direction: str = "decreasing") -> list[tuple[int, int]]:
    """Pairs (i, j) with X_i <= X_j whose values break the partial order."""
    X = as_points(X)
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.size != X.shape[0]:
        raise DimensionMismatch(f"{z.size} values for {X.shape[0]} points")
    le = np.all(X[:, None, :] <= X[None, :, :], axis=2)
    np.fill_diagonal(le, False)
    if direction == "decreasing":
        bad = le & (z[:, None] < z[None, :] - TIE_TOL)
    else:
        bad = le & (z[:, None] > z[None, :] + TIE_TOL)
    return [(int(i), int(j)) for i, j in zip(*np.nonzero(bad))]


def separating_vectors(z, X, shape: ShapeSpec = ShapeSpec(), margin: float = 1e-9,
                       bound: float = 1.0) -> np.ndarray | None:
    """Sign-constrained vectors xi_j with xi_j.(X_i - X_j) >= margin whenever z_i < z_j.

    Returns the (n, d) matrix of max-margin vectors, or None if some j admits
    no such vector. This is the dual counterpart of :func:`check`.
    """
    zs, X, orthant = _prepare(z, X, shape)
    xi = np.zeros_like(X)
    for j in range(zs.size):
        below = np.flatnonzero(zs < zs[j])
        if below.size == 0:
            continue
        m, v = separating_direction(X[j], X[below], orthant, bound)
        if m < margin:
            return None
        xi[j] = v
    return xi
