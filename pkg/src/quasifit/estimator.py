"""Fitting pipeline and piecewise-constant prediction.

``fit`` maps any curvature/monotonicity combination to a quasiconvex
canonical problem (negating responses for quasiconcave shapes and design
points for increasing ones), merges duplicate design points, rescales each
coordinate to [0, 1], centers the responses, solves, and maps back.

Prediction sorts the canonical fitted values and returns the m-th smallest
for the first prefix of points whose hull set contains x; outside every hull
set it returns the largest fitted value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from .data import DataSet
from .errors import DimensionMismatch, InvalidParams
from .geometry import LOWER, PLAIN, UPPER, member
from .numeric import QPProblem, solve_qp
from .shape import ShapeSpec
from .solver import SolverParams, ThetaSolution, _polish, _root_arcs, build_model, solve

MODEL_VERSION = "quasifit-model-v1"

__all__ = ["DataSet", "ShapeSpec", "FittedModel", "fit", "fit_isotonic", "predict",
           "in_sample_loss", "risk_vs_truth", "save_model", "load_model"]


@dataclass
class FittedModel:
    kind: str  # "lse" or "isotonic"
    shape: ShapeSpec
    points: np.ndarray  # distinct design points, original scale
    theta: np.ndarray  # fitted values at ``points``, original scale
    fitted: np.ndarray  # fitted values for every input row
    x_sign: float = 1.0
    x_lo: np.ndarray | None = None
    x_scale: np.ndarray | None = None
    y_sign: float = 1.0
    y_offset: float = 0.0
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        d = self.points.shape[1]
        if self.x_lo is None:
            self.x_lo = np.zeros(d)
        if self.x_scale is None:
            self.x_scale = np.ones(d)
        canon = self.y_sign * self.theta
        self.order = np.argsort(canon, kind="stable")
        self._canon_sorted = canon[self.order]
        self._canon_points = self.to_canonical(self.points)[self.order]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def to_canonical(self, x) -> np.ndarray:
        return (self.x_sign * np.asarray(x, dtype=float) - self.x_lo) / self.x_scale

    def predict(self, x):
        return predict(self, x)


# ---------------------------------------------------------------------------
# fitting


def _rescale(X, x_sign):
    Xs = x_sign * X
    lo = Xs.min(axis=0)
    scale = np.ptp(Xs, axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return lo, scale


def fit(data: DataSet, shape: ShapeSpec = ShapeSpec(), params: SolverParams | None = None) -> FittedModel:
    """Least-squares fit over functions of the given shape."""
    params = params or SolverParams()
    reduced, inverse = data.aggregate()
    y_sign, x_sign, canon = shape.canonical()
    x_lo, x_scale = _rescale(reduced.X, x_sign)
    Xs = (x_sign * reduced.X - x_lo) / x_scale
    yc = y_sign * reduced.y
    offset = float(np.sum(reduced.w * yc) / np.sum(reduced.w))
    model = build_model(DataSet(Xs, yc - offset, reduced.w), canon, params, y_offset=offset)
    sol: ThetaSolution = solve(model)
    if np.array_equal(sol.theta, yc - offset):
        theta = reduced.y.copy()  # data already feasible; skip the round trip through centering
    else:
        theta = y_sign * (sol.theta + offset)
    stats = sol.stats()
    stats["objective"] = float(np.sum(data.w * (data.y - theta[inverse]) ** 2))
    stats["min_margin"] = sol.min_margin
    return FittedModel(kind="lse", shape=shape, points=reduced.X, theta=theta, fitted=theta[inverse],
                       x_sign=x_sign, x_lo=x_lo, x_scale=x_scale, y_sign=y_sign, y_offset=offset,
                       stats=stats)


def fit_isotonic(data: DataSet, monotone: str = "decreasing") -> FittedModel:
    """Weighted least squares under the coordinatewise partial order alone."""
    if monotone not in ("decreasing", "increasing"):
        raise InvalidParams("isotonic fit needs monotone='decreasing' or 'increasing'")
    reduced, inverse = data.aggregate()
    orthant = UPPER if monotone == "decreasing" else LOWER
    arcs = _root_arcs(reduced.X, orthant)
    n = reduced.n
    A = np.zeros((len(arcs), n))
    for r, (i, j) in enumerate(arcs):
        A[r, j] += 1.0
        A[r, i] -= 1.0
    w, y = reduced.w, reduced.y
    res = solve_qp(QPProblem(Q=2.0 * w, c=-2.0 * w * y, A=A, b=np.zeros(len(arcs)),
                             const=float(np.sum(w * y**2))))
    blocks = SimpleNamespace(n=n, w=w, y=y, z_lo=-np.inf, z_hi=np.inf)
    theta = _polish(blocks, arcs, res)
    stats = {"objective": float(np.sum(data.w * (data.y - theta[inverse]) ** 2)),
             "iterations": res.iterations}
    return FittedModel(kind="isotonic", shape=ShapeSpec("quasiconvex", monotone), points=reduced.X,
                       theta=theta, fitted=theta[inverse], stats=stats)


# ---------------------------------------------------------------------------
# prediction


def _predict_lse(model: FittedModel, xc):
    P = model._canon_points
    vals = model._canon_sorted
    orthant = UPPER if model.shape.canonical()[2].monotone == "decreasing" else PLAIN
    m = vals.size
    if not member(xc, P, orthant):
        return vals[-1]
    lo, hi = 0, m - 1  # x is in the hull set of the first hi + 1 points
    while lo < hi:
        mid = (lo + hi) // 2
        if member(xc, P[: mid + 1], orthant):
            hi = mid
        else:
            lo = mid + 1
    return vals[lo]


def _predict_isotonic(model: FittedModel, x):
    P, theta = model.points, model.theta
    if model.shape.monotone == "decreasing":
        mask = np.all(P <= x, axis=1)
    else:
        mask = np.all(P >= x, axis=1)
    return float(theta[mask].min()) if mask.any() else float(theta.max())


def predict(model: FittedModel, x):
    """Evaluate the fitted function at one point (returns float) or many (array)."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim <= 1
    pts = arr.reshape(1, -1) if single else arr
    if pts.shape[1] != model.d:
        raise DimensionMismatch(f"model has dimension {model.d}, got {pts.shape[1]}")
    out = np.empty(pts.shape[0])
    if model.kind == "isotonic":
        for k, p in enumerate(pts):
            out[k] = _predict_isotonic(model, p)
    else:
        canon = model.to_canonical(pts)
        for k, xc in enumerate(canon):
            out[k] = model.y_sign * _predict_lse(model, xc)
    return float(out[0]) if single else out


# ---------------------------------------------------------------------------
# losses


def in_sample_loss(model: FittedModel, data: DataSet) -> float:
    """Weighted sum of squared residuals of the model on ``data``."""
    return float(np.sum(data.w * (data.y - predict(model, data.X)) ** 2))


def risk_vs_truth(model: FittedModel, truth_fn, eval_points) -> float:
    """Mean squared difference between the model and ``truth_fn`` over ``eval_points``."""
    pts = np.atleast_2d(np.asarray(eval_points, dtype=float))
    truth = np.array([truth_fn(p) for p in pts], dtype=float)
    return float(np.mean((predict(model, pts) - truth) ** 2))


# ---------------------------------------------------------------------------
# serialization


def model_to_dict(model: FittedModel) -> dict:
    stats = {k: v for k, v in model.stats.items() if not k.startswith("_")}
    return {
        "version": MODEL_VERSION,
        "kind": model.kind,
        "shape": {"curvature": model.shape.curvature, "monotone": model.shape.monotone},
        "points": model.points.tolist(),
        "theta": model.theta.tolist(),
        "fitted": model.fitted.tolist(),
        "order": model.order.tolist(),
        "rescale": {"x_sign": model.x_sign, "x_lo": model.x_lo.tolist(),
                    "x_scale": model.x_scale.tolist(), "y_sign": model.y_sign,
                    "y_offset": model.y_offset},
        "stats": stats,
    }


def model_from_dict(doc: dict) -> FittedModel:
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")
    r = doc["rescale"]
    model = FittedModel(kind=doc["kind"], shape=ShapeSpec(**doc["shape"]),
                        points=np.array(doc["points"], dtype=float).reshape(len(doc["points"]), -1),
                        theta=np.array(doc["theta"], dtype=float),
                        fitted=np.array(doc["fitted"], dtype=float),
                        x_sign=float(r["x_sign"]), x_lo=np.array(r["x_lo"], dtype=float),
                        x_scale=np.array(r["x_scale"], dtype=float), y_sign=float(r["y_sign"]),
                        y_offset=float(r["y_offset"]), stats=dict(doc.get("stats", {})))
    return model


def save_model(model: FittedModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1, allow_nan=True))


def load_model(path) -> FittedModel:
    return model_from_dict(json.loads(Path(path).read_text()))
