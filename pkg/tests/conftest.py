import numpy as np
import pytest

from quasifit import DataSet, ShapeSpec

EX2_X = np.array([[1.0, 0.0], [0.75, 0.75], [0.0, 1.0]])
EX2_Y = np.array([0.0, 1.0, 0.0])
EX2_OPTIMA = (np.array([0.5, 0.5, 0.0]), np.array([0.0, 0.5, 0.5]))

ALL_SHAPES = [ShapeSpec(c, m) for c in ("quasiconvex", "quasiconcave")
              for m in ("decreasing", "increasing", "none")]
FOUR_SHAPES = [ShapeSpec(c, m) for c in ("quasiconvex", "quasiconcave")
               for m in ("decreasing", "increasing")]


@pytest.fixture
def ex2():
    return DataSet(EX2_X, EX2_Y)


def random_data(rng, n, d, grid=False):
    X = rng.integers(0, 3, size=(n, d)).astype(float) if grid else rng.standard_normal((n, d))
    return DataSet(X, rng.standard_normal(n))


def close_to_any(theta, candidates, tol):
    return any(np.max(np.abs(theta - c)) <= tol for c in candidates)
