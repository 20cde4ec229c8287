"""Synthetic regression data built from smoothed staircase functions of ||x||^2.

Randomness comes from numpy's Philox counter-based generator, so a seed
fixes the draws independently of platform and numpy's default bit generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import DataSet
from .errors import DomainError, InvalidParams


@dataclass(frozen=True)
class SynthConfig:
    n: int = 100
    d: int = 2
    xi: float = 1.0  # smoothness of the steps, 0 = pure staircase, 1 = ||x||^2
    sigma2: float = 0.1
    misspecified: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise InvalidParams("n and d must be at least 1")
        if not 0.0 <= self.xi <= 1.0:
            raise InvalidParams("xi must lie in [0, 1]")
        if self.sigma2 < 0:
            raise InvalidParams("sigma2 must be nonnegative")


@dataclass
class SynthData:
    data: DataSet
    truth: np.ndarray  # noiseless mean at the design points
    config: SynthConfig


def _check_unit(name, v):
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"{name} = {v} is outside [0, 1]")


def smoothing(t: float, xi: float) -> float:
    """Ramp from 0 to 1 over [1 - xi, 1]; xi = 0 gives the indicator of t = 1."""
    _check_unit("t", t)
    _check_unit("xi", xi)
    if xi == 0.0:
        return 1.0 if t == 1.0 else 0.0
    if t < 1.0 - xi:
        return 0.0
    return (t - (1.0 - xi)) / xi


def psi(x, xi: float) -> float:
    s = float(np.dot(x, x))
    k = math.floor(s)
    return k + smoothing(s - k, xi)


def _r(s: float) -> float:
    if s >= 1.0:
        return math.sqrt(math.floor(s) / 2.0)
    return (math.sqrt(math.ceil(s)) + math.sqrt(math.floor(s))) / (2.0 * math.sqrt(2.0))


def psi_dagger(x, xi: float) -> float:
    """Monotone but not quasiconvex perturbation of :func:`psi`."""
    x = np.asarray(x, dtype=float)
    s = float(np.dot(x, x))
    if np.all(x >= _r(s)):
        return math.floor(s) + 1.0
    return psi(x, xi)


def truth_function(cfg: SynthConfig):
    fn = psi_dagger if cfg.misspecified else psi
    return lambda x: fn(x, cfg.xi)


def rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def generate(cfg: SynthConfig) -> SynthData:
    """Uniform design on [0, 1]^d, Gaussian noise with variance sigma2."""
    g = rng(cfg.seed)
    X = g.random((cfg.n, cfg.d))
    f = truth_function(cfg)
    truth = np.array([f(x) for x in X])
    y = truth + math.sqrt(cfg.sigma2) * g.standard_normal(cfg.n)
    return SynthData(DataSet(X, y), truth, cfg)
