import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quasifit import ShapeSpec
from quasifit.errors import DomainError, InvalidParams
from quasifit.feasibility import check, monotone_violations
from quasifit.synth import SynthConfig, generate, psi, psi_dagger, smoothing

INC = ShapeSpec("quasiconvex", "increasing")


def test_smoothing_examples():
    assert smoothing(0.75, 0.5) == pytest.approx(0.5)
    for t in np.linspace(0, 1, 11):
        assert smoothing(t, 1.0) == pytest.approx(t)
        assert smoothing(t, 0.3) == 0.0 or t > 0.7
    assert smoothing(1.0, 0.0) == 1.0 and smoothing(0.99, 0.0) == 0.0


@pytest.mark.parametrize("t, xi", [(-0.1, 0.5), (1.2, 0.5), (0.5, 1.5), (0.5, -0.1)])
def test_smoothing_domain(t, xi):
    with pytest.raises(DomainError):
        smoothing(t, xi)


@given(a=st.floats(0, 1), b=st.floats(0, 1), xi=st.floats(0, 1))
def test_smoothing_nondecreasing_in_t(a, b, xi):
    lo, hi = sorted((a, b))
    assert 0.0 <= smoothing(lo, xi) <= smoothing(hi, xi) <= 1.0


def test_psi_examples():
    x = np.array([0.8, 0.8])
    assert psi(x, 0.0) == 1.0
    assert psi(x, 1.0) == pytest.approx(1.28)
    assert psi(x, 0.34) == 1.0


def test_psi_dagger_examples():
    assert psi_dagger([1.0, 1.0], 0.5) == 3.0
    x = [1.4, 0.1]
    assert psi_dagger(x, 0.5) == psi(x, 0.5)
    x = [0.3, 0.05]  # ||x||^2 < 1, second coordinate below r = 1/(2 sqrt 2)
    assert psi_dagger(x, 0.5) == psi(x, 0.5)
    assert psi_dagger([0.5, 0.5], 0.5) == 1.0  # 0.5 >= 1/(2 sqrt 2)


def test_config_validation():
    for kw in (dict(n=0), dict(d=0), dict(xi=1.5), dict(sigma2=-1.0)):
        with pytest.raises(InvalidParams):
            SynthConfig(**kw)


def test_generate_is_reproducible_and_noiseless_when_asked():
    cfg = SynthConfig(n=50, d=2, xi=1.0, sigma2=0.1, seed=7)
    a, b = generate(cfg), generate(cfg)
    assert np.array_equal(a.data.X, b.data.X) and np.array_equal(a.data.y, b.data.y)
    clean = generate(SynthConfig(n=20, sigma2=0.0, seed=1))
    assert np.array_equal(clean.data.y, clean.truth)
    assert np.all((clean.data.X >= 0) & (clean.data.X <= 1))


def test_noise_has_zero_mean():
    n, s2 = 100_000, 0.1
    sd = generate(SynthConfig(n=n, d=1, sigma2=s2, seed=3))
    assert abs(np.mean(sd.data.y - sd.truth)) < 3 * math.sqrt(s2 / n)


def _grid(k, lo=0.0):
    g = np.linspace(lo, 1, k)
    return np.array([[a, b] for a in g for b in g])


@pytest.mark.parametrize("xi", [0.01, 0.34, 1.0])
def test_psi_on_grid_is_quasiconvex_increasing(xi):
    X = _grid(6)
    z = np.array([psi(x, xi) for x in X])
    assert check(z, X, INC).feasible


def test_psi_dagger_at_origin_follows_the_formula():
    # ceil(0) = 0 gives r = 0, so the origin takes the raised value
    assert psi_dagger([0.0, 0.0], 0.5) == 1.0


def test_psi_dagger_is_monotone_but_not_quasiconvex():
    X = _grid(6, lo=0.1)
    z = np.array([psi_dagger(x, 0.5) for x in X])
    assert monotone_violations(z, X, "increasing") == []
    assert not check(z, X, INC).feasible
