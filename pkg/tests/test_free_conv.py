import math

import numpy as np
import pytest

from freelab import measure as M
from freelab.cumulants import weighted_sum_moments_oracle
from freelab.errors import NoConvergence
from freelab.free_conv import SubordinationConfig, free_add_convolve, semicircular_smooth, weighted_free_sum

from conftest import l1

CATALAN = np.array([0, 1, 0, 2, 0, 5, 0, 14], dtype=float)


def test_config_validation():
    with pytest.raises(ValueError):
        SubordinationConfig(tol=0.0)
    with pytest.raises(ValueError):
        SubordinationConfig(damping=0.0)
    with pytest.raises(ValueError):
        SubordinationConfig(damping=1.5)


def test_bernoulli_pair_is_arcsine(bernoulli_pair):
    mu = bernoulli_pair
    assert np.interp(0.0, mu.x, mu.density) == pytest.approx(1 / (2 * math.pi), abs=1e-2)
    m = M.moments(mu, 6)
    assert m[[1, 3, 5]] == pytest.approx([2, 6, 20], abs=1e-3)
    outside = np.abs(mu.x) > 2.001
    assert np.dot(mu.weights[outside], mu.density[outside]) < 1e-6


def test_semicircle_stability(semicircle):
    mu = free_add_convolve(semicircle, semicircle)
    m = M.moments(mu, 4)
    assert m[1] == pytest.approx(2, abs=1e-3) and m[3] == pytest.approx(8, abs=1e-3)
    assert l1(mu, M.semicircle(2.0)) < 1e-3


def test_point_mass_translates(uniform):
    out = free_add_convolve(uniform, M.point_mass(0.7))
    assert out.mean == pytest.approx(0.7, abs=1e-12)
    assert np.array_equal(out.density, uniform.density)


def test_commutativity(uniform, bernoulli):
    a = free_add_convolve(uniform, bernoulli)
    b = free_add_convolve(bernoulli, uniform)
    assert l1(a, b) < 1e-3


def test_variance_additivity(uniform, smoothed_bernoulli):
    out = free_add_convolve(uniform, smoothed_bernoulli)
    assert out.variance == pytest.approx(uniform.variance + smoothed_bernoulli.variance, rel=1e-3)


def test_smoothing_point_mass_gives_semicircle():
    mu = semicircular_smooth(M.point_mass(0.0), 1.0)
    assert l1(mu, M.semicircle()) < 1e-3


def test_smoothing_semicircle(semicircle):
    mu = semicircular_smooth(semicircle, 1.0)
    assert M.moments(mu, 4) == pytest.approx([0, 2, 0, 8], abs=1e-3)


def test_smoothing_bernoulli_small_time(bernoulli):
    mu = semicircular_smooth(bernoulli, 0.01)
    assert abs(mu.mass - 1) < 1e-9
    assert mu.variance == pytest.approx(1.01, abs=1e-3)
    # two bumps near +-1 with an empty gap between them
    assert np.interp(0.0, mu.x, mu.density) < 1e-8
    assert np.interp(1.0, mu.x, mu.density) > 1.0


def _support_components(mu, floor=1e-12):
    pos = np.r_[False, mu.density > floor, False].astype(int)
    edges = np.flatnonzero(np.diff(pos))
    return list(zip(edges[::2], edges[1::2]))


@pytest.mark.parametrize("t", [0.5, 1.5])
def test_smoothed_density_positive_inside_support(bernoulli, t):
    mu = semicircular_smooth(bernoulli, t)
    comps = [(a, b) for a, b in _support_components(mu) if b - a > 10]
    # the gap between the two bumps closes at t = 1
    assert len(comps) == (2 if t < 1 else 1)
    for a, b in comps:
        pad = max(2, (b - a) // 50)
        assert np.all(mu.density[a + pad:b - pad] > 1e-12)


def test_smoothing_rejects_nonpositive_time(semicircle):
    with pytest.raises(ValueError):
        semicircular_smooth(semicircle, 0.0)


def test_weighted_sum_examples(bernoulli, semicircle):
    mu = weighted_free_sum([bernoulli, bernoulli], [1 / math.sqrt(2)] * 2)
    assert M.moments(mu, 6)[[1, 3, 5]] == pytest.approx([1, 1.5, 2.5], abs=1e-3)
    for n in (2, 3):
        mu = weighted_free_sum([semicircle] * n, [1 / math.sqrt(n)] * n)
        assert M.moments(mu, 6) == pytest.approx(CATALAN[:6], abs=1e-3)
    single = weighted_free_sum([bernoulli], [2.0])
    assert np.allclose(single.locations, [-2, 2])
    with pytest.raises(ValueError):
        weighted_free_sum([bernoulli], [0.0])


@pytest.mark.parametrize("pair", [("uniform", "bernoulli"), ("semicircle", "arcsine"), ("uniform", "uniform")])
def test_moments_match_cumulant_oracle(pair):
    mus = [M.named(n) for n in pair]
    out = free_add_convolve(*mus)
    oracle = weighted_sum_moments_oracle([M.moments(m, 8) for m in mus], [1, 1], 8)
    # scaled back to the variance-1 inputs' units: the sum has variance 2
    scale = 2.0 ** (np.arange(1, 9) / 2)
    assert np.max(np.abs((M.moments(out, 8) - oracle) / scale)) < 1e-3
    assert out.variance == pytest.approx(2.0, rel=1e-3)


def test_no_convergence_is_reported(uniform):
    with pytest.raises(NoConvergence):
        free_add_convolve(uniform, uniform, SubordinationConfig(max_iter=1, tol=1e-14))
