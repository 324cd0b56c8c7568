import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freelab.cumulants import (free_cumulants_to_moments, moments_to_free_cumulants,
                               weighted_sum_moments_oracle)
from freelab.errors import OrderTooHigh


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def is_non_crossing(part):
    label = {x: i for i, block in enumerate(part) for x in block}
    for a, b, c, d in combinations(sorted(label), 4):
        if label[a] == label[c] != label[b] == label[d]:
            return False
    return True


def brute_moments(kappa, n_max):
    """Moments by summing products of cumulants over all non-crossing partitions."""
    out = []
    for n in range(1, n_max + 1):
        total = 0.0
        for part in set_partitions(list(range(n))):
            if is_non_crossing(part):
                total += math.prod(kappa[len(b) - 1] for b in part)
        out.append(total)
    return np.array(out)


def test_non_crossing_counts_are_catalan():
    counts = [sum(is_non_crossing(p) for p in set_partitions(list(range(n)))) for n in range(1, 7)]
    assert counts == [1, 2, 5, 14, 42, 132]


def test_semicircle_cumulants():
    assert np.allclose(moments_to_free_cumulants([0, 1, 0, 2, 0, 5]), [0, 1, 0, 0, 0, 0], atol=1e-14)


def test_bernoulli_cumulants():
    kappa = moments_to_free_cumulants([0, 1, 0, 1, 0, 1])
    assert np.allclose(kappa, [0, 1, 0, -1, 0, 2], atol=1e-14)
    assert np.allclose(brute_moments(kappa, 6), [0, 1, 0, 1, 0, 1], atol=1e-12)


def test_point_mass_cumulants():
    c = 1.7
    assert np.allclose(moments_to_free_cumulants([c ** k for k in range(1, 9)]), [c] + [0] * 7, atol=1e-10)
    assert np.allclose(free_cumulants_to_moments([c, 0, 0, 0]), [c, c ** 2, c ** 3, c ** 4])


def test_catalan_from_pure_variance():
    assert np.allclose(free_cumulants_to_moments([0, 1, 0, 0, 0, 0, 0, 0]), [0, 1, 0, 2, 0, 5, 0, 14])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=1, max_size=6))
def test_recursion_equals_enumeration(kappa):
    assert np.allclose(free_cumulants_to_moments(kappa), brute_moments(kappa, len(kappa)), atol=1e-12)


def test_round_trip_random_vectors():
    rng = np.random.default_rng(7)
    for _ in range(100):
        k = rng.uniform(-1, 1, 10)
        assert np.allclose(moments_to_free_cumulants(free_cumulants_to_moments(k)), k, atol=1e-10, rtol=0)


def test_round_trip_at_top_order_is_limited_by_moment_size():
    # moments grow to ~1e6 by order 16, so one ulp of m_16 is already ~1e-10 in kappa_16
    rng = np.random.default_rng(8)
    for _ in range(100):
        k = rng.uniform(-1, 1, 16)
        m = free_cumulants_to_moments(k)
        err = np.max(np.abs(moments_to_free_cumulants(m) - k))
        assert err <= 1e-13 * max(1.0, np.max(np.abs(m)))


def test_order_cap():
    with pytest.raises(OrderTooHigh):
        moments_to_free_cumulants(np.zeros(17))
    with pytest.raises(OrderTooHigh):
        free_cumulants_to_moments(np.zeros(17))
    with pytest.raises(OrderTooHigh):
        weighted_sum_moments_oracle([np.zeros(17)], [1.0], 17)


def test_weighted_sum_examples():
    b = [0, 1, 0, 1, 0, 1]
    assert np.allclose(weighted_sum_moments_oracle([b, b], [1, 1], 6), [0, 2, 0, 6, 0, 20])
    assert np.allclose(weighted_sum_moments_oracle([b, b], [2 ** -0.5] * 2, 6), [0, 1, 0, 1.5, 0, 2.5])
    s = [0, 1, 0, 2, 0, 5, 0, 14]
    for n in (1, 3, 7):
        assert np.allclose(weighted_sum_moments_oracle([s] * n, [n ** -0.5] * n, 8), s)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-0.5, 0.5), min_size=6, max_size=6),
       st.lists(st.floats(-0.5, 0.5), min_size=6, max_size=6))
def test_additivity(k1, k2):
    m1, m2 = free_cumulants_to_moments(k1), free_cumulants_to_moments(k2)
    direct = free_cumulants_to_moments(np.add(k1, k2))
    assert np.allclose(weighted_sum_moments_oracle([m1, m2], [1, 1], 6), direct, atol=1e-12)
