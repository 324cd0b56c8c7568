"""Exact conversion between raw moments and free cumulants of one variable.

With ``M(z) = 1 + sum_k m_k z**k`` the free moment-cumulant relation is
``M(z) = 1 + sum_s kappa_s z**s M(z)**s``, i.e.

    m_n = sum_{s=1}^{n} kappa_s [z**(n-s)] M(z)**s,

and the coefficient on the right only involves ``m_1 .. m_{n-1}``.  Vectors
are indexed from order 1: ``m[0]`` is the first moment.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import OrderTooHigh

MAX_ORDER = 16


def _check_order(k: int):
    if k > MAX_ORDER:
        raise OrderTooHigh(f"order {k} exceeds {MAX_ORDER}")


def _power_coefficients(series: np.ndarray, n: int) -> np.ndarray:
    """Table ``P[s, j] = [z**j] M(z)**s`` for ``s, j <= n`` from the truncated series."""
    table = np.zeros((n + 1, n + 1))
    table[0, 0] = 1.0
    for s in range(1, n + 1):
        table[s] = np.convolve(table[s - 1], series[: n + 1])[: n + 1]
    return table


def free_cumulants_to_moments(kappa: Sequence[float]) -> np.ndarray:
    k = np.asarray(kappa, dtype=float)
    n = k.size
    _check_order(n)
    series = np.zeros(n + 1)
    series[0] = 1.0
    for order in range(1, n + 1):
        # table rows only need m_1..m_{order-1}, which are already in place
        table = _power_coefficients(series, order)
        series[order] = sum(k[s - 1] * table[s, order - s] for s in range(1, order + 1))
    return series[1:]


def moments_to_free_cumulants(m: Sequence[float]) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    n = m.size
    _check_order(n)
    series = np.concatenate([[1.0], m])
    table = _power_coefficients(series, n)
    kappa = np.zeros(n)
    for order in range(1, n + 1):
        kappa[order - 1] = series[order] - sum(
            kappa[s - 1] * table[s, order - s] for s in range(1, order))
    return kappa


def weighted_sum_moments_oracle(moment_vectors: Sequence[Sequence[float]], a: Sequence[float],
                                K: int) -> np.ndarray:
    """Moments ``1..K`` of ``sum a_i X_i`` for free ``X_i`` with the given moments.

    Uses ``kappa_n(sum a_i X_i) = sum a_i**n kappa_n(X_i)``.
    """
    _check_order(K)
    if len(moment_vectors) != len(a):
        raise ValueError("need one coefficient per moment vector")
    total = np.zeros(K)
    orders = np.arange(1, K + 1)
    for m, c in zip(moment_vectors, a):
        m = np.asarray(m, dtype=float)
        if m.size < K:
            raise ValueError(f"moment vector has {m.size} entries, need {K}")
        total += float(c) ** orders * moments_to_free_cumulants(m[:K])
    return free_cumulants_to_moments(total)
