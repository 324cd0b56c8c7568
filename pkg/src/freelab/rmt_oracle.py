"""Monte Carlo moments of free sums from independently rotated diagonal matrices.

``M = sum_i a_i U_i D_i U_i^*`` with Haar unitaries ``U_i`` is asymptotically
free across ``i``, so ``tr(M^k) / dim`` estimates the ``k``-th moment of the
free sum.  Only matrix products and traces are used.

Randomness: numpy's PCG64, one child ``SeedSequence`` per trial spawned from
the user seed, so results depend only on ``(seed, trial index)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionTooSmall, UnrealizableSpec
from .measure import Measure

MIN_DIM = 64
MIN_TRIALS = 8
MAX_ORDER = 8


@dataclass(frozen=True)
class MomentEstimate:
    k: int
    mean: float
    std_error: float
    trials: int
    matrix_dim: int


def diagonal_realization(mu: Measure, dim: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """Eigenvalues of a ``dim x dim`` diagonal matrix whose spectral law approximates ``mu``.

    Atoms get multiplicities proportional to their masses (largest remainder
    rounding).  Densities use the quantiles ``F^{-1}((i + u_i) / dim)``, with
    ``u_i`` uniform draws from ``rng`` (stratified sampling, so every moment
    is unbiased) or ``u_i = 1/2`` without one.
    """
    if mu.is_atomic:
        raw = np.asarray(mu.masses) * dim
        counts = np.floor(raw).astype(int)
        short = dim - counts.sum()
        counts[np.argsort(-(raw - counts), kind="stable")[:short]] += 1
        if (counts == 0).any():
            raise UnrealizableSpec(f"an atom gets no eigenvalue at dim {dim}")
        return np.repeat(np.asarray(mu.locations, dtype=float), counts)
    x, w = mu.x, mu.point_masses
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (w[:-1] + w[1:]))])
    cdf /= cdf[-1]
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    u = 0.5 if rng is None else rng.random(dim)
    q = (np.arange(dim) + u) / dim
    return np.interp(q, cdf[keep], x[keep])


def haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar unitary: QR of a complex Ginibre matrix with ``diag(R)`` made positive."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))[None, :]


def _normalized_traces(m: np.ndarray, max_order: int) -> np.ndarray:
    """``tr(M^k) / dim`` for ``k = 1..max_order`` using ``tr(A B) = sum A * conj(B)`` for Hermitian ``B``."""
    dim = m.shape[0]
    half = (max_order + 1) // 2
    powers = [np.eye(dim), m]
    for _ in range(2, half + 1):
        powers.append(powers[-1] @ m)
    out = np.empty(max_order)
    for k in range(1, max_order + 1):
        lo, hi = k // 2, k - k // 2
        out[k - 1] = np.vdot(powers[hi], powers[lo]).real / dim
    return out


def sample_free_sum_moments(specs: Sequence[Measure], a: Sequence[float], dim: int, trials: int,
                            max_order: int, seed: int) -> list[MomentEstimate]:
    if dim < MIN_DIM:
        raise DimensionTooSmall(f"dim {dim} < {MIN_DIM}")
    if trials < MIN_TRIALS:
        raise ValueError(f"need at least {MIN_TRIALS} trials")
    if not 1 <= max_order <= MAX_ORDER:
        raise ValueError(f"max_order must lie in [1, {MAX_ORDER}]")
    if len(specs) != len(a) or not specs:
        raise ValueError("need one coefficient per measure")
    for mu in specs:
        if mu.is_atomic:
            diagonal_realization(mu, dim)
    children = np.random.SeedSequence(seed).spawn(trials)
    samples = np.empty((trials, max_order))
    for t, child in enumerate(children):
        rng = np.random.Generator(np.random.PCG64(child))
        m = np.zeros((dim, dim), dtype=complex)
        for mu, c in zip(specs, a):
            d = float(c) * diagonal_realization(mu, dim, rng)
            u = haar_unitary(rng, dim)
            m += (u * d[None, :]) @ u.conj().T
        m = 0.5 * (m + m.conj().T)
        samples[t] = _normalized_traces(m, max_order)
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / np.sqrt(trials)
    return [MomentEstimate(k + 1, float(mean[k]), float(se[k]), trials, dim) for k in range(max_order)]
