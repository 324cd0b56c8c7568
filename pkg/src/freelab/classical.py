"""Classical counterparts: convolution, heat smoothing, score, Fisher information, Shannon entropy.

Densities are grid :class:`~freelab.measure.Measure` objects.  Sums of
independent variables are computed by FFT convolution on a common grid step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import signal, special

from .errors import AtomicUnsupported, DensityTooSmall
from .inequalities import CHI_TOL, InequalityReport, _report
from .measure import Measure, dilate, make_grid_measure
from .transforms import GridFunction

GAUSSIAN_ENTROPY = 0.5 * math.log(2.0 * math.pi * math.e)
SCORE_THRESHOLD = 1e-12
#: Sign ``s`` in ``int j p f = s int p' f``; integration by parts gives -1.
SCORE_SIGN = -1
GAUSSIAN_WIDTH = 10.0


def _require_grid(f: Measure):
    if not f.is_grid:
        raise AtomicUnsupported("classical routines need a grid density")


def _resample(f: Measure, h: float) -> tuple[float, np.ndarray]:
    """Density on a grid of step ``h`` covering ``f``'s window (extended to whole steps)."""
    n = int(math.ceil((f.hi - f.lo) / h - 1e-9)) + 1
    x = f.lo + h * np.arange(n)
    return f.lo, np.interp(x, f.x, f.density, right=0.0)


def classical_convolve(f: Measure, g: Measure) -> Measure:
    """Density of ``X + Y`` for independent ``X ~ f``, ``Y ~ g`` (trapezoid sum via FFT)."""
    _require_grid(f)
    _require_grid(g)
    h = min(f.h, g.h)
    lo_f, vf = _resample(f, h)
    lo_g, vg = _resample(g, h)
    wf = vf.copy()
    wf[0] *= 0.5
    wf[-1] *= 0.5
    conv = np.clip(signal.fftconvolve(wf, vg) * h, 0.0, None)
    lo = lo_f + lo_g
    return make_grid_measure(lo, lo + h * (conv.size - 1), conv)


def gaussian_kernel(t: float, h: float, width: float = GAUSSIAN_WIDTH) -> Measure:
    """Centred Gaussian of variance ``t`` on step ``h``, as cell averages of the exact law."""
    half = max(int(math.ceil(width * math.sqrt(t) / h)), 2)
    x = h * np.arange(-half, half + 1)
    s = math.sqrt(2.0 * t)
    cdf = 0.5 * special.erfc(-(np.concatenate([x - h / 2, [x[-1] + h / 2]])) / s)
    return make_grid_measure(x[0], x[-1], np.diff(cdf) / h)


def gaussian_smooth(f: Measure, t: float) -> Measure:
    """Density of ``X + sqrt(t) Z`` with ``Z`` standard normal."""
    if not t > 0:
        raise ValueError("t must be positive")
    _require_grid(f)
    return classical_convolve(f, gaussian_kernel(t, f.h))


@dataclass(frozen=True)
class Score:
    """Score on the admissible sub-window; ``mask`` marks nodes where it is defined."""

    function: GridFunction
    mask: np.ndarray
    truncated_mass: float


def _score(f: Measure, threshold: float) -> Score:
    _require_grid(f)
    d = f.density
    ok = np.zeros(d.size, bool)
    ok[1:-1] = (d[1:-1] > threshold) & (d[:-2] > threshold) & (d[2:] > threshold)
    if not ok.any():
        raise DensityTooSmall(f"density never exceeds {threshold:g} on the grid interior")
    first, last = np.flatnonzero(ok)[[0, -1]]
    idx = np.arange(first, last + 1)
    vals = np.zeros(idx.size)
    sub = ok[idx]
    vals[sub] = (d[idx[sub] + 1] - d[idx[sub] - 1]) / (2.0 * f.h) / d[idx[sub]]
    truncated = float(np.dot(f.weights[~ok], d[~ok]))
    x = f.x
    return Score(GridFunction(float(x[first]), float(x[last]), vals), sub, truncated)


def classical_score(f: Measure, threshold: float = SCORE_THRESHOLD) -> GridFunction:
    """``j = f'/f`` by central differences, on the nodes where ``f > threshold``.

    Returned on the smallest sub-window holding those nodes; nodes inside it
    where the density is below threshold carry 0.
    """
    return _score(f, threshold).function


def classical_fisher_details(f: Measure, threshold: float = SCORE_THRESHOLD) -> tuple[float, float]:
    """``(int j**2 f, mass of the nodes excluded from the score)``."""
    s = _score(f, threshold)
    first = int(round((s.function.lo - f.lo) / f.h))
    idx = np.arange(first, first + s.function.values.size)
    fisher = float(np.dot(f.weights[idx] * f.density[idx], s.function.values ** 2))
    return fisher, s.truncated_mass


def classical_fisher(f: Measure, threshold: float = SCORE_THRESHOLD) -> float:
    """``F = int (f')**2 / f`` over the admissible window."""
    return classical_fisher_details(f, threshold)[0]


def shannon_entropy(f: Measure) -> float:
    """``-int f log f`` by the trapezoid rule, with ``0 log 0 = 0``."""
    _require_grid(f)
    d = f.density
    pos = d > 0
    return float(-np.dot(f.weights[pos], d[pos] * np.log(d[pos])))


def score_relation_residual(f: Measure, poly_coeffs: Sequence[float], sign: int = SCORE_SIGN) -> float:
    """``|int j p f - sign * int p' f|`` for ``p = sum c_k x**k``."""
    s = _score(f, SCORE_THRESHOLD)
    first = int(round((s.function.lo - f.lo) / f.h))
    idx = np.arange(first, first + s.function.values.size)
    poly = np.polynomial.Polynomial(np.asarray(poly_coeffs, dtype=float))
    x = f.x
    lhs = float(np.dot(f.weights[idx] * f.density[idx], s.function.values * poly(x[idx])))
    rhs = float(np.dot(f.point_masses, poly.deriv()(x)))
    return abs(lhs - sign * rhs)


def score_sign(f: Measure, poly_coeffs: Sequence[float] = (0.0, 1.0, 0.5, 0.25)) -> int:
    """The sign ``s`` in ``{+1, -1}`` for which the score relation fits better."""
    plus = score_relation_residual(f, poly_coeffs, +1)
    minus = score_relation_residual(f, poly_coeffs, -1)
    return -1 if minus <= plus else +1


def self_convolution_sequence(f: Measure, n_max: int) -> list[tuple[int, float]]:
    """``H((X_1 + ... + X_n) / sqrt(n))`` for ``n = 1..n_max``."""
    out = []
    acc = f
    for k in range(1, n_max + 1):
        if k > 1:
            acc = classical_convolve(acc, f)
        out.append((k, shannon_entropy(dilate(acc, 1.0 / math.sqrt(k)))))
    return out


def check_classical_monotonicity(f: Measure, n_max: int, tol: float = CHI_TOL
                                 ) -> tuple[list[tuple[int, float]], InequalityReport]:
    """``H_n <= H_{n+1}`` along normalised sums, and ``H_{n_max}`` at most the
    Gaussian entropy at the variance of ``f``.
    """
    if not 2 <= n_max <= 12:
        raise ValueError("n_max must lie in [2, 12]")
    seq = self_convolution_sequence(f, n_max)
    values = [h for _, h in seq]
    bound = GAUSSIAN_ENTROPY + 0.5 * math.log(f.variance)
    sides = [(values[k + 1], values[k]) for k in range(n_max - 1)] + [(bound, values[-1])]
    slacks = [big - small for big, small in sides]
    worst = int(np.argmin(slacks))
    inputs = {"measures": [f.digest()], "n_max": n_max, "entropy": values, "bound": bound,
              "binding": "bound" if worst == n_max - 1 else f"step {worst + 1}->{worst + 2}"}
    big, small = sides[worst]
    return seq, _report("classical_monotonicity", big, small, slacks[worst], tol, False, inputs)


def check_de_bruijn(f: Measure, t: float = 0.5, dt: float = 0.01) -> tuple[float, float]:
    """``(d/dt H(f_t) by central differences, F(f_t) / 2)`` for heat-smoothed ``f_t``."""
    dh = (shannon_entropy(gaussian_smooth(f, t + dt)) - shannon_entropy(gaussian_smooth(f, t - dt))) / (2 * dt)
    return dh, 0.5 * classical_fisher(gaussian_smooth(f, t))
