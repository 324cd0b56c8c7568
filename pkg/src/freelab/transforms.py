"""Cauchy transforms, Stieltjes inversion and the finite Hilbert transform.

Conventions: ``G(z) = int dmu(t) / (z - t)`` for ``Im z > 0`` (so ``Im G < 0``),
and ``(Hf)(x) = (1/pi) p.v. int f(y) / (x - y) dy``, which makes
``G(x + i0) = pi Hf(x) - i pi f(x)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import signal

from . import _kernels
from .errors import AtomDetected, AtomicUnsupported, MassLoss
from .measure import Measure, make_grid_measure

#: Richardson heights in units of the grid step.
EPS_MULTIPLES = (2.0, 4.0, 8.0)
ATOM_THRESHOLD = 0.05
MASS_WINDOW = (0.99, 1.01)


def upper_sqrt(w):
    """Square root branch with non-negative imaginary part."""
    s = np.sqrt(np.asarray(w, dtype=complex))
    return np.where(s.imag < 0, -s, s)


class CauchyEvaluator:
    """``z -> G(z)`` on the upper half plane, with a declared support window.

    ``min_height`` is the smallest ``Im z`` at which the evaluator meets its
    ``accuracy`` bound; Stieltjes inversion never probes below it.
    """

    lo: float
    hi: float
    accuracy: float = 1e-10
    min_height: float = 0.0

    def with_derivative(self, z):
        raise NotImplementedError

    def __call__(self, z):
        return self.with_derivative(z)[0]

    def schedule(self, x: np.ndarray, heights: Sequence[float]) -> list[np.ndarray]:
        """``G(x + i eps)`` for each height, largest first is fine for callers."""
        return [self(x + 1j * eps) for eps in heights]


class AtomicCauchy(CauchyEvaluator):
    def __init__(self, mu: Measure):
        self.nodes = np.asarray(mu.locations)
        self.masses = np.asarray(mu.masses)
        self.lo, self.hi = mu.support

    def with_derivative(self, z):
        z = np.asarray(z, dtype=complex)
        g, dg = _kernels.direct(z, self.nodes, self.masses)
        return g.reshape(z.shape), dg.reshape(z.shape)


class GridCauchy(CauchyEvaluator):
    """Cauchy transform of the trapezoid comb of a grid density.

    At heights of two grid steps the comb and the continuous density differ
    by a ripple of relative size ``exp(-2 pi Im z / h)`` (about 3.5e-6).
    """

    def __init__(self, mu: Measure):
        self.tree = _kernels.CombTree(mu.lo, mu.h, mu.point_masses)
        self.lo, self.hi = mu.support
        self.min_height = 2.0 * mu.h
        self.accuracy = 1e-5

    def with_derivative(self, z):
        z = np.asarray(z, dtype=complex)
        g, dg = self.tree.evaluate(z)
        return g.reshape(z.shape), dg.reshape(z.shape)


class ClosedFormCauchy(CauchyEvaluator):
    """Wrap an analytic expression; the derivative is taken by central differences."""

    def __init__(self, func: Callable, lo: float, hi: float, accuracy: float = 1e-12):
        self.func = func
        self.lo, self.hi = lo, hi
        self.accuracy = accuracy

    def __call__(self, z):
        return self.func(np.asarray(z, dtype=complex))

    def with_derivative(self, z):
        z = np.asarray(z, dtype=complex)
        step = 1e-6 * np.maximum(1.0, np.abs(z))
        return self.func(z), (self.func(z + step) - self.func(z - step)) / (2 * step)


def semicircle_cauchy(variance: float = 1.0) -> ClosedFormCauchy:
    r = 2.0 * np.sqrt(variance)
    return ClosedFormCauchy(lambda z: 2.0 * (z - upper_sqrt(z * z - r * r)) / (r * r), -r, r)


def arcsine_cauchy(a: float = 2.0) -> ClosedFormCauchy:
    return ClosedFormCauchy(lambda z: 1.0 / upper_sqrt(z * z - a * a), -a, a)


def cauchy_transform(mu: Measure) -> CauchyEvaluator:
    if mu.is_atomic:
        return AtomicCauchy(mu)
    return GridCauchy(mu)


def richardson(values: Sequence[np.ndarray]) -> np.ndarray:
    """Extrapolate samples taken at heights eps, 2 eps, 4 eps to eps -> 0.

    Cancels the linear and quadratic terms of the expansion in eps.
    """
    f1, f2, f4 = values
    return (8.0 * f1 - 6.0 * f2 + f4) / 3.0


def _pick_root(g0, ref):
    return np.where(np.abs(g0 - ref) <= np.abs(g0 + ref), g0, -g0)


def boundary_values(values: Sequence[np.ndarray], scale: float) -> tuple[np.ndarray, np.ndarray]:
    """Boundary values ``G(x + i0)`` from samples at heights eps, 2 eps, 4 eps.

    Two extrapolations are formed per node: of ``G`` itself, and of ``G**-2``,
    which is analytic at inverse square root edges (``G ~ A / sqrt(z - e)``)
    where ``G`` is not, but has poles where ``G`` vanishes inside gaps.  Each
    node keeps the route whose three-point and two-point extrapolations agree
    best, measured relative to the route's own magnitude (floored by ``1/scale``
    for ``G`` and ``scale**2`` for ``G**-2``, ``scale`` being the window width).
    Returns the boundary values and the mask of nodes on the ``G**-2`` route.
    """
    g1, g2, g4 = values
    g_rich = richardson(values)
    g_err = np.abs(g_rich - (2.0 * g1 - g2)) / (np.abs(g_rich) + 1.0 / scale)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        u = [v ** -2 for v in values]
        u_rich = richardson(u)
        u_err = np.abs(u_rich - (2.0 * u[0] - u[1])) / (np.abs(u_rich) + scale ** 2)
        g_from_u = _pick_root(u_rich ** -0.5, g1)
    use_u = np.isfinite(g_from_u) & (u_err < g_err)
    return np.where(use_u, g_from_u, g_rich), use_u


def segment_integrals(g0: np.ndarray, use_u: np.ndarray, h: float) -> np.ndarray:
    """``int G(x + i0) dx`` over each grid segment ``[x_i, x_{i+1}]``.

    Trapezoid where ``G`` is treated as linear; where either end is on the
    ``G**-2`` route, ``G**-2`` is taken linear instead, which integrates to
    ``2 h / (1/G_i + 1/G_{i+1})`` and is exact at an inverse square root edge.
    """
    trap = 0.5 * h * (g0[:-1] + g0[1:])
    harm_mask = use_u[:-1] | use_u[1:]
    out = trap.copy()
    if harm_mask.any():
        a, b = g0[:-1][harm_mask], g0[1:][harm_mask]
        with np.errstate(divide="ignore", invalid="ignore"):
            harm = 2.0 * h * a * b / (a + b)
        out[harm_mask] = np.where(np.isfinite(harm), harm, trap[harm_mask])
    return out


def stieltjes_invert(g: CauchyEvaluator, lo: float, hi: float, n_points: int) -> Measure:
    """Density ``-Im G(x + i0) / pi`` on ``linspace(lo, hi, n_points)``.

    ``G`` is sampled at heights ``eps * (1, 2, 4)`` with ``eps = 2 h`` (``h``
    the grid step, raised to half the evaluator's ``min_height`` when that is
    larger) and extrapolated by :func:`boundary_values`.  Node values are
    cell averages built from :func:`segment_integrals`, half of each adjacent
    segment's mass per node, so the trapezoid mass equals the integrated mass.
    Slightly negative values are clipped before renormalising.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    if lo > g.lo or hi < g.hi:
        raise ValueError(f"window [{lo}, {hi}] does not contain support [{g.lo}, {g.hi}]")
    x = np.linspace(lo, hi, n_points)
    h = x[1] - x[0]
    step = max(h, 0.5 * g.min_height)
    heights = [m * step for m in EPS_MULTIPLES]
    values = g.schedule(x, heights)
    atom_score = float(np.max(heights[0] * np.abs(values[0].imag)))
    if atom_score > ATOM_THRESHOLD:
        raise AtomDetected(f"eps*|Im G| reaches {atom_score:.3g} > {ATOM_THRESHOLD}")
    g0, use_u = boundary_values(values, hi - lo)
    seg = np.clip(-segment_integrals(g0, use_u, h).imag / np.pi, 0.0, None)
    dens = np.zeros(n_points)
    dens[:-1] += 0.5 * seg / h
    dens[1:] += 0.5 * seg / h
    dens[0] *= 2.0
    dens[-1] *= 2.0
    mass = float(seg.sum())
    if not MASS_WINDOW[0] <= mass <= MASS_WINDOW[1]:
        raise MassLoss(f"inverted mass {mass:.5f} outside {MASS_WINDOW}")
    out = make_grid_measure(lo, hi, dens)
    out.diagnostics.update(renormalization=1.0 / mass, atom_score=atom_score, eps=heights[0],
                           singular_route_nodes=int(use_u.sum()))
    return out


@dataclass(frozen=True)
class GridFunction:
    """Real function sampled on a measure's grid."""

    lo: float
    hi: float
    values: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.values.size)

    def __call__(self, t):
        return np.interp(t, self.x, self.values)


def _xlogx_kernel(n: int) -> np.ndarray:
    m = np.arange(-n, n + 1, dtype=float)
    out = np.zeros_like(m)
    nz = m != 0
    out[nz] = m[nz] * np.log(np.abs(m[nz]))
    return out


def hilbert_transform(mu: Measure) -> GridFunction:
    """Exact Hilbert transform of the piecewise-linear interpolant of the density.

    With ``f`` extended by zero one node beyond the window, the second
    difference ``D2 f`` carries all of ``f''``, and
    ``Hf(x_i) = (1/pi) sum_k D2f_k (i - k) log|i - k|``; the ``log h`` part
    drops out because ``D2`` annihilates linear sequences.  This is the
    singular-cell rule with the exact correction for the linear integrand,
    summed in O(N log N).
    """
    if not mu.is_grid:
        raise AtomicUnsupported("Hilbert transform needs a grid density")
    n = mu.n_points
    fpad = np.concatenate([[0.0, 0.0], mu.density, [0.0, 0.0]])
    d2 = fpad[:-2] - 2.0 * fpad[1:-1] + fpad[2:]          # nodes -1 .. n
    conv = signal.fftconvolve(d2, _xlogx_kernel(n + 1))   # index = (k+1) + (m + n + 1)
    # value at node i is sum_k d2[k] * phi(i - k), i.e. conv at (i + 1) + (n + 1)
    vals = conv[n + 2: 2 * n + 2] / np.pi
    return GridFunction(mu.lo, mu.hi, vals)
