"""Free additive convolution by subordination.

For ``mu [+] nu`` the subordination function ``w1`` solves

    w1 = z + h_nu(z + h_mu(w1)),     h(w) = 1/G(w) - w,

and ``G_{mu [+] nu}(z) = G_mu(w1(z))``.  Semicircular smoothing (the law of
``X + sqrt(t) S``) is the special case ``w = z - t G_mu(w)``.

Both equations are solved on the whole probe set at once.  Each target walks
down a geometric ladder of heights from far above the support, warm-starting
from the previous rung; on every rung the damped fixed-point map is the
fallback for a safeguarded Newton step (a Newton step is kept only if it stays
above the target's height and lowers the residual).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NoConvergence
from .measure import DEFAULT_N_POINTS, Measure, dilate, padded_window, translate
from .transforms import CauchyEvaluator, cauchy_transform, stieltjes_invert


@dataclass(frozen=True)
class SubordinationConfig:
    max_iter: int = 2000
    tol: float = 1e-10
    damping: float = 0.5
    n_points: int = DEFAULT_N_POINTS

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.max_iter < 1 or self.n_points < 16:
            raise ValueError("max_iter >= 1 and n_points >= 16 required")


DEFAULT_CONFIG = SubordinationConfig()
#: Height ratio between consecutive continuation rungs.
LADDER_RATIO = 4.0


class _SubordinatedCauchy(CauchyEvaluator):
    """Cauchy transform defined through a subordination fixed point."""

    cfg: SubordinationConfig
    top: float

    def _residual(self, omega, z):
        """Return (residual, d residual / d omega, fixed-point image, G)."""
        raise NotImplementedError

    def _solve_rung(self, omega, z, final: bool):
        cfg = self.cfg
        r, dr, fp, g = self._residual(omega, z)
        fallback = np.zeros(omega.shape, bool)
        for _ in range(cfg.max_iter):
            err = np.abs(r)
            active = err > cfg.tol * (1.0 + np.abs(omega))
            if not active.any():
                break
            idx = np.flatnonzero(active)
            om, zz = omega[idx], z[idx]
            with np.errstate(divide="ignore", invalid="ignore"):
                newton = om - r[idx] / dr[idx]
            fp_step = om + cfg.damping * (fp[idx] - om)
            use_fp = fallback[idx] | ~np.isfinite(newton) | (newton.imag <= zz.imag)
            cand = np.where(use_fp, fp_step, newton)
            r2, dr2, fp2, g2 = self._residual(cand, zz)
            worse = ~use_fp & ~(np.abs(r2) < err[idx])
            keep = ~worse
            k = idx[keep]
            omega[k], r[k], dr[k], fp[k], g[k] = cand[keep], r2[keep], dr2[keep], fp2[keep], g2[keep]
            fallback[idx] = worse
        else:
            if final:
                worst = float(np.max(np.abs(r) / (1.0 + np.abs(omega))))
                raise NoConvergence(f"subordination residual {worst:.3g} > tol {cfg.tol:g} "
                                    f"after {cfg.max_iter} iterations")
        return omega, g

    def _ladder(self, x, y_final):
        """Heights from ``self.top`` down to ``y_final`` by factors of ``LADDER_RATIO``."""
        n = max(0, int(math.ceil(math.log(max(self.top / y_final, 1.0), LADDER_RATIO))))
        return [y_final * LADDER_RATIO ** k for k in range(n, 0, -1)]

    def schedule(self, x: np.ndarray, heights: Sequence[float]) -> list[np.ndarray]:
        x = np.asarray(x, dtype=float)
        hs = sorted(heights, reverse=True)
        path = self._ladder(x, hs[0]) + hs
        omega = x + 1j * path[0]
        found = {}
        for y in path:
            z = x + 1j * y
            omega, g = self._solve_rung(omega, z, final=y in hs)
            if y in hs:
                found[y] = g.copy()
        return [found[y] for y in heights]

    def with_derivative(self, z):
        raise NotImplementedError("subordinated evaluators provide values only")

    def __call__(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.empty(z.shape, complex)
        flat_z, flat_out = z.ravel(), out.ravel()
        for y in np.unique(flat_z.imag):
            sel = flat_z.imag == y
            flat_out[sel] = self.schedule(flat_z.real[sel], [y])[0]
        return out


class FreeSumCauchy(_SubordinatedCauchy):
    def __init__(self, mu: Measure, nu: Measure, cfg: SubordinationConfig = DEFAULT_CONFIG):
        self.g_mu = cauchy_transform(mu)
        self.g_nu = cauchy_transform(nu)
        self.cfg = cfg
        self.lo = self.g_mu.lo + self.g_nu.lo
        self.hi = self.g_mu.hi + self.g_nu.hi
        self.min_height = max(self.g_mu.min_height, self.g_nu.min_height)
        self.top = 4.0 * max(1.0, self.hi - self.lo)

    def _residual(self, omega, z):
        gm, dgm = self.g_mu.with_derivative(omega)
        h_mu = 1.0 / gm - omega
        dh_mu = -dgm / gm ** 2 - 1.0
        omega2 = z + h_mu
        gn, dgn = self.g_nu.with_derivative(omega2)
        h_nu = 1.0 / gn - omega2
        dh_nu = -dgn / gn ** 2 - 1.0
        image = z + h_nu
        return omega - image, 1.0 - dh_nu * dh_mu, image, gm


class SmoothedCauchy(_SubordinatedCauchy):
    def __init__(self, mu: Measure, t: float, cfg: SubordinationConfig = DEFAULT_CONFIG):
        self.g_mu = cauchy_transform(mu)
        self.t = float(t)
        self.cfg = cfg
        r = 2.0 * math.sqrt(self.t)
        self.lo, self.hi = self.g_mu.lo - r, self.g_mu.hi + r
        self.min_height = self.g_mu.min_height
        self.top = 4.0 * max(1.0, self.hi - self.lo)

    def _residual(self, omega, z):
        gm, dgm = self.g_mu.with_derivative(omega)
        image = z - self.t * gm
        return omega - image, 1.0 + self.t * dgm, image, gm


def _invert(g: _SubordinatedCauchy, cfg: SubordinationConfig) -> Measure:
    lo, hi = padded_window(g.lo, g.hi)
    return stieltjes_invert(g, lo, hi, cfg.n_points)


def free_add_convolve(mu: Measure, nu: Measure, cfg: SubordinationConfig = DEFAULT_CONFIG) -> Measure:
    """Law of ``X + Y`` for free ``X ~ mu``, ``Y ~ nu``, as a grid measure.

    A point-mass summand is applied exactly as a translation.
    """
    if nu.is_point_mass:
        return translate(mu, float(nu.locations[0]))
    if mu.is_point_mass:
        return translate(nu, float(mu.locations[0]))
    out = _invert(FreeSumCauchy(mu, nu, cfg), cfg)
    out.diagnostics["variance_target"] = mu.variance + nu.variance
    return out


def semicircular_smooth(mu: Measure, t: float, cfg: SubordinationConfig = DEFAULT_CONFIG) -> Measure:
    """Law of ``X + sqrt(t) S`` with ``S`` standard semicircular, free from ``X``."""
    if not t > 0:
        raise ValueError("smoothing time t must be positive")
    out = _invert(SmoothedCauchy(mu, t, cfg), cfg)
    out.diagnostics["variance_target"] = mu.variance + t
    return out


def weighted_free_sum(mus: Sequence[Measure], a: Sequence[float],
                      cfg: SubordinationConfig = DEFAULT_CONFIG) -> Measure:
    """Law of ``sum_i a_i X_i`` for free ``X_i ~ mus[i]`` (left fold, zero weights dropped)."""
    if len(mus) != len(a) or not mus:
        raise ValueError("need equally many measures and coefficients, at least one")
    terms = [dilate(m, float(c)) for m, c in zip(mus, a) if c != 0]
    if not terms:
        raise ValueError("all coefficients are zero")
    acc = terms[0]
    for term in terms[1:]:
        acc = free_add_convolve(acc, term, cfg)
    return acc
