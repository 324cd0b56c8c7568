"""Free entropy, free Fisher information and the conjugate variable of one variable.

Grid densities are read as the piecewise-linear interpolant of their samples.
For that interpolant the logarithmic energy is a quadratic form in the nodal
values whose Toeplitz kernel is known in closed form, so the double integral
(including the integrable diagonal) is exact up to rounding.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, signal

from .errors import AtomicUnsupported, InvalidMeasure
from .free_conv import DEFAULT_CONFIG, SubordinationConfig, semicircular_smooth
from .measure import Measure, moments
from .parallel import parallel_map
from .transforms import GridFunction, hilbert_transform

NEG_INFINITY = float("-inf")
CHI_CONSTANT = 0.75 + 0.5 * math.log(2.0 * math.pi)
#: ``Phi = FISHER_CONSTANT * int f**3``, the value that gives the standard semicircle Phi = 1.
FISHER_CONSTANT = 4.0 * math.pi ** 2 / 3.0
SEMICIRCLE_CHI = 0.5 * math.log(2.0 * math.pi * math.e)
MAX_POLY_DEGREE = 8
#: Beyond this lag the energy kernel is evaluated by its asymptotic series.
_KERNEL_SWITCH = 16


class ChiMethod(enum.Enum):
    LOG_ENERGY = "log_energy"
    FISHER_FLOW = "fisher_flow"


@dataclass(frozen=True)
class ChiValue:
    value: float
    method: ChiMethod
    estimated_error: float
    details: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def is_finite(self) -> bool:
        return self.value != NEG_INFINITY

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class FlowQuadratureConfig:
    t_cut: float = 50.0
    n_t: int = 32
    t_min: float = 1e-4
    subordination: SubordinationConfig = DEFAULT_CONFIG

    def __post_init__(self):
        if self.t_cut < 10:
            raise ValueError("t_cut must be at least 10")
        if self.n_t < 20:
            raise ValueError("n_t must be at least 20")
        if not 0 < self.t_min < self.t_cut:
            raise ValueError("need 0 < t_min < t_cut")


def _spline_energy_kernel(n: int) -> np.ndarray:
    """``k(m) = int log|m - u| B(u) du`` for lags ``-n..n``, ``B`` the unit cubic B-spline.

    ``B`` is the autocorrelation of the unit hat, so ``sum f_i f_j (log h + k(i - j)) h**2``
    is the log-energy of the hat interpolant.  Small lags use the fourth central
    difference of ``R(u) = u**4 log|u| / 24 - 25 u**4 / 288`` (``R'''' = log|u|``);
    large lags use ``log m - 1 / (6 m**2) - 3 / (40 m**4) - 17 / (252 m**6)`` from the
    moments of ``B``.
    """
    m = np.abs(np.arange(-n, n + 1, dtype=float))
    out = np.empty_like(m)
    big = m >= _KERNEL_SWITCH
    mb = m[big]
    out[big] = np.log(mb) - 1.0 / (6.0 * mb ** 2) - 3.0 / (40.0 * mb ** 4) - 17.0 / (252.0 * mb ** 6)

    def r(u):
        u = np.abs(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = u ** 4 * np.log(u) / 24.0 - 25.0 * u ** 4 / 288.0
        return np.where(u == 0, 0.0, val)

    ms = m[~big]
    out[~big] = r(ms + 2) - 4 * r(ms + 1) + 6 * r(ms) - 4 * r(ms - 1) + r(ms - 2)
    return out


def _log_energy(values: np.ndarray, h: float) -> float:
    n = values.size
    p = values * h
    conv = signal.fftconvolve(p, _spline_energy_kernel(n - 1), mode="valid")
    total = p.sum()
    return float(np.dot(p, conv) + math.log(h) * total * total)


def chi_log_energy(mu: Measure) -> ChiValue:
    """Free entropy ``int int log|s - t| dmu dmu + 3/4 + log(2 pi) / 2``.

    Atomic measures give ``NEG_INFINITY``.  The error estimate compares the
    value against the same rule on every other node (second-order scheme).
    """
    if mu.is_atomic:
        return ChiValue(NEG_INFINITY, ChiMethod.LOG_ENERGY, 0.0)
    f = mu.density
    energy = _log_energy(f, mu.h)
    coarse = f[::2] / (mu.h * np.sum(f[::2]) * 2.0)
    energy_coarse = _log_energy(coarse, 2.0 * mu.h)
    err = abs(energy - energy_coarse) / 3.0
    return ChiValue(energy + CHI_CONSTANT, ChiMethod.LOG_ENERGY, err, {"log_energy": energy})


def fisher_from_density(mu: Measure) -> float:
    """``FISHER_CONSTANT * int f**3`` by the trapezoid rule; ``inf`` for atomic measures."""
    if mu.is_atomic:
        return math.inf
    return float(FISHER_CONSTANT * np.dot(mu.weights, mu.density ** 3))


def conjugate_variable(mu: Measure) -> GridFunction:
    """``J = 2 pi Hf``, the free score of a grid density."""
    if not mu.is_grid:
        raise AtomicUnsupported("conjugate variable needs a grid density")
    hf = hilbert_transform(mu)
    return GridFunction(hf.lo, hf.hi, 2.0 * math.pi * hf.values)


def fisher_from_conjugate(mu: Measure) -> float:
    """``||J||^2`` in ``L2(mu)``; agrees with :func:`fisher_from_density`."""
    j = conjugate_variable(mu)
    return float(np.dot(mu.point_masses, j.values ** 2))


def _difference_quotient_pairing(coeffs: np.ndarray, m: np.ndarray) -> float:
    """``int int (p(s) - p(u)) / (s - u) dmu dmu`` from moments ``m[0..deg-1]``.

    ``(s**n - u**n) / (s - u) = sum_{k<n} s**k u**(n-1-k)``, which also equals
    ``p'(s)`` on the diagonal.
    """
    total = 0.0
    for n in range(1, coeffs.size):
        total += coeffs[n] * float(np.dot(m[:n], m[n - 1::-1]))
    return total


def conjugate_relation_residual(mu: Measure, poly_coeffs: Sequence[float]) -> float:
    """``|<J, p> - <1 x 1, dp>| / (1 + |<1 x 1, dp>|)`` for ``p = sum c_k x**k``."""
    if not mu.is_grid:
        raise AtomicUnsupported("conjugate relation needs a grid density")
    c = np.asarray(poly_coeffs, dtype=float)
    if c.size - 1 > MAX_POLY_DEGREE:
        raise ValueError(f"polynomial degree at most {MAX_POLY_DEGREE}")
    j = conjugate_variable(mu)
    lhs = float(np.dot(mu.point_masses, j.values * np.polynomial.polynomial.polyval(mu.x, c)))
    m = np.concatenate([[1.0], moments(mu, max(c.size - 1, 1))])
    rhs = _difference_quotient_pairing(c, m)
    return abs(lhs - rhs) / (1.0 + abs(rhs))


def _flow_nodes(cfg: FlowQuadratureConfig) -> np.ndarray:
    return np.geomspace(cfg.t_min, cfg.t_cut, cfg.n_t)


def _log_quadratures(g: np.ndarray, t: np.ndarray) -> tuple[float, float]:
    """Simpson and trapezoid values of ``int g dt`` taken in the variable ``log t``."""
    u, gt = np.log(t), g * t
    return float(integrate.simpson(gt, x=u)), float(integrate.trapezoid(gt, x=u))


def chi_via_fisher_flow(mu: Measure, cfg: FlowQuadratureConfig = FlowQuadratureConfig()) -> ChiValue:
    """Free entropy from the integrated Fisher information along semicircular smoothing.

    ``chi = (1/2) int_0^inf (1/(1+t) - Phi(X + sqrt(t) S)) dt + log(2 pi e) / 2``
    on log-spaced nodes in ``[t_min, t_cut]`` (Simpson in ``log t``), the
    segment ``[0, t_min]`` by the trapezoid rule when ``mu`` has a density
    (dropped for atomic ``mu``, which then yields the entropy of the
    ``t_min``-smoothed law), and the tail beyond ``t_cut`` from
    ``Phi_t ~ 1/(t + var)``.
    """
    var = mu.variance
    if not 0.25 <= var <= 4.0:
        raise InvalidMeasure(f"variance {var:.4g} outside [0.25, 4] for the flow quadrature")
    t = _flow_nodes(cfg)
    phis = np.array(parallel_map(
        lambda s: fisher_from_density(semicircular_smooth(mu, float(s), cfg.subordination)), t))
    g = 0.5 * (1.0 / (1.0 + t) - phis)
    body, body_trap = _log_quadratures(g, t)
    head = 0.0
    if mu.is_grid:
        head = 0.5 * cfg.t_min * (0.5 * (1.0 - fisher_from_density(mu)) + g[0])
    tail = 0.5 * math.log((cfg.t_cut + var) / (cfg.t_cut + 1.0))
    # Phi_t - 1/(t + var) decays like t**-3, so its tail integral is about t_cut/2 times its last value
    tail_err = 0.25 * cfg.t_cut * abs(phis[-1] - 1.0 / (cfg.t_cut + var))
    err = abs(body - body_trap) + tail_err
    value = body + head + tail + SEMICIRCLE_CHI
    return ChiValue(value, ChiMethod.FISHER_FLOW, err,
                    {"t": t.tolist(), "phi": phis.tolist(), "integrand": g.tolist(), "tail": tail})
