"""Fisher-information and entropy inequalities for free sums, as checks with measured slack.

Every check returns an :class:`InequalityReport` whose ``slack`` is
non-negative exactly when the inequality holds, and which passes when
``slack >= -tol``.  Infinite Fisher information (atomic laws) and
``NEG_INFINITY`` entropy propagate with ``1/inf = 0`` and ``exp(-inf) = 0``;
a check decided only by such infinities passes and is marked ``vacuous``.
"""
from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .entropy import NEG_INFINITY, SEMICIRCLE_CHI, ChiValue, chi_log_energy, fisher_from_density
from .errors import DegenerateCoefficient
from .free_conv import DEFAULT_CONFIG, SubordinationConfig, free_add_convolve, weighted_free_sum
from .measure import Measure, dilate
from .parallel import parallel_map

PHI_TOL = 1e-3
CHI_TOL = 5e-3
UNIT_TOL = 1e-10
_CACHE_SIZE = 64


@dataclass(frozen=True)
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    slack: float
    tol: float
    passed: bool
    vacuous: bool = False
    inputs_digest: dict = field(default_factory=dict)

    CSV_COLUMNS = ("name", "lhs", "rhs", "slack", "tol", "pass", "vacuous")

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "slack": self.slack,
                "tol": self.tol, "pass": self.passed, "vacuous": self.vacuous,
                "inputs_digest": self.inputs_digest}


def _report(name, lhs, rhs, slack, tol, vacuous, inputs) -> InequalityReport:
    return InequalityReport(name, float(lhs), float(rhs), float(slack), float(tol),
                            bool(slack >= -tol), bool(vacuous), inputs)


@dataclass(frozen=True)
class CoefficientVector:
    """Unit vector ``a`` and optional weights ``b`` with ``sum b_j sqrt(1 - a_j**2) = 1``."""

    a: tuple
    b: Optional[tuple] = None

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        object.__setattr__(self, "a", a)
        if abs(sum(v * v for v in a) - 1.0) > UNIT_TOL:
            raise ValueError("coefficients a must satisfy sum a_j^2 = 1")
        if self.b is not None:
            b = tuple(float(v) for v in self.b)
            object.__setattr__(self, "b", b)
            if len(b) != len(a):
                raise ValueError("a and b must have equal length")
            if abs(sum(bj * math.sqrt(max(0.0, 1.0 - aj * aj)) for aj, bj in zip(a, b)) - 1.0) > UNIT_TOL:
                raise ValueError("weights b must satisfy sum b_j sqrt(1 - a_j^2) = 1")

    @classmethod
    def equal(cls, count: int) -> "CoefficientVector":
        return cls(tuple([1.0 / math.sqrt(count)] * count))

    def weights(self) -> tuple:
        """``b``, defaulting to ``b_j = sqrt(1 - a_j**2) / n`` with ``n + 1 = len(a)``."""
        if self.b is not None:
            return self.b
        n = len(self.a) - 1
        return tuple(math.sqrt(max(0.0, 1.0 - v * v)) / n for v in self.a)


class _SumCache:
    """Memoised laws of weighted free sums, keyed by input digests and coefficients.

    Terms are folded in a canonical order so permuted inputs share results.
    """

    def __init__(self, size: int = _CACHE_SIZE):
        self.size = size
        self.store: OrderedDict = OrderedDict()

    def get(self, mus: Sequence[Measure], a: Sequence[float], cfg: SubordinationConfig) -> Measure:
        terms = sorted(((m.digest(), float(c), m) for m, c in zip(mus, a) if c != 0),
                       key=lambda item: (item[0], item[1]))
        key = (tuple((d, c) for d, c, _ in terms), cfg)
        if key in self.store:
            self.store.move_to_end(key)
            return self.store[key]
        out = weighted_free_sum([m for _, _, m in terms], [c for _, c, _ in terms], cfg)
        self.store[key] = out
        if len(self.store) > self.size:
            self.store.popitem(last=False)
        return out

    def clear(self):
        self.store.clear()


SUM_CACHE = _SumCache()


def _law(mus, a, cfg) -> Measure:
    return SUM_CACHE.get(mus, a, cfg)


def _leave_one_out(mus, a, j):
    """Inputs of ``sum_{i != j} a_i X_i / sqrt(1 - a_j**2)``."""
    scale = 1.0 / math.sqrt(1.0 - a[j] ** 2)
    idx = [i for i in range(len(mus)) if i != j]
    return [mus[i] for i in idx], [a[i] * scale for i in idx]


def _digests(mus):
    return [m.digest() for m in mus]


def _phi(mu: Measure) -> float:
    return fisher_from_density(mu)


def _chi(mu: Measure) -> float:
    return chi_log_energy(mu).value


def check_fisher_inequality(mus: Sequence[Measure], coeffs: Optional[CoefficientVector] = None,
                            cfg: SubordinationConfig = DEFAULT_CONFIG, tol: float = PHI_TOL) -> InequalityReport:
    """``Phi(sum a_i X_i) <= n sum_j b_j**2 Phi(sum_{i != j} a_i X_i / sqrt(1 - a_j**2))``."""
    if len(mus) < 2:
        raise ValueError("need at least two measures")
    coeffs = coeffs or CoefficientVector.equal(len(mus))
    a, b = list(coeffs.a), list(coeffs.weights())
    if len(a) != len(mus):
        raise ValueError("need one coefficient per measure")
    n = len(mus) - 1
    terms = []
    for j in range(len(mus)):
        if abs(a[j] ** 2 - 1.0) <= UNIT_TOL:
            if b[j] != 0:
                raise DegenerateCoefficient(f"a_{j}^2 = 1 with b_{j} = {b[j]} != 0")
            continue
        if b[j] != 0:
            terms.append(j)
    lhs = _phi(_law(mus, a, cfg))
    phis = parallel_map(lambda j: _phi(_law(*_leave_one_out(mus, a, j), cfg)), terms)
    rhs = n * sum(b[j] ** 2 * p for j, p in zip(terms, phis))
    vacuous = math.isinf(rhs)
    slack = 0.0 if math.isinf(lhs) and vacuous else rhs - lhs
    inputs = {"measures": _digests(mus), "a": a, "b": b, "phi_sum": lhs,
              "phi_leave_one_out": dict(zip(map(str, terms), phis))}
    return _report("fisher_inequality", lhs, rhs, slack, tol, vacuous, inputs)


def check_free_stam(mus: Sequence[Measure], cfg: SubordinationConfig = DEFAULT_CONFIG,
                    tol: float = PHI_TOL) -> InequalityReport:
    """``n / Phi(X_1 + ... + X_{n+1}) >= sum_j 1 / Phi(sum_{i != j} X_i)``."""
    if len(mus) < 2:
        raise ValueError("need at least two measures")
    n = len(mus) - 1
    ones = [1.0] * len(mus)
    phi_all = _phi(_law(mus, ones, cfg))
    phis = parallel_map(lambda j: _phi(_law([m for i, m in enumerate(mus) if i != j], [1.0] * n, cfg)),
                        range(len(mus)))
    lhs = n / phi_all
    rhs = sum(1.0 / p for p in phis)
    vacuous = all(math.isinf(p) for p in phis)
    inputs = {"measures": _digests(mus), "phi_sum": phi_all, "phi_leave_one_out": phis}
    return _report("free_stam", lhs, rhs, lhs - rhs, tol, vacuous, inputs)


def check_chi_superadditivity(mus: Sequence[Measure], a: Sequence[float],
                              cfg: SubordinationConfig = DEFAULT_CONFIG, tol: float = CHI_TOL) -> InequalityReport:
    """``chi(sum a_i X_i) >= sum_j (1 - a_j**2)/n chi(sum_{i != j} a_i X_i / sqrt(1 - a_j**2))``."""
    a = list(CoefficientVector(tuple(a)).a)
    if len(a) != len(mus) or len(mus) < 2:
        raise ValueError("need one coefficient per measure and at least two measures")
    n = len(mus) - 1
    terms = [j for j in range(len(mus)) if abs(a[j] ** 2 - 1.0) > UNIT_TOL]
    lhs = _chi(_law(mus, a, cfg))
    chis = parallel_map(lambda j: _chi(_law(*_leave_one_out(mus, a, j), cfg)), terms)
    weights = [(1.0 - a[j] ** 2) / n for j in terms]
    vacuous = any(c == NEG_INFINITY for c in chis)
    if vacuous:
        rhs = NEG_INFINITY
        slack = 0.0 if lhs == NEG_INFINITY else math.inf
    else:
        rhs = float(sum(w * c for w, c in zip(weights, chis)))
        slack = lhs - rhs
    inputs = {"measures": _digests(mus), "a": a, "chi_sum": lhs,
              "chi_leave_one_out": dict(zip(map(str, terms), chis))}
    return _report("chi_superadditivity", lhs, rhs, slack, tol, vacuous, inputs)


def clt_sequence(mu: Measure, n_max: int, cfg: SubordinationConfig = DEFAULT_CONFIG) -> list[tuple[int, ChiValue]]:
    """``chi((X_1 + ... + X_n) / sqrt(n))`` for ``n = 1..n_max``.

    The unnormalised sums are built incrementally, ``S_n = S_{n-1} [+] mu``,
    and each is dilated by ``1/sqrt(n)``.
    """
    out = []
    acc = mu
    for k in range(1, n_max + 1):
        if k > 1:
            acc = free_add_convolve(acc, mu, cfg)
        out.append((k, chi_log_energy(dilate(acc, 1.0 / math.sqrt(k)))))
    return out


def check_clt_monotonicity(mu: Measure, n_max: int, cfg: SubordinationConfig = DEFAULT_CONFIG,
                           tol: float = CHI_TOL) -> tuple[list[tuple[int, ChiValue]], InequalityReport]:
    """``chi_n <= chi_{n+1}`` along normalised free sums, and ``chi_{n_max}`` at most the
    entropy ``log(2 pi e var)/2`` of the semicircle with the variance of ``mu``.

    The report's slack is the smallest of the step increments and the gap to
    the semicircular bound; ``lhs``/``rhs`` are the two sides of that binding
    comparison.
    """
    if not 2 <= n_max <= 12:
        raise ValueError("n_max must lie in [2, 12]")
    seq = clt_sequence(mu, n_max, cfg)
    values = [c.value for _, c in seq]
    sides = [(values[k + 1], values[k]) for k in range(n_max - 1)]
    bound = SEMICIRCLE_CHI + 0.5 * math.log(mu.variance)
    sides.append((bound, values[-1]))
    slacks = []
    for big, small in sides:
        slacks.append(math.inf if small == NEG_INFINITY else big - small)
    worst = int(np.argmin(slacks))
    big, small = sides[worst]
    vacuous = all(s == math.inf for s in slacks[:-1])
    inputs = {"measures": [mu.digest()], "n_max": n_max, "chi": values, "bound": bound,
              "binding": "bound" if worst == n_max - 1 else f"step {worst + 1}->{worst + 2}"}
    return seq, _report("clt_monotonicity", big, small, slacks[worst], tol, vacuous, inputs)


def check_entropy_power(mus: Sequence[Measure], cfg: SubordinationConfig = DEFAULT_CONFIG,
                        tol: float = CHI_TOL) -> InequalityReport:
    """``exp(2 chi(sum X_i)) >= (1/n) sum_j exp(2 chi(sum_{i != j} X_i))``.

    ``tol`` is relative to ``exp(2 chi(sum X_i))``; the report stores it in
    absolute units so that ``pass <=> slack >= -tol`` holds literally.
    """
    if len(mus) < 2:
        raise ValueError("need at least two measures")
    n = len(mus) - 1
    chi_all = _chi(_law(mus, [1.0] * len(mus), cfg))
    chis = parallel_map(lambda j: _chi(_law([m for i, m in enumerate(mus) if i != j], [1.0] * n, cfg)),
                        range(len(mus)))
    power = math.exp(2.0 * chi_all)
    powers = [math.exp(2.0 * c) for c in chis]
    rhs = sum(powers) / n
    vacuous = all(p == 0.0 for p in powers)
    inputs = {"measures": _digests(mus), "chi_sum": chi_all, "chi_leave_one_out": chis}
    return _report("entropy_power", power, rhs, power - rhs, tol * power, vacuous, inputs)
