"""Compactly supported probability measures on the real line.

A :class:`Measure` is either a finite list of atoms or a density sampled on a
uniform grid.  Grid densities are integrated with the trapezoid rule; the
matching "comb" weights ``point_masses`` are what every other module consumes.

Named laws built here (semicircle, uniform, arcsine, gaussian) are sampled by
cell averages, ``f_i = (F(x_i + h/2) - F(x_i - h/2)) / h`` with ``F`` the exact
CDF.  This keeps integrable edge singularities (arcsine) finite and makes the
trapezoid mass exactly one.
"""
from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import special

from .errors import (
    DuplicateAtom,
    FreeLabError,
    MassMismatch,
    NegativeDensity,
    NonPositiveMass,
    OrderTooHigh,
    SpecError,
    ZeroScale,
)

DEFAULT_N_POINTS = 8192
WINDOW_PAD = 0.01
MASS_TOL = 1e-9
MAX_MOMENT_ORDER = 32
MIN_GRID_POINTS = 16


class Kind(enum.Enum):
    ATOMIC = "atomic"
    GRID = "grid"


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Measure:
    """Immutable probability measure; build it with the ``make_*`` helpers."""

    kind: Kind
    locations: np.ndarray | None = None
    masses: np.ndarray | None = None
    lo: float = 0.0
    hi: float = 0.0
    density: np.ndarray | None = None
    diagnostics: Mapping[str, float] = field(default_factory=dict)

    @property
    def is_atomic(self) -> bool:
        return self.kind is Kind.ATOMIC

    @property
    def is_grid(self) -> bool:
        return self.kind is Kind.GRID

    @property
    def n_points(self) -> int:
        return 0 if self.density is None else self.density.size

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n_points)

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.n_points, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    @property
    def point_masses(self) -> np.ndarray:
        """Trapezoid quadrature weights times density (the grid as a comb)."""
        if self.is_atomic:
            return self.masses
        return self.weights * self.density

    @property
    def nodes(self) -> np.ndarray:
        return self.locations if self.is_atomic else self.x

    @property
    def mass(self) -> float:
        return float(np.sum(self.point_masses))

    @property
    def mean(self) -> float:
        return float(np.dot(self.point_masses, self.nodes))

    @property
    def variance(self) -> float:
        m = self.mean
        return float(np.dot(self.point_masses, (self.nodes - m) ** 2))

    @property
    def support(self) -> tuple[float, float]:
        """Closed hull of where the measure puts mass.

        For grids the hull of the strictly positive samples, widened by one
        node on each side (the piecewise-linear interpolant reaches zero there).
        """
        if self.is_atomic:
            return float(self.locations[0]), float(self.locations[-1])
        nz = np.flatnonzero(self.density > 0)
        x = self.x
        i0 = max(nz[0] - 1, 0)
        i1 = min(nz[-1] + 1, self.n_points - 1)
        return float(x[i0]), float(x[i1])

    @property
    def is_point_mass(self) -> bool:
        return self.is_atomic and self.locations.size == 1

    def digest(self) -> str:
        """Short content hash used for provenance records and caching."""
        hsh = hashlib.sha256(self.kind.value.encode())
        if self.is_atomic:
            hsh.update(self.locations.tobytes())
            hsh.update(self.masses.tobytes())
        else:
            hsh.update(np.array([self.lo, self.hi]).tobytes())
            hsh.update(self.density.tobytes())
        return hsh.hexdigest()[:16]

    def describe(self) -> dict:
        out = {"kind": self.kind.value, "digest": self.digest()}
        if self.is_atomic:
            out["n_atoms"] = int(self.locations.size)
        else:
            out.update(lo=self.lo, hi=self.hi, n_points=self.n_points)
        out["mean"] = self.mean
        out["variance"] = self.variance
        return out

    def __repr__(self) -> str:
        if self.is_atomic:
            return f"Measure(atomic, {self.locations.size} atoms)"
        return f"Measure(grid, [{self.lo:.4g}, {self.hi:.4g}], n={self.n_points})"


def _trapezoid_mass(samples: np.ndarray, lo: float, hi: float) -> float:
    h = (hi - lo) / (samples.size - 1)
    return float(h * (samples.sum() - 0.5 * (samples[0] + samples[-1])))


def make_grid_measure(lo: float, hi: float, samples: Sequence[float]) -> Measure:
    """Grid measure from non-negative samples, rescaled to unit trapezoid mass.

    The applied rescale factor is kept in ``diagnostics["rescale"]``.
    """
    samples = np.asarray(samples, dtype=float)
    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
        raise SpecError(f"need finite lo < hi, got [{lo}, {hi}]")
    if samples.ndim != 1 or samples.size < MIN_GRID_POINTS:
        raise SpecError(f"need at least {MIN_GRID_POINTS} samples")
    if not np.all(np.isfinite(samples)):
        raise SpecError("density samples must be finite")
    if np.any(samples < 0):
        raise NegativeDensity(f"min sample {samples.min():.3g} < 0")
    mass = _trapezoid_mass(samples, lo, hi)
    if not mass > 0:
        raise NonPositiveMass("density integrates to zero")
    return Measure(Kind.GRID, lo=float(lo), hi=float(hi), density=_frozen(samples / mass),
                   diagnostics={"rescale": 1.0 / mass})


def make_atomic_measure(atoms: Iterable[tuple[float, float]]) -> Measure:
    atoms = np.asarray(list(atoms), dtype=float).reshape(-1, 2)
    if atoms.shape[0] == 0:
        raise NonPositiveMass("no atoms")
    loc, mass = atoms[:, 0], atoms[:, 1]
    if not np.all(np.isfinite(atoms)):
        raise SpecError("atoms must be finite")
    if np.any(mass <= 0) or np.any(mass > 1):
        raise MassMismatch("atom masses must lie in (0, 1]")
    if abs(mass.sum() - 1.0) > MASS_TOL:
        raise MassMismatch(f"atom masses sum to {mass.sum():.12g}, not 1")
    order = np.argsort(loc, kind="stable")
    loc, mass = loc[order], mass[order]
    if np.any(np.diff(loc) == 0):
        raise DuplicateAtom("atom locations must be distinct")
    return Measure(Kind.ATOMIC, locations=_frozen(loc), masses=_frozen(mass))


def moment(mu: Measure, k: int) -> float:
    if k < 0 or k > MAX_MOMENT_ORDER:
        raise OrderTooHigh(f"moment order {k} outside [0, {MAX_MOMENT_ORDER}]")
    return float(np.dot(mu.point_masses, mu.nodes ** k))


def moments(mu: Measure, kmax: int) -> np.ndarray:
    """Raw moments of orders 1..kmax (index ``k-1`` holds order ``k``)."""
    return np.array([moment(mu, k) for k in range(1, kmax + 1)])


def dilate(mu: Measure, c: float) -> Measure:
    """Law of ``c X`` when ``X`` has law ``mu``."""
    if c == 0:
        raise ZeroScale("dilation by zero")
    if c == 1:
        return mu
    if mu.is_atomic:
        return make_atomic_measure(zip(c * mu.locations, mu.masses))
    dens = mu.density / abs(c)
    lo, hi = c * mu.lo, c * mu.hi
    if c < 0:
        lo, hi, dens = hi, lo, dens[::-1]
    return Measure(Kind.GRID, lo=lo, hi=hi, density=_frozen(dens), diagnostics=dict(mu.diagnostics))


def translate(mu: Measure, c: float) -> Measure:
    """Law of ``X + c``."""
    if mu.is_atomic:
        return make_atomic_measure(zip(mu.locations + c, mu.masses))
    return Measure(Kind.GRID, lo=mu.lo + c, hi=mu.hi + c, density=mu.density,
                   diagnostics=dict(mu.diagnostics))


def padded_window(lo: float, hi: float, pad: float = WINDOW_PAD) -> tuple[float, float]:
    w = hi - lo
    return lo - pad * w, hi + pad * w


def from_cdf(cdf, lo: float, hi: float, n_points: int = DEFAULT_N_POINTS) -> Measure:
    """Cell-averaged grid measure from a vectorised CDF."""
    x = np.linspace(lo, hi, n_points)
    h = x[1] - x[0]
    samples = (cdf(x + 0.5 * h) - cdf(x - 0.5 * h)) / h
    return make_grid_measure(lo, hi, np.clip(samples, 0.0, None))


# -- named laws, all centred ------------------------------------------------

def semicircle(variance: float = 1.0, n_points: int = DEFAULT_N_POINTS) -> Measure:
    r = 2.0 * math.sqrt(variance)

    def cdf(x):
        u = np.clip(x / r, -1.0, 1.0)
        return 0.5 + (u * np.sqrt(1.0 - u * u) + np.arcsin(u)) / np.pi

    return from_cdf(cdf, *padded_window(-r, r), n_points)


def uniform(variance: float = 1.0, n_points: int = DEFAULT_N_POINTS) -> Measure:
    a = math.sqrt(3.0 * variance)
    return from_cdf(lambda x: np.clip((x + a) / (2 * a), 0.0, 1.0), *padded_window(-a, a), n_points)


def arcsine(variance: float = 1.0, n_points: int = DEFAULT_N_POINTS) -> Measure:
    a = math.sqrt(2.0 * variance)
    return from_cdf(lambda x: 0.5 + np.arcsin(np.clip(x / a, -1.0, 1.0)) / np.pi,
                    *padded_window(-a, a), n_points)


def gaussian(variance: float = 1.0, n_points: int = DEFAULT_N_POINTS, width: float = 10.0) -> Measure:
    """Gaussian truncated to +-``width`` standard deviations."""
    s = math.sqrt(variance)
    return from_cdf(lambda x: special.ndtr(x / s), -width * s, width * s, n_points)


def bernoulli(variance: float = 1.0) -> Measure:
    s = math.sqrt(variance)
    return make_atomic_measure([(-s, 0.5), (s, 0.5)])


def point_mass(c: float = 0.0) -> Measure:
    return make_atomic_measure([(c, 1.0)])


NAMED = {
    "semicircle": semicircle,
    "uniform": uniform,
    "arcsine": arcsine,
    "gaussian": gaussian,
    "bernoulli": bernoulli,
}


def named(name: str, variance: float = 1.0, n_points: int = DEFAULT_N_POINTS) -> Measure:
    try:
        ctor = NAMED[name]
    except KeyError:
        raise SpecError(f"unknown named measure {name!r}; choose from {sorted(NAMED)}") from None
    if not variance > 0:
        raise SpecError("variance must be positive")
    if ctor is bernoulli:
        return ctor(variance)
    return ctor(variance, n_points=n_points)


def measure_from_spec(spec: Mapping, n_points: int = DEFAULT_N_POINTS) -> Measure:
    """Build a measure from its JSON spec.

    Accepted shapes::

        {"kind": "atomic", "atoms": [[x, m], ...]}
        {"kind": "grid", "lo": a, "hi": b, "density": [...]}
        {"kind": "named", "name": "semicircle", "variance": 1.0}
    """
    if not isinstance(spec, Mapping):
        raise SpecError("measure spec must be a JSON object")
    kind = spec.get("kind")
    try:
        if kind == "atomic":
            return make_atomic_measure([tuple(a) for a in spec["atoms"]])
        if kind == "grid":
            return make_grid_measure(float(spec["lo"]), float(spec["hi"]), spec["density"])
        if kind == "named":
            return named(spec["name"], float(spec.get("variance", 1.0)),
                         int(spec.get("n_points", n_points)))
    except KeyError as exc:
        raise SpecError(f"measure spec missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, FreeLabError):
            raise
        raise SpecError(f"bad measure spec: {exc}") from None
    raise SpecError(f"unknown measure kind {kind!r}")


def measure_to_spec(mu: Measure) -> dict:
    if mu.is_atomic:
        return {"kind": "atomic", "atoms": [[float(x), float(m)] for x, m in zip(mu.locations, mu.masses)]}
    return {"kind": "grid", "lo": mu.lo, "hi": mu.hi, "density": mu.density.tolist()}
