"""Characteristic triplets, cumulants and the characteristic exponent."""

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from ..errors import ModelError, MomentDoesNotExist
from .measure import LevyMeasure

MAX_CUMULANT_ORDER = 62


class LatticeCramerWarning(UserWarning):
    """Cramer's condition was declared for a model with no continuous part."""


@dataclass(frozen=True)
class LevyTriplet:
    """Characteristic triplet (sigma2, rho, mu) in the truncation-at-1 convention.

    ``cramer_declared`` records the user's assertion that Cramer's
    condition holds; ``density_declared`` that X_t has a density for every
    t > 0 (implied anyway when ``sigma2 > 0``).
    """

    sigma2: float = 0.0
    rho: float = 0.0
    measure: LevyMeasure = field(default_factory=LevyMeasure)
    cramer_declared: bool = False
    density_declared: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sigma2", float(self.sigma2))
        object.__setattr__(self, "rho", float(self.rho))
        if not (math.isfinite(self.sigma2) and self.sigma2 >= 0.0):
            raise ModelError(f"sigma2 must be finite and >= 0, got {self.sigma2}")
        if not math.isfinite(self.rho):
            raise ModelError(f"rho must be finite, got {self.rho}")
        if self.sigma2 == 0.0 and not self.measure.has_density and self.cramer_declared:
            warnings.warn(
                "Cramer's condition declared for a model without Gaussian part or "
                "jump density; lattice laws violate it",
                LatticeCramerWarning,
                stacklevel=3,
            )

    @property
    def has_density(self):
        return self.sigma2 > 0.0 or self.density_declared

    def mean(self, t=1.0):
        """E X_t = t * (rho + int_{|u|>1} u mu(du))."""
        return t * (self.rho + self.measure.large_jump_mean())

    def variance(self, t=1.0):
        return cumulant(self, 2, t)

    def centered(self):
        """Same triplet with the drift chosen so that E X_1 = 0."""
        return replace(self, rho=-self.measure.large_jump_mean())

    def to_dict(self):
        d = {"sigma2": self.sigma2, "rho": self.rho}
        d.update(self.measure.to_dict())
        d["cramer_declared"] = self.cramer_declared
        d["density_declared"] = self.density_declared
        return d


@lru_cache(maxsize=256)
def _moment_sweep(measure):
    """int u^k mu(du) for k = 2..k_max, k_max the highest existing order <= 62.

    One vector quadrature per measure keeps every caller's values identical.
    """
    top = MAX_CUMULANT_ORDER
    for piece in measure.pieces:
        while top >= 2 and not piece.moment_exists(top):
            top -= 1
    if top < 2:
        return np.zeros(0)
    vals = measure.moments(np.arange(2, top + 1))
    vals.setflags(write=False)
    return vals


def _unit_moments(measure, max_order):
    vals = _moment_sweep(measure)
    if max_order - 1 > vals.shape[0]:
        raise MomentDoesNotExist(
            f"moment of order {vals.shape[0] + 2} of the Levy measure does not exist"
        )
    return vals[: max_order - 1]


def _check_order(order):
    if isinstance(order, bool) or int(order) != order:
        raise ValueError(f"cumulant order must be an integer, got {order!r}")
    order = int(order)
    if order < 2:
        raise ValueError("cumulants of order < 2 are not exposed; centering is done by standardize()")
    if order > MAX_CUMULANT_ORDER:
        raise ValueError(f"cumulant order {order} exceeds {MAX_CUMULANT_ORDER}")
    return order


def _check_time(t):
    t = float(t)
    if not (t > 0.0 and math.isfinite(t)):
        raise ValueError(f"time must be positive and finite, got {t}")
    return t


def cumulant(triplet, order, t=1.0):
    """gamma_order of X_t = t * (int u^order mu(du) + [order == 2] sigma2)."""
    order = _check_order(order)
    t = _check_time(t)
    value = float(_unit_moments(triplet.measure, order)[order - 2])
    if order == 2:
        value += triplet.sigma2
    return t * value


@dataclass(frozen=True)
class CumulantSet:
    """Cumulants gamma_2..gamma_K of X_t with scale V = sqrt(gamma_2).

    ``gammas[j]`` holds the cumulant of order ``j + 2``. ``triplet`` is the
    source model when known; the exact-series gates need it.
    """

    t: float
    gammas: tuple
    triplet: LevyTriplet = None
    V: float = field(init=False)
    lambdas: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "t", _check_time(self.t))
        gammas = tuple(float(g) for g in self.gammas)
        if not gammas:
            raise ModelError("a cumulant set needs at least gamma_2")
        if not all(math.isfinite(g) for g in gammas):
            raise ModelError("cumulants must be finite")
        if not gammas[0] > 0.0:
            raise ModelError(f"gamma_2 must be positive (degenerate law), got {gammas[0]}")
        V = math.sqrt(gammas[0])
        lambdas = (1.0,) + tuple(g / V ** (j + 3) for j, g in enumerate(gammas[1:]))
        object.__setattr__(self, "gammas", gammas)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "lambdas", lambdas)

    @classmethod
    def from_cumulants(cls, gammas, t=1.0, triplet=None):
        """Build from ``{order: gamma}`` or a sequence starting at order 2."""
        if isinstance(gammas, dict):
            top = max(gammas)
            seq = [float(gammas.get(k, 0.0)) for k in range(2, top + 1)]
        else:
            seq = list(gammas)
        return cls(t=t, gammas=tuple(seq), triplet=triplet)

    @property
    def max_order(self):
        return len(self.gammas) + 1

    def gamma(self, order):
        self._need(order)
        return self.gammas[order - 2]

    def lam(self, order):
        """Scaled cumulant lambda_order = gamma_order / V^order."""
        self._need(order)
        return self.lambdas[order - 2]

    def _need(self, order):
        if not 2 <= order <= self.max_order:
            raise ValueError(
                f"cumulant of order {order} not available (set covers 2..{self.max_order})"
            )

    def at_time(self, t):
        """Rescale to time t using gamma_k(t) proportional to t."""
        t = _check_time(t)
        ratio = t / self.t
        return CumulantSet(t=t, gammas=tuple(g * ratio for g in self.gammas), triplet=self.triplet)

    @property
    def is_gaussian(self):
        return all(g == 0.0 for g in self.gammas[1:])


def cumulant_set(triplet, nu_max, t=1.0):
    """Cumulants of X_t up to order nu_max + 2, enough for Q_1..Q_nu_max."""
    nu_max = int(nu_max)
    if nu_max < 0:
        raise ValueError("nu_max must be >= 0")
    t = _check_time(t)
    top = _check_order(max(nu_max + 2, 2))
    unit = np.array(_unit_moments(triplet.measure, top), dtype=np.float64)
    unit[0] += triplet.sigma2
    return CumulantSet(t=t, gammas=tuple(t * unit), triplet=triplet)


def characteristic_exponent(triplet, s):
    """psi(s) with E exp(i s X_t) = exp(t psi(s)); vectorised over s.

    Evaluated in the fully compensated form
    -sigma2 s^2/2 + i E[X_1] s + int (e^{isu} - 1 - isu) mu(du).
    """
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(np.asarray(s, dtype=np.float64))
    if not np.all(np.isfinite(s)):
        raise ValueError("s must be finite")
    psi = -0.5 * triplet.sigma2 * s * s + 1j * triplet.mean() * s
    psi = psi + triplet.measure.jump_exponent(s)
    return complex(psi[0]) if scalar else psi


@dataclass(frozen=True)
class AffineMap:
    """y = (x - shift) / scale, mapping raw thresholds to standardized ones."""

    shift: float
    scale: float

    def __call__(self, x):
        if np.ndim(x):
            return (np.asarray(x, dtype=np.float64) - self.shift) / self.scale
        return (float(x) - self.shift) / self.scale

    def inverse(self, y):
        return self.shift + self.scale * y

    def to_dict(self):
        return {"shift": self.shift, "scale": self.scale}


def standardize(triplet, t=1.0):
    """Return (map x -> (x - E X_t)/sd(X_t), centered triplet)."""
    t = _check_time(t)
    var = cumulant(triplet, 2, t)
    if not var > 0.0:
        raise ModelError("Var X_t = 0: nothing to standardize")
    return AffineMap(shift=triplet.mean(t), scale=math.sqrt(var)), triplet.centered()
