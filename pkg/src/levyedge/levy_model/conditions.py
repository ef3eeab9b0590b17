"""
Sufficient conditions on the Levy measure for the exact series.

Each check returns ``holds`` (with the certificate constants), ``fails``
or ``unknown``. Tail checks combine a finite candidate grid (for C, eps,
a) with the known tail order of the ``power_exp`` family, which is what
lets a negative answer be ``fails`` rather than ``unknown``.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..errors import QuadratureError
from ..quadrature import integrate

EPS_CANDIDATES = (1.0, 0.5, 0.25, 0.1)
EXP_LAMBDAS = (0.1, 1.0)
EXP_DELTA = 1e-6

HOLDS, FAILS, UNKNOWN = "holds", "fails", "unknown"
EXACT_THEOREMS = ("main", "main2", "main3")


@dataclass(frozen=True)
class ConditionCheck:
    status: str
    params: dict = field(default_factory=dict)

    @property
    def holds(self):
        return self.status == HOLDS

    def to_dict(self):
        return {"status": self.status, **self.params}


@dataclass(frozen=True)
class ConditionReport:
    bounded_support: ConditionCheck
    density_tail_decay: ConditionCheck
    interval_mass_decay: ConditionCheck
    exp_moment: ConditionCheck
    cramer_sufficient: bool
    cramer_declared: bool
    strongest_theorem: str

    @property
    def exact_series_valid(self):
        return self.strongest_theorem in EXACT_THEOREMS

    def to_dict(self):
        return {
            "bounded_support": self.bounded_support.to_dict(),
            "density_tail_decay": self.density_tail_decay.to_dict(),
            "interval_mass_decay": self.interval_mass_decay.to_dict(),
            "exp_moment": self.exp_moment.to_dict(),
            "cramer_sufficient": self.cramer_sufficient,
            "cramer_declared": self.cramer_declared,
            "strongest_theorem": self.strongest_theorem,
        }


def _tail_beats(piece, eps, power_shift=0.0):
    """Does c r^(p+shift) exp(-beta r^q) stay below C exp(-r^(1+eps)) eventually?"""
    e = 1.0 + eps
    if piece.beta == 0.0 or piece.q < e:
        return False
    if piece.q > e:
        return True
    if piece.beta != 1.0:
        return piece.beta > 1.0
    return piece.p + power_shift <= 0.0


def _anchor(measure):
    """A point a >= 1 beyond which only unbounded density pieces carry mass."""
    ends = [1.0]
    ends += [abs(atom.x) for atom in measure.atoms]
    for piece in measure.pieces:
        lo, hi = piece.abs_range
        ends.append(lo if math.isinf(hi) else hi)
    return max(ends)


def _tail_grid(a):
    return np.geomspace(a, max(1e3 * a, 1e3), 2000)


def _log_tail_density(unbounded, r):
    """log of the larger one-sided density sum at |u| = r."""
    sides = {}
    for piece in unbounded:
        logs = piece.log_density_abs(r)
        sides[piece.side] = np.logaddexp(sides[piece.side], logs) if piece.side in sides else logs
    return np.maximum.reduce(list(sides.values()))


def _density_tail(unbounded, a):
    r = _tail_grid(a)
    log_dens = _log_tail_density(unbounded, r)
    for eps in EPS_CANDIDATES:
        if all(_tail_beats(p, eps) for p in unbounded):
            g = log_dens + r ** (1.0 + eps)
            return ConditionCheck(HOLDS, {"eps": eps, "C": float(np.exp(np.max(g))), "a": a})
    return ConditionCheck(FAILS, {"eps_tested": list(EPS_CANDIDATES), "a": a})


def _interval_mass(measure, unbounded, a):
    xs = np.concatenate((a + np.arange(0.0, 40.0), np.geomspace(a + 40.0, 1e3 * a + 40.0, 40)))
    eta = np.zeros_like(xs)
    for piece in unbounded:
        for i, x in enumerate(xs):
            eta[i] += piece.abs_moments([0.0], x, x + 1.0)[0]
    for eps in EPS_CANDIDATES:
        if all(_tail_beats(p, eps, power_shift=-max(p.q - 1.0, 0.0)) for p in unbounded):
            ok = eta > 0.0
            if np.any(ok):
                C = float(np.exp(np.max(np.log(eta[ok]) + xs[ok] ** (1.0 + eps))))
            else:
                C = 0.0
            return ConditionCheck(HOLDS, {"eps": eps, "C": C, "a": a})
    return ConditionCheck(FAILS, {"eps_tested": list(EPS_CANDIDATES), "a": a})


def _exp_integral_diverges(piece, lam):
    if piece.bounded:
        return False
    if piece.beta == 0.0 or piece.q < 1.0:
        return True
    if piece.q > 1.0:
        return False
    if piece.beta != lam:
        return piece.beta < lam
    return piece.p >= -1.0


def _exp_moment(measure):
    values = {}
    for lam in EXP_LAMBDAS:
        if any(_exp_integral_diverges(p, lam) for p in measure.pieces):
            values[lam] = math.inf
            continue
        total = sum(at.mass * math.exp(lam * abs(at.x)) for at in measure.atoms
                    if abs(at.x) >= EXP_DELTA)
        try:
            for piece in measure.pieces:
                lo, hi = piece.abs_range
                lo = max(lo, EXP_DELTA)

                def f(r, piece=piece, lam=lam):
                    with np.errstate(over="ignore", divide="ignore"):
                        return np.exp(lam * r + piece.log_density_abs(r))

                total += float(integrate(f, lo, hi, rtol=1e-10).value)
        except QuadratureError:
            values[lam] = None
            continue
        values[lam] = total
    params = {f"lambda={lam:g}": v for lam, v in values.items()}
    if any(v is not None and math.isfinite(v) for v in values.values()):
        return ConditionCheck(HOLDS, params)
    subexponential = any(
        not p.bounded and (p.beta == 0.0 or p.q < 1.0) for p in measure.pieces
    )
    return ConditionCheck(FAILS if subexponential else UNKNOWN, params)


@lru_cache(maxsize=128)
def check_conditions(triplet):
    """Evaluate every sufficient condition and name the strongest usable theorem."""
    measure = triplet.measure
    unbounded = [p for p in measure.pieces if not p.bounded]
    if not unbounded:
        bounded = ConditionCheck(HOLDS, {"bound": measure.bound})
        implied = {"implied_by": "bounded_support"}
        density = ConditionCheck(HOLDS, dict(implied))
        interval = ConditionCheck(HOLDS, dict(implied))
    else:
        bounded = ConditionCheck(FAILS, {"bound": math.inf})
        a = _anchor(measure)
        density = _density_tail(unbounded, a)
        interval = _interval_mass(measure, unbounded, a)
        if density.holds and not interval.holds:
            interval = ConditionCheck(HOLDS, {"implied_by": "density_tail_decay", "a": a})
    exp_moment = _exp_moment(measure)

    cramer_sufficient = triplet.sigma2 > 0.0 or measure.has_density
    low_moments = all(p.moment_exists(k) for p in measure.pieces for k in (2, 3))
    if not low_moments:
        strongest = "none"
    elif not (cramer_sufficient or triplet.cramer_declared):
        strongest = "corolla_only"
    elif bounded.holds:
        strongest = "main"
    elif density.holds:
        strongest = "main2"
    elif interval.holds:
        strongest = "main3"
    else:
        strongest = "corolla_only"
    return ConditionReport(
        bounded_support=bounded,
        density_tail_decay=density,
        interval_mass_decay=interval,
        exp_moment=exp_moment,
        cramer_sufficient=cramer_sufficient,
        cramer_declared=triplet.cramer_declared,
        strongest_theorem=strongest,
    )
