"""
Edgeworth correction functions Q_nu and the series built from them.

Q_nu(x) = -phi(x) * sum_l c_{nu,l} H_{nu+2l-1}(x), where c_{nu,l} gathers
the partition products prod_m (1/k_m!) (lambda_{m+2}/(m+2)!)^{k_m} over all
solutions of sum m k_m = nu with sum k_m = l. Its derivative replaces the
Hermite order by nu+2l and flips the sign.

Exact-mode evaluators (CDF differences, |X_t|, density, one-sided) are
gated on the model's condition report and carry a convergence verdict;
``cdf_truncated`` and ``iid_sum_cdf`` are the finite asymptotic forms.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import ConditionGateError, ModelError, MomentDoesNotExist
from .levy_model import check_conditions
from .partitions import MAX_NU, solution_table
from .special_functions import hermite_table, std_normal_cdf, std_normal_pdf

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ORDER = 40
GROWTH_RUN = 5
ONE_SIDED_MARGIN = 1e-9

CONVERGED, TRUNCATED, DIVERGING = "converged", "truncated", "diverging"


@dataclass(frozen=True)
class SeriesResult:
    """A (partially) summed series: value = base + sum(terms).

    ``terms[j]`` is the order-(j+1) contribution. For a diverging series the
    sum stops at the smallest term seen (optimal truncation) and
    ``tail_estimate`` is infinite.
    """

    value: float
    base: float
    terms: tuple
    n_terms_used: int
    verdict: str
    tol: float = None
    tail_estimate: float = math.nan
    unverified: bool = False
    notes: tuple = field(default=())

    @property
    def converged(self):
        return self.verdict == CONVERGED

    def to_dict(self):
        return {
            "value": self.value,
            "base": self.base,
            "terms": list(self.terms),
            "n_terms_used": self.n_terms_used,
            "verdict": self.verdict,
            "tol": self.tol,
            "tail_estimate": self.tail_estimate,
            "unverified": self.unverified,
        }


# ---------------------------------------------------------------------------
# Coefficients and Q functions
# ---------------------------------------------------------------------------

def _check_nu(cumulants, nu):
    if isinstance(nu, bool) or int(nu) != nu or not 1 <= nu <= MAX_NU:
        raise ValueError(f"nu must be an integer in [1, {MAX_NU}], got {nu!r}")
    nu = int(nu)
    if nu + 2 > cumulants.max_order:
        raise ValueError(
            f"Q_{nu} needs cumulants up to order {nu + 2}; set stops at {cumulants.max_order}"
        )
    return nu


@lru_cache(maxsize=None)
def _inverse_factorials(n):
    """frexp of 1/k! for k = 0..n, each rounded once from the exact rational."""
    vals = np.array([1.0 / math.factorial(k) if k < 170 else 0.0 for k in range(n + 1)])
    mant, expo = np.frexp(vals)
    return mant, expo.astype(np.int64)


@lru_cache(maxsize=8192)
def _coefficients(lambdas, nu):
    lam = lambdas[1 : nu + 1]  # lambda_3..lambda_{nu+2}
    weights = np.array([lam[m - 1] / math.factorial(m + 2) for m in range(1, nu + 1)])
    mant, expo = np.frexp(weights)
    fmant, fexp = _inverse_factorials(nu + 1)
    mult, ls = solution_table(nu)
    coeffs = _kernels.partition_coefficients(mult, ls, mant, expo.astype(np.int64), fmant, fexp)
    coeffs.setflags(write=False)
    return coeffs


def q_coefficients(cumulants, nu):
    """c_{nu,l} for l = 0..nu (entry 0 is always 0)."""
    nu = _check_nu(cumulants, nu)
    return _coefficients(cumulants.lambdas, nu)


def _q_matrix(cumulants, xs, orders, derivative=False):
    """Q_nu(x) (or its derivative) for every x in xs and nu in orders."""
    xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    orders = [_check_nu(cumulants, nu) for nu in orders]
    out = np.zeros((xs.shape[0], len(orders)))
    if not orders:
        return out
    shift = 1 if derivative else 0
    H = hermite_table(3 * max(orders) - 1 + shift, xs)
    phi = std_normal_pdf(xs)
    for j, nu in enumerate(orders):
        c = _coefficients(cumulants.lambdas, nu)
        idx = nu + 2 * np.arange(1, nu + 1) - 1 + shift
        combo = H[:, idx] @ c[1:]
        with np.errstate(invalid="ignore", over="ignore"):
            vals = phi * combo
        # phi underflows before H overflows for |x| large.
        vals = np.where(phi == 0.0, 0.0, vals)
        out[:, j] = vals if derivative else -vals
    return out


def _shape_like(x, arr):
    return float(arr[0]) if np.ndim(x) == 0 else arr


def q_function(cumulants, nu, x):
    """Q_nu(x) from the cumulants' scaled lambdas (time is already baked in)."""
    return _shape_like(x, _q_matrix(cumulants, x, [nu])[:, 0])


def q_derivative(cumulants, nu, x):
    """d/dx Q_nu(x) = phi(x) * sum_l c_{nu,l} H_{nu+2l}(x)."""
    return _shape_like(x, _q_matrix(cumulants, x, [nu], derivative=True)[:, 0])


# ---------------------------------------------------------------------------
# Truncated (asymptotic) expansions
# ---------------------------------------------------------------------------

def _check_x(x):
    x = float(x)
    if math.isnan(x):
        raise ValueError("x must not be NaN")
    return x


def cdf_truncated_values(cumulants, xs, order, via_unit_time=False):
    """Phi(x) + sum_{nu<=order} Q_nu(x) on a grid, as an array."""
    order = int(order)
    if order < 0:
        raise ValueError("order must be >= 0")
    xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    base = std_normal_cdf(xs)
    if order == 0:
        return np.asarray(base, dtype=np.float64)
    if via_unit_time:
        unit = cumulants.at_time(1.0)
        scale = cumulants.t ** (-0.5 * np.arange(1, order + 1))
        terms = _q_matrix(unit, xs, range(1, order + 1)) * scale
    else:
        terms = _q_matrix(cumulants, xs, range(1, order + 1))
    return base + terms.sum(axis=1)


def cdf_truncated(cumulants, x, order, via_unit_time=False):
    """Normal approximation plus the first ``order`` corrections.

    With ``via_unit_time`` the corrections are formed as t^{-nu/2} Q_nu of
    the time-1 cumulants instead of from the time-t lambdas; both paths
    agree to rounding.
    """
    x = _check_x(x)
    order = int(order)
    if order < 0:
        raise ValueError("order must be >= 0")
    base = std_normal_cdf(x)
    if order == 0:
        terms = np.zeros(0)
    elif via_unit_time:
        unit = cumulants.at_time(1.0)
        scale = cumulants.t ** (-0.5 * np.arange(1, order + 1))
        terms = _q_matrix(unit, [x], range(1, order + 1))[0] * scale
    else:
        terms = _q_matrix(cumulants, [x], range(1, order + 1))[0]
    return SeriesResult(
        value=base + math.fsum(terms),
        base=base,
        terms=tuple(float(v) for v in terms),
        n_terms_used=order,
        verdict=TRUNCATED,
        tail_estimate=abs(float(terms[-1])) if order else math.nan,
    )


def iid_sum_cdf(summand_cumulants, n, x, k):
    """P(sum_{j<=n} Y_j < sqrt(n) V x) ~ Phi(x) + sum_{nu<=k-2} Q_nu^{Y}(x) n^{-nu/2}."""
    k = int(k)
    if k < 3:
        raise ValueError("k must be >= 3")
    n = int(n)
    if n < 1:
        raise ValueError("n must be a positive integer")
    x = _check_x(x)
    orders = range(1, k - 1)
    terms = _q_matrix(summand_cumulants, [x], orders)[0] * n ** (-0.5 * np.arange(1, k - 1))
    return std_normal_cdf(x) + math.fsum(terms)


# ---------------------------------------------------------------------------
# Exact series
# ---------------------------------------------------------------------------

def _gate(cumulants, override, what="exact series"):
    """Return True when the result must be flagged as unverified."""
    triplet = cumulants.triplet
    if triplet is not None:
        report = check_conditions(triplet)
        if report.exact_series_valid:
            return False
        reason = f"strongest applicable theorem is {report.strongest_theorem!r}"
    else:
        reason = "cumulant set carries no source model to check"
    if not override:
        raise ConditionGateError(f"{what} refused: {reason}; pass override=True to force")
    return True


def _check_max_order(cumulants, max_order):
    max_order = int(max_order)
    if not 1 <= max_order <= MAX_NU:
        raise ValueError(f"max_order must lie in [1, {MAX_NU}]")
    if max_order + 2 > cumulants.max_order:
        raise ValueError(
            f"max_order {max_order} needs cumulants up to order {max_order + 2}; "
            f"set stops at {cumulants.max_order}"
        )
    return max_order


def _sum_series(base, terms, tol, trivial, unverified):
    """Apply the convergence policy to a precomputed term sequence.

    Decisions use the envelope e_n = max(|T_n|, |T_{n-1}|) so that terms
    vanishing by parity (odd orders at symmetric points) neither fake
    convergence nor hide growth.
    """
    terms = np.asarray(terms, dtype=np.float64)
    mags = np.abs(terms)
    env = np.maximum(mags, np.concatenate(([0.0], mags[:-1])))
    verdict, used = TRUNCATED, len(terms)
    run = 0
    for i in range(len(terms)):
        n = i + 1
        if not math.isfinite(terms[i]):
            verdict, used = DIVERGING, i
            break
        if trivial:
            verdict, used = CONVERGED, n
            break
        if n >= 3 and env[i] <= tol and env[i - 2] >= env[i - 1] >= env[i]:
            verdict, used = CONVERGED, n
            break
        run = run + 1 if n >= 3 and env[i] > env[i - 2] else 0
        if run >= GROWTH_RUN:
            verdict = DIVERGING
            # env[0] is |T_1| alone and can be a parity zero; skip it.
            used = int(np.argmin(env[1:n])) + 2
            break

    kept = terms[:used]
    if verdict == DIVERGING or used == 0:
        tail = math.inf if verdict == DIVERGING else 0.0
    elif used >= 3:
        # Per-step ratio taken over two steps so parity zeros do not flatten it.
        e = env[:used]
        r = math.sqrt(e[-1] / e[-3]) if e[-3] > 0 else math.inf
        tail = 0.0 if e[-1] == 0.0 else (e[-1] * r / (1.0 - r) if r < 1.0 else math.inf)
    else:
        tail = float(env[used - 1])
    return SeriesResult(
        value=base + math.fsum(kept),
        base=base,
        terms=tuple(float(v) for v in kept),
        n_terms_used=used,
        verdict=verdict,
        tol=tol,
        tail_estimate=tail,
        unverified=unverified,
    )


def cdf_difference_exact(cumulants, x1, x2, tol=DEFAULT_TOL, max_order=DEFAULT_MAX_ORDER,
                         override=False):
    """P(x1 < X_t/V < x2) = Phi(x2) - Phi(x1) + sum_nu (Q_nu(x2) - Q_nu(x1))."""
    x1, x2 = _check_x(x1), _check_x(x2)
    if not x1 < x2:
        raise ValueError(f"need x1 < x2, got {x1} and {x2}")
    unverified = _gate(cumulants, override)
    max_order = _check_max_order(cumulants, max_order)
    base = std_normal_cdf(x2) - std_normal_cdf(x1)
    q = _q_matrix(cumulants, [x2, x1], range(1, max_order + 1))
    return _sum_series(base, q[0] - q[1], tol, cumulants.is_gaussian, unverified)


def _even_terms(cumulants, x, max_order):
    q = _q_matrix(cumulants, [x], range(1, max_order + 1))[0]
    orders = np.arange(1, max_order + 1)
    return np.where(orders % 2 == 0, 2.0 * q, 0.0)


def abs_cdf(cumulants, x, tol=DEFAULT_TOL, max_order=DEFAULT_MAX_ORDER, override=False):
    """P(|X_t| < x V) = 2 Phi(x) - 1 + 2 sum_nu Q_{2nu}(x).

    Terms are indexed by Edgeworth order (odd orders contribute exactly 0),
    so the stopping rule matches ``cdf_difference_exact(-x, x)``.
    """
    x = _check_x(x)
    if not x > 0.0:
        raise ValueError("abs_cdf needs x > 0")
    unverified = _gate(cumulants, override)
    max_order = _check_max_order(cumulants, max_order)
    base = 2.0 * std_normal_cdf(x) - 1.0
    return _sum_series(base, _even_terms(cumulants, x, max_order), tol,
                       cumulants.is_gaussian, unverified)


def abs_tail(cumulants, x, tol=DEFAULT_TOL, max_order=DEFAULT_MAX_ORDER, override=False):
    """P(|X_t| > x V) = 2 - 2 Phi(x) - 2 sum_nu Q_{2nu}(x)."""
    x = _check_x(x)
    if not x > 0.0:
        raise ValueError("abs_tail needs x > 0")
    unverified = _gate(cumulants, override)
    max_order = _check_max_order(cumulants, max_order)
    base = 2.0 - 2.0 * std_normal_cdf(x)
    return _sum_series(base, -_even_terms(cumulants, x, max_order), tol,
                       cumulants.is_gaussian, unverified)


def pdf_series(cumulants, x, tol=DEFAULT_TOL, max_order=DEFAULT_MAX_ORDER, override=False):
    """Density of X_t/V: phi(x) + sum_nu d/dx Q_nu(x)."""
    x = _check_x(x)
    unverified = _gate(cumulants, override, what="density series")
    triplet = cumulants.triplet
    if triplet is None or not triplet.has_density:
        if not override:
            raise ConditionGateError(
                "density series refused: model has no Gaussian part and no declared density"
            )
        unverified = True
    max_order = _check_max_order(cumulants, max_order)
    terms = _q_matrix(cumulants, [x], range(1, max_order + 1), derivative=True)[0]
    return _sum_series(std_normal_pdf(x), terms, tol, cumulants.is_gaussian, unverified)


def lower_support_point(cumulants):
    """Standardized lower end of the support of a centered spectrally positive X_t."""
    triplet = cumulants.triplet
    if triplet is None:
        raise ModelError("one-sided probabilities need the source model")
    measure = triplet.measure
    if triplet.sigma2 != 0.0:
        raise ModelError("one-sided form needs sigma2 = 0 (support unbounded below otherwise)")
    if not measure.positive_support:
        raise ModelError("one-sided form needs a Levy measure concentrated on positive reals")
    try:
        m1 = float(measure.moments(np.array([1]))[0])
    except MomentDoesNotExist as exc:
        raise ModelError("Levy measure has infinite variation (int |x| mu(dx) diverges)") from exc
    return -cumulants.t * m1 / cumulants.V


def one_sided_cdf(cumulants, x2, tol=DEFAULT_TOL, max_order=DEFAULT_MAX_ORDER, override=False):
    """P(X_t < x2 V) for a centered spectrally positive model without Gaussian part."""
    x2 = _check_x(x2)
    x_low = lower_support_point(cumulants)
    if x2 <= x_low:
        unverified = _gate(cumulants, override)
        return SeriesResult(value=0.0, base=0.0, terms=(), n_terms_used=0, verdict=CONVERGED,
                            tol=tol, tail_estimate=0.0, unverified=unverified,
                            notes=("below lower support point",))
    return cdf_difference_exact(cumulants, x_low - ONE_SIDED_MARGIN, x2, tol=tol,
                                max_order=max_order, override=override)
