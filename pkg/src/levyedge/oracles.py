"""
Reference answers that share no code path with the series.

* ``cf_inversion_cdf_diff`` / ``cf_inversion_cdf``: Gil-Pelaez inversion of
  the characteristic function of X_t / V, integrated with Gauss-Legendre
  panels split at the zeros of the oscillating factor.
* ``simulate_cdf``: exact simulation of finite-activity models.
* ``gamma_cdf``: regularized lower incomplete gamma.

All probabilities refer to the centered, standardized variable
Y = (X_t - E X_t) / V.

Monte Carlo seeding: paths are generated in chunks of ``CHUNK_PATHS``.
Chunk i draws from ``Generator(Philox(SeedSequence(seed, spawn_key=(i,))))``
in this order: standard normals (one per path), Poisson jump counts (one
per path), component-selection uniforms (one per jump, only when the
measure has more than one component) and inverse-CDF uniforms (one per
jump). Chunks are independent, so any worker count gives the same result.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import _kernels
from .levy_model import characteristic_exponent, cumulant

CHUNK_PATHS = 1 << 18
TRUNCATION_TARGET = 1e-13
MAX_FREQUENCY = 2e3
PANEL_WIDTH = 0.5

_GL_LO = np.polynomial.legendre.leggauss(20)
_GL_HI = np.polynomial.legendre.leggauss(40)


@dataclass(frozen=True)
class OracleEstimate:
    value: float
    error_bound: float
    kind: str
    n_paths: int = None
    std_error: float = None
    clamped: bool = False
    flagged: bool = False

    def to_dict(self):
        return {
            "value": self.value,
            "error_bound": self.error_bound,
            "kind": self.kind,
            "n_paths": self.n_paths,
            "std_error": self.std_error,
            "clamped": self.clamped,
            "flagged": self.flagged,
        }


def _clamp(value):
    clipped = min(max(value, 0.0), 1.0)
    return clipped, clipped != value


# ---------------------------------------------------------------------------
# Characteristic-function inversion
# ---------------------------------------------------------------------------

def _standardized_cf(triplet, t):
    centered = triplet.centered()
    V = math.sqrt(cumulant(triplet, 2, t))

    def cf(s):
        return np.exp(t * characteristic_exponent(centered, np.asarray(s) / V))

    return cf, V


def _cutoff(triplet, t, V):
    """Frequency S beyond which |f| is negligible, and the truncation bound.

    With a Gaussian part |f(s)| <= exp(-a s^2), a = t sigma2 / (2 V^2), and
    the dropped part of the integral is at most exp(-a S^2) / (pi a S^2).
    Without one, |f| is scanned and a slow decay is reported as such.
    """
    a = 0.5 * t * triplet.sigma2 / V ** 2
    if a > 0.0:
        S = 1.0
        while math.exp(-a * S * S) / (math.pi * a * S * S) > TRUNCATION_TARGET:
            S *= 1.25
        if S <= MAX_FREQUENCY:
            return S, math.exp(-a * S * S) / (math.pi * a * S * S), False
    cf, _ = _standardized_cf(triplet, t)
    grid = np.geomspace(1.0, MAX_FREQUENCY, 200)
    mags = np.abs(cf(grid))
    # Running max from the right: first point after which |f| stays small.
    tail_max = np.maximum.accumulate(mags[::-1])[::-1]
    small = np.nonzero(tail_max <= TRUNCATION_TARGET)[0]
    if small.size:
        return float(grid[small[0]]), TRUNCATION_TARGET, False
    # |f| does not die out (atoms, lattice parts): the integral is only
    # conditionally convergent and the bound is honest but large.
    residual = float(tail_max[-1])
    return MAX_FREQUENCY, 2.0 * residual / math.pi + residual, True


def _panels(S, freq):
    width = min(PANEL_WIDTH, math.pi / freq) if freq > 0 else PANEL_WIDTH
    n = max(1, int(math.ceil(S / width)))
    edges = np.linspace(0.0, S, n + 1)
    return edges[:-1], edges[1:]


def _gl_nodes(lo, hi, rule):
    x, w = rule
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return nodes, weights


def _invert(triplet, t, integrand_of, freq):
    cf, V = _standardized_cf(triplet, t)
    S, trunc, flagged = _cutoff(triplet, t, V)
    lo, hi = _panels(S, freq)
    n_lo, w_lo = _gl_nodes(lo, hi, _GL_LO)
    n_hi, w_hi = _gl_nodes(lo, hi, _GL_HI)
    nodes = np.concatenate((n_lo.ravel(), n_hi.ravel()))
    vals = integrand_of(nodes, cf(nodes))
    coarse = (vals[: n_lo.size].reshape(n_lo.shape) * w_lo).sum(axis=1)
    fine = (vals[n_lo.size :].reshape(n_hi.shape) * w_hi).sum(axis=1)
    integral = math.fsum(fine) / math.pi
    quad_err = math.fsum(np.abs(fine - coarse)) / math.pi
    return integral, quad_err + trunc, flagged


def cf_inversion_cdf_diff(triplet, t, x1, x2):
    """P(x1 < Y < x2) = (1/pi) int_0^inf Im[(e^{-is x1} - e^{-is x2}) f(s)] / s ds."""
    x1, x2 = float(x1), float(x2)
    if x1 > x2:
        raise ValueError(f"need x1 <= x2, got {x1} and {x2}")
    if x1 == x2:
        return OracleEstimate(0.0, 0.0, "quadrature")

    def integrand(s, f):
        return ((np.exp(-1j * s * x1) - np.exp(-1j * s * x2)) * f).imag / s

    value, err, flagged = _invert(triplet, t, integrand, max(abs(x1), abs(x2)))
    value, clamped = _clamp(value)
    return OracleEstimate(value, err, "quadrature", clamped=clamped, flagged=flagged)


def cf_inversion_cdf(triplet, t, x):
    """P(Y < x) = 1/2 - (1/pi) int_0^inf Im[e^{-isx} f(s)] / s ds."""
    x = float(x)

    def integrand(s, f):
        return (np.exp(-1j * s * x) * f).imag / s

    value, err, flagged = _invert(triplet, t, integrand, abs(x))
    value, clamped = _clamp(0.5 - value)
    return OracleEstimate(value, err, "quadrature", clamped=clamped, flagged=flagged)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

class _JumpSampler:
    def __init__(self, measure):
        self.components = list(measure.atoms) + list(measure.pieces)
        masses = [a.mass for a in measure.atoms] + [p.mass() for p in measure.pieces]
        self.total = float(sum(masses))
        self.cum = np.cumsum(masses) / self.total if masses else np.zeros(0)
        self.n_atoms = len(measure.atoms)

    def draw(self, rng, n):
        if len(self.components) > 1:
            which = np.searchsorted(self.cum, rng.random(n), side="right")
            which = np.minimum(which, len(self.components) - 1)
        else:
            which = np.zeros(n, dtype=np.int64)
        u = rng.random(n)
        out = np.empty(n, dtype=np.float64)
        for j, comp in enumerate(self.components):
            sel = which == j
            if not sel.any():
                continue
            if j < self.n_atoms:
                out[sel] = comp.x
            else:
                out[sel] = comp.inverse_cdf(u[sel])
        return out


def _chunk_rng(seed, index):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def simulate_cdf(triplet, t, x, n_paths, seed, workers=1):
    """Fraction of simulated Y below x (scalar or array of thresholds)."""
    t = float(t)
    n_paths = int(n_paths)
    if n_paths < 1:
        raise ValueError("n_paths must be positive")
    measure = triplet.measure
    if not math.isfinite(measure.total_mass()):
        raise ValueError("Monte Carlo oracle needs a finite-activity Levy measure")
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    V = math.sqrt(cumulant(triplet, 2, t))
    sampler = _JumpSampler(measure)
    compensator = t * float(measure.moments(np.array([1]))[0]) if not measure.is_empty else 0.0
    rate = t * sampler.total
    sd = math.sqrt(t * triplet.sigma2)

    sizes = [CHUNK_PATHS] * (n_paths // CHUNK_PATHS)
    if n_paths % CHUNK_PATHS:
        sizes.append(n_paths % CHUNK_PATHS)

    def run(index):
        m = sizes[index]
        rng = _chunk_rng(seed, index)
        y = sd * rng.standard_normal(m)
        if rate > 0.0:
            counts = rng.poisson(rate, m)
            jumps = sampler.draw(rng, int(counts.sum()))
            y += _kernels.segment_sums(jumps, counts)
        y = (y - compensator) / V
        return (y[:, None] < xs[None, :]).sum(axis=0)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = list(pool.map(run, range(len(sizes))))
    else:
        hits = [run(i) for i in range(len(sizes))]
    totals = np.sum(hits, axis=0)
    out = []
    for k in totals:
        p = float(k) / n_paths
        se = math.sqrt(p * (1.0 - p) / n_paths)
        out.append(OracleEstimate(p, 3.0 * se, "monte_carlo", n_paths=n_paths, std_error=se))
    return out[0] if scalar else out


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def gamma_cdf(shape, x):
    """P(G < x) for G ~ Gamma(shape, 1)."""
    shape = float(shape)
    if not shape > 0.0:
        raise ValueError("shape must be positive")
    x = float(x)
    if x <= 0.0:
        return 0.0
    return float(special.gammainc(shape, x))
