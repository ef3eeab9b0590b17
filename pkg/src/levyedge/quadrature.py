"""
Adaptive Gauss-Legendre quadrature for vector-valued integrands.

Integrands take a 1-D array of nodes and return an array whose first axis
runs over the nodes; any trailing axes are integrated componentwise (this
is how all cumulant orders, or all frequencies of a characteristic
exponent, are integrated in a single sweep). Each panel is estimated with
a 16- and a 32-point rule; panels holding more than their share of the
error budget are bisected in batches until every component meets
``max(atol, rtol * |I|)``.

Semi-infinite ranges are mapped by u = a + scale * exp(y), then the upper
end in y is extended panel by panel until the newly added mass is
negligible. Failure to settle raises ``QuadratureError``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureError

_LOW_X, _LOW_W = np.polynomial.legendre.leggauss(16)
_HIGH_X, _HIGH_W = np.polynomial.legendre.leggauss(32)

# Log-substitution window. exp(-80) of the scale is far below any target
# tolerance for integrands that are integrable at the finite end.
_Y_LOW = -80.0
_Y_START = 4.0
_Y_STEP = 2.0
_Y_CAP = 90.0


@dataclass(frozen=True)
class QuadResult:
    value: np.ndarray
    error: np.ndarray
    n_panels: int


def _panels(f, lo, hi):
    """16/32-point estimates for many panels at once."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    n = lo.shape[0]
    nodes = np.concatenate(
        (mid[:, None] + half[:, None] * _LOW_X, mid[:, None] + half[:, None] * _HIGH_X),
        axis=1,
    ).ravel()
    vals = np.asarray(f(nodes))
    tail = vals.shape[1:]
    vals = vals.reshape((n, 48) + tail)
    hb = half.reshape((n,) + (1,) * len(tail))
    low = hb * np.tensordot(vals[:, :16], _LOW_W, axes=([1], [0]))
    high = hb * np.tensordot(vals[:, 16:], _HIGH_W, axes=([1], [0]))
    if not np.all(np.isfinite(high)):
        raise QuadratureError("non-finite integrand value")
    return high, np.abs(high - low)


def _finite(f, a, b, rtol, atol, max_panels):
    lo = np.array([a])
    hi = np.array([b])
    vals, errs = _panels(f, lo, hi)
    while True:
        total = vals.sum(axis=0)
        total_err = errs.sum(axis=0)
        target = np.maximum(atol, rtol * np.abs(total))
        if np.all(total_err <= target):
            return total, total_err, lo.shape[0]
        n = lo.shape[0]
        if n >= max_panels:
            raise QuadratureError(
                f"adaptive quadrature on [{a}, {b}] did not converge in {max_panels} panels"
            )
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(errs > 0, errs / np.where(target > 0, target, np.inf), 0.0)
        ratio = ratio.reshape(n, -1).max(axis=1) if ratio.ndim > 1 else ratio
        # Bisect every panel above its fair share of the error budget.
        bad = ratio * n > 1.0
        bad[np.argmax(ratio)] = True
        mid = 0.5 * (lo[bad] + hi[bad])
        if np.any(mid <= lo[bad]) or np.any(mid >= hi[bad]):
            raise QuadratureError(f"panels on [{a}, {b}] cannot be bisected further")
        new_lo = np.concatenate((lo[bad], mid))
        new_hi = np.concatenate((mid, hi[bad]))
        nv, ne = _panels(f, new_lo, new_hi)
        keep = ~bad
        lo = np.concatenate((lo[keep], new_lo))
        hi = np.concatenate((hi[keep], new_hi))
        vals = np.concatenate((vals[keep], nv))
        errs = np.concatenate((errs[keep], ne))


def integrate(f, a, b, *, rtol=1e-10, atol=0.0, max_panels=4000, scale=1.0):
    """Integrate ``f`` over ``[a, b]``; either end may be infinite.

    Returns a :class:`QuadResult`. Raises ``QuadratureError`` when the
    tolerance cannot be met (including a semi-infinite tail that never
    settles, the usual symptom of a divergent integral).
    """
    a, b = float(a), float(b)
    if a == b:
        probe = np.asarray(f(np.array([a if math.isfinite(a) else 0.0])))
        zero = np.zeros(probe.shape[1:])
        return QuadResult(zero, zero.copy(), 0)
    if a > b:
        res = integrate(f, b, a, rtol=rtol, atol=atol, max_panels=max_panels, scale=scale)
        return QuadResult(-res.value, res.error, res.n_panels)
    if math.isfinite(a) and math.isfinite(b):
        v, e, n = _finite(f, a, b, rtol, atol, max_panels)
        return QuadResult(v, e, n)
    if math.isinf(a) and math.isinf(b):
        left = integrate(f, a, 0.0, rtol=rtol, atol=atol, max_panels=max_panels, scale=scale)
        right = integrate(f, 0.0, b, rtol=rtol, atol=atol, max_panels=max_panels, scale=scale)
        return QuadResult(left.value + right.value, left.error + right.error,
                          left.n_panels + right.n_panels)
    if math.isinf(a):
        res = integrate(lambda u: f(-u), -b, math.inf, rtol=rtol, atol=atol,
                        max_panels=max_panels, scale=scale)
        return res
    return _semi_infinite(f, a, rtol, atol, max_panels, scale)


def _semi_infinite(f, a, rtol, atol, max_panels, scale):
    def g(y):
        jac = scale * np.exp(y)
        vals = np.asarray(f(a + jac))
        return vals * jac.reshape((-1,) + (1,) * (vals.ndim - 1))

    total, err, n = _finite(g, _Y_LOW, _Y_START, rtol, atol, max_panels)
    y = _Y_START
    quiet = 0
    while True:
        if y >= _Y_CAP:
            raise QuadratureError(
                f"tail of the integral over [{a}, inf) did not settle by u ~ {a + scale * math.exp(y):.3g}"
            )
        piece, perr, pn = _finite(g, y, y + _Y_STEP, rtol, atol, max_panels)
        total = total + piece
        err = err + perr
        n += pn
        y += _Y_STEP
        small = np.abs(piece) <= np.maximum(atol, 1e-3 * rtol * np.abs(total))
        quiet = quiet + 1 if np.all(small) else 0
        if quiet >= 2:
            break
    return QuadResult(total, err, n)
