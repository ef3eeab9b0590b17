"""Probabilists' Hermite polynomials and the standard normal CDF/PDF."""

import math

import numpy as np
from scipy import special

from . import _kernels

MAX_HERMITE_ORDER = 200
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _check_order(n):
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise ValueError(f"Hermite order must be a non-negative integer, got {n!r}")
    n = int(n)
    if n > MAX_HERMITE_ORDER:
        raise ValueError(f"Hermite order {n} exceeds the cap {MAX_HERMITE_ORDER}")
    return n


def _check_point(x):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"Hermite polynomials need a finite point, got {x!r}")
    return x


def hermite(n, x):
    """Evaluate H_n(x) by the upward recurrence H_{n+1} = x H_n - n H_{n-1}.

    >>> hermite(2, 2.0)
    3.0
    >>> hermite(4, 0.0)
    3.0
    """
    n = _check_order(n)
    x = _check_point(x)
    prev, cur = 1.0, x
    if n == 0:
        return prev
    for k in range(1, n):
        prev, cur = cur, x * cur - k * prev
    return cur


def hermite_row(n_max, x):
    """Return ``[H_0(x), ..., H_{n_max}(x)]`` as a float array.

    Element ``k`` is bitwise equal to ``hermite(k, x)``.
    """
    n_max = _check_order(n_max)
    x = _check_point(x)
    return hermite_table(n_max, np.array([x]))[0]


def hermite_table(n_max, xs):
    """Hermite values for every point in ``xs``; shape ``(len(xs), n_max + 1)``."""
    n_max = _check_order(n_max)
    xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    if xs.ndim != 1:
        raise ValueError("xs must be one-dimensional")
    if not np.all(np.isfinite(xs)):
        raise ValueError("Hermite polynomials need finite points")
    return _kernels.hermite_table(n_max, xs)


def std_normal_cdf(x):
    """Standard normal CDF; accepts scalars (including +-inf) and arrays."""
    out = special.ndtr(x)
    return float(out) if np.ndim(out) == 0 else out


def std_normal_pdf(x):
    """Standard normal density (2 pi)^{-1/2} exp(-x^2/2); underflows quietly to 0."""
    if np.ndim(x) == 0:
        x = float(x)
        return _INV_SQRT_2PI * math.exp(-0.5 * x * x)
    x = np.asarray(x, dtype=np.float64)
    return _INV_SQRT_2PI * np.exp(-0.5 * x * x)
