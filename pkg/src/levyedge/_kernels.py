"""
Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``LEVYEDGE_DISABLE_NUMBA`` is unset (or set to a false-y value).
Both paths perform the same floating-point operations in the same order
wherever that is practical, so results agree bitwise for the Hermite table
and the segment sums and to a few ulps for the partition products (the
numpy path uses a BLAS dot product there).

Public names at module level (``hermite_table``, ``partition_coefficients``,
``segment_sums``) are bound to the selected backend; the ``*_numpy`` and
``*_jit`` variants stay importable for benchmarks and cross-checks.
"""

import os

import numpy as np

DISABLE_ENV = "LEVYEDGE_DISABLE_NUMBA"


def _numba_wanted():
    flag = os.environ.get(DISABLE_ENV, "").strip().lower()
    return flag in ("", "0", "false", "no", "off")


try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is an optional extra
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def decorator(func):
            return func

        return decorator


USE_NUMBA = NUMBA_AVAILABLE and _numba_wanted()
BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# Hermite table: H_0..H_{n_max} at every point of xs
# ---------------------------------------------------------------------------

def hermite_table_numpy(n_max, xs):
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    out = np.empty((xs.shape[0], n_max + 1), dtype=np.float64)
    out[:, 0] = 1.0
    if n_max >= 1:
        out[:, 1] = xs
    for n in range(1, n_max):
        out[:, n + 1] = xs * out[:, n] - n * out[:, n - 1]
    return out


@njit(cache=True)
def _hermite_table_jit(n_max, xs):
    m = xs.shape[0]
    out = np.empty((m, n_max + 1), dtype=np.float64)
    for i in range(m):
        x = xs[i]
        out[i, 0] = 1.0
        if n_max >= 1:
            out[i, 1] = x
        for n in range(1, n_max):
            out[i, n + 1] = x * out[i, n] - n * out[i, n - 1]
    return out


def hermite_table_jit(n_max, xs):
    return _hermite_table_jit(int(n_max), np.ascontiguousarray(xs, dtype=np.float64))


# ---------------------------------------------------------------------------
# Partition products grouped by l = sum(k_m)
# ---------------------------------------------------------------------------
#
# For every solution row k (k_1..k_nu) the product
#     prod_m (1/k_m!) * (lam_{m+2} / (m+2)!)^{k_m}
# is carried as a signed mantissa times 2^E with an exact integer E (a
# base-2 log-magnitude whose integer part never rounds), then added into
# coeffs[l]. Inputs:
#   mult        (S, nu) int8   multiplicities
#   ls          (S,)    int64  l per row
#   mant, expo  (nu,)          frexp of lam_{m+2} / (m+2)!   (mant = 0 where lam == 0)
#   fmant, fexp (K,)           frexp of 1/k! for k = 0..K-1, K > max multiplicity
#
# Mantissas lie in [0.5, 1) and a row multiplies at most 2*nu of them, so
# the running mantissa cannot underflow for nu <= 60.

ROW_BLOCK = 1 << 15


def partition_coefficients_numpy(mult, ls, mant, expo, fmant, fexp):
    nu = mult.shape[1]
    coeffs = np.zeros(nu + 1, dtype=np.float64)
    expo = np.asarray(expo, dtype=np.int64)
    for start in range(0, mult.shape[0], ROW_BLOCK):
        k = mult[start : start + ROW_BLOCK].astype(np.int64)
        m = np.prod(np.power(mant[None, :], k), axis=1) * np.prod(fmant[k], axis=1)
        e = k @ expo + fexp[k].sum(axis=1)
        vals = np.ldexp(m, e)
        coeffs += np.bincount(ls[start : start + ROW_BLOCK], weights=vals, minlength=nu + 1)[: nu + 1]
    return coeffs


@njit(cache=True)
def _partition_coefficients_jit(mult, ls, mant, expo, fmant, fexp):
    n_rows, nu = mult.shape
    coeffs = np.zeros(nu + 1, dtype=np.float64)
    for r in range(n_rows):
        m = 1.0
        e = 0
        for j in range(nu):
            kj = mult[r, j]
            if kj == 0:
                continue
            m *= mant[j] ** kj * fmant[kj]
            e += kj * expo[j] + fexp[kj]
        if m != 0.0:
            coeffs[ls[r]] += np.ldexp(m, e)
    return coeffs


def partition_coefficients_jit(mult, ls, mant, expo, fmant, fexp):
    return _partition_coefficients_jit(
        np.ascontiguousarray(mult),
        np.ascontiguousarray(ls, dtype=np.int64),
        np.ascontiguousarray(mant, dtype=np.float64),
        np.ascontiguousarray(expo, dtype=np.int64),
        np.ascontiguousarray(fmant, dtype=np.float64),
        np.ascontiguousarray(fexp, dtype=np.int64),
    )


# ---------------------------------------------------------------------------
# Segment sums: total jump size per simulated path
# ---------------------------------------------------------------------------

def segment_sums_numpy(values, counts):
    counts = np.asarray(counts, dtype=np.int64)
    owner = np.repeat(np.arange(counts.shape[0]), counts)
    return np.bincount(owner, weights=values, minlength=counts.shape[0])


@njit(cache=True)
def _segment_sums_jit(values, counts):
    n = counts.shape[0]
    out = np.zeros(n, dtype=np.float64)
    pos = 0
    for i in range(n):
        acc = 0.0
        for _ in range(counts[i]):
            acc += values[pos]
            pos += 1
        out[i] = acc
    return out


def segment_sums_jit(values, counts):
    return _segment_sums_jit(
        np.ascontiguousarray(values, dtype=np.float64),
        np.ascontiguousarray(counts, dtype=np.int64),
    )


if USE_NUMBA:
    hermite_table = hermite_table_jit
    partition_coefficients = partition_coefficients_jit
    segment_sums = segment_sums_jit
else:
    hermite_table = hermite_table_numpy
    partition_coefficients = partition_coefficients_numpy
    segment_sums = segment_sums_numpy
