"""
Enumeration of the index set of the Edgeworth correction functions: all
non-negative integer solutions of k_1 + 2 k_2 + ... + nu k_nu = nu.

Solutions come out in a fixed canonical order, descending lexicographic on
(k_nu, ..., k_1), so that series terms and golden outputs are reproducible.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_NU = 60


@dataclass(frozen=True)
class PartitionSolution:
    """One solution (k_1..k_nu) together with l = sum(k_m)."""

    nu: int
    multiplicities: tuple
    l: int

    def __post_init__(self):
        if sum((m + 1) * k for m, k in enumerate(self.multiplicities)) != self.nu:
            raise ValueError("multiplicities do not solve sum m*k_m = nu")
        if self.l != sum(self.multiplicities):
            raise ValueError("l must equal sum of multiplicities")


def _check_nu(nu):
    if isinstance(nu, bool) or int(nu) != nu:
        raise ValueError(f"nu must be an integer, got {nu!r}")
    nu = int(nu)
    if not 1 <= nu <= MAX_NU:
        raise ValueError(f"nu must lie in [1, {MAX_NU}], got {nu}")
    return nu


def _solutions(nu):
    k = [0] * nu

    def rec(m, rem):
        if m == 1:
            k[0] = rem
            yield tuple(k)
            return
        for km in range(rem // m, -1, -1):
            k[m - 1] = km
            yield from rec(m - 1, rem - m * km)
        k[m - 1] = 0

    yield from rec(nu, nu)


@lru_cache(maxsize=None)
def solution_table(nu):
    """Solutions as arrays ``(mult, ls)``: ``mult`` is ``(p(nu), nu)`` int8.

    Cached and read-only; this is the form the coefficient kernel consumes.
    """
    nu = _check_nu(nu)
    mult = np.array(list(_solutions(nu)), dtype=np.int8)
    ls = mult.sum(axis=1, dtype=np.int64)
    mult.setflags(write=False)
    ls.setflags(write=False)
    return mult, ls


def enumerate_solutions(nu):
    """Every solution of sum m*k_m = nu exactly once, in canonical order.

    >>> [s.multiplicities for s in enumerate_solutions(2)]
    [(0, 1), (2, 0)]
    """
    mult, ls = solution_table(nu)
    return [
        PartitionSolution(nu=int(nu), multiplicities=tuple(int(v) for v in row), l=int(l))
        for row, l in zip(mult, ls)
    ]


@lru_cache(maxsize=None)
def partition_count(nu):
    """Number of integer partitions p(nu), by the coin-change recurrence."""
    nu = _check_nu(nu)
    p = [1] + [0] * nu
    for part in range(1, nu + 1):
        for s in range(part, nu + 1):
            p[s] += p[s - part]
    return p[nu]
