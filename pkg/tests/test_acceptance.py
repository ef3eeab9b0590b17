"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import itertools
import math
import time

import numpy as np
import pytest
from numpy.polynomial import hermite_e

from levyedge import (
    ConditionGateError,
    CumulantSet,
    abs_cdf,
    abs_tail,
    cdf_difference_exact,
    cdf_truncated,
    cf_inversion_cdf,
    cf_inversion_cdf_diff,
    check_conditions,
    cumulant_set,
    gamma_cdf,
    hermite,
    iid_sum_cdf,
    partition_count,
    pdf_series,
    q_coefficients,
    q_function,
    std_normal_cdf,
)
from levyedge.partitions import enumerate_solutions


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        assert ok, f"criterion {number} failed: {detail}"
    return emit


def test_criterion_01_gaussian_exactness(report, gaussian_model):
    grid = np.linspace(-4, 4, 25)
    worst = 0.0
    for t in (0.5, 3.0):
        cs = cumulant_set(gaussian_model, 10, t)
        for order in range(0, 11):
            for x in grid:
                worst = max(worst, abs(cdf_truncated(cs, x, order).value - std_normal_cdf(x)))
    report(1, "Gaussian exactness", worst <= 1e-14, f"max deviation {worst:.2e} (tol 1e-14)")


def test_criterion_02_scaling(report):
    start = time.perf_counter()
    rng = np.random.default_rng(20240602)
    xs = rng.uniform(-4, 4, 20)
    one = CumulantSet.from_cumulants([1.0] + list(rng.uniform(-1.5, 1.5, 10)), t=1.0)
    worst = 0.0
    for t in (0.5, 1.0, 4.0, 100.0):
        at_t = one.at_time(t)
        for nu in range(1, 11):
            for x in xs:
                ref = t ** (-nu / 2) * q_function(one, nu, x)
                got = q_function(at_t, nu, x)
                if ref != 0.0:
                    worst = max(worst, abs(got - ref) / abs(ref))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 5.0
    report(2, "scaling lemma", ok, f"max rel err {worst:.2e} (tol 1e-12), {elapsed:.2f}s (< 5s)")


def test_criterion_03_displayed_coefficients(report):
    l3, l4, l5 = 1 / 2, -2 / 3, 3 / 5
    cs = CumulantSet.from_cumulants([1.0, l3, l4, l5])
    expected = {
        1: [l3 / 6],
        2: [l4 / 24, l3 ** 2 / 72],
        3: [l5 / 120, l3 * l4 / 144, l3 ** 3 / 1296],
    }
    worst = 0.0
    for nu, coeffs in expected.items():
        got = q_coefficients(cs, nu)[1:]
        worst = max(worst, max(abs(g - e) / abs(e) for g, e in zip(got, coeffs)))
    # Unit lambdas recover the bare denominators 1/6, 1/72, 1/24, 1/1296, 1/144, 1/120.
    unit = CumulantSet.from_cumulants([1.0, 1.0, 1.0, 1.0])
    bare = np.concatenate([q_coefficients(unit, nu)[1:] for nu in (1, 2, 3)])
    target = np.array([1 / 6, 1 / 24, 1 / 72, 1 / 120, 1 / 144, 1 / 1296])
    worst = max(worst, float(np.max(np.abs(bare - target) / target)))
    report(3, "Q1-Q3 coefficient sets", worst <= 1e-12, f"max rel err {worst:.2e} (tol 1e-12)")


def test_criterion_04_exact_series_vs_oracle(report, bounded_model):
    start = time.perf_counter()
    cs = cumulant_set(bounded_model.centered(), 40, 5.0)
    worst, worst_bound, verdicts = 0.0, 0.0, set()
    for x1, x2 in itertools.combinations(range(-3, 4), 2):
        res = cdf_difference_exact(cs, x1, x2)
        ref = cf_inversion_cdf_diff(bounded_model, 5.0, x1, x2)
        worst = max(worst, abs(res.value - ref.value))
        worst_bound = max(worst_bound, ref.error_bound)
        verdicts.add(res.verdict)
    elapsed = time.perf_counter() - start
    ok = worst <= 5e-4 and worst_bound <= 1e-8 and verdicts == {"converged"} and elapsed < 60
    report(4, "exact series vs inversion oracle", ok,
           f"max diff {worst:.2e} (tol 5e-4), oracle bound {worst_bound:.1e} (<= 1e-8), "
           f"verdicts {sorted(verdicts)}, {elapsed:.1f}s (< 60s)")


def test_criterion_05_convergence_order(report, bounded_model):
    times = [4.0, 16.0, 64.0, 256.0]
    grid = np.linspace(-3, 3, 13)
    errors = {n: [] for n in (1, 2, 3)}
    for t in times:
        ref = np.array([cf_inversion_cdf(bounded_model, t, x).value for x in grid])
        cs = cumulant_set(bounded_model.centered(), 3, t)
        for n in errors:
            approx = np.array([cdf_truncated(cs, x, n).value for x in grid])
            errors[n].append(float(np.max(np.abs(approx - ref))))
    slopes = {n: float(np.polyfit(np.log(times), np.log(e), 1)[0]) for n, e in errors.items()}
    ok = all(abs(s + (n + 1) / 2) <= 0.3 for n, s in slopes.items())
    detail = ", ".join(f"N={n}: {s:.3f} (target {-(n + 1) / 2})" for n, s in slopes.items())
    report(5, "truncation error rate", ok, detail)


def _gauss_legendre(f, a, b, panels=48, order=20):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        nodes = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x
        total += 0.5 * (hi - lo) * sum(wi * f(xi) for xi, wi in zip(nodes, w))
    return total


def test_criterion_06_density_series(report, bounded_t5):
    mass = _gauss_legendre(lambda x: pdf_series(bounded_t5, x).value, -6.0, 6.0)
    h = 1e-4
    worst = 0.0
    for x in np.linspace(-3, 3, 25):
        fd = (cdf_difference_exact(bounded_t5, -8.0, x + h).value
              - cdf_difference_exact(bounded_t5, -8.0, x - h).value) / (2 * h)
        worst = max(worst, abs(fd - pdf_series(bounded_t5, x).value))
    ok = abs(mass - 1) <= 1e-4 and worst <= 1e-4
    report(6, "density series", ok,
           f"integral over [-6,6] = {mass:.8f} (1 +- 1e-4), max FD gap {worst:.2e} (tol 1e-4)")


def test_criterion_07_abs_identities(report, bounded_t5):
    worst_pair, worst_sum = 0.0, 0.0
    for x in (0.5, 1.0, 2.0):
        inside = abs_cdf(bounded_t5, x).value
        worst_pair = max(worst_pair, abs(inside - cdf_difference_exact(bounded_t5, -x, x).value))
        worst_sum = max(worst_sum, abs(inside + abs_tail(bounded_t5, x).value - 1.0))
    ok = worst_pair <= 1e-12 and worst_sum <= 1e-12
    report(7, "absolute-value identities", ok,
           f"|abs - diff| {worst_pair:.1e}, |abs + tail - 1| {worst_sum:.1e} (tol 1e-12)")


def test_criterion_08_iid_expansion(report):
    summand = CumulantSet.from_cumulants([float(math.factorial(k - 1)) for k in range(2, 7)])
    n = 50
    grid = np.linspace(-2, 3, 51)
    exact = np.array([gamma_cdf(n, n + math.sqrt(n) * x) for x in grid])
    err = {k: float(np.max(np.abs([iid_sum_cdf(summand, n, x, k) for x in grid] - exact)))
           for k in (3, 4)}
    ok = err[4] <= 5e-3 and err[4] < err[3]
    report(8, "i.i.d. exponential sums", ok,
           f"k=4 error {err[4]:.2e} (tol 5e-3), k=3 error {err[3]:.2e}")


def test_criterion_09_partition_and_hermite_suites(report):
    failures = []
    for nu in range(1, 13):
        ranges = [range(nu // m + 1) for m in range(1, nu + 1)]
        brute = {k for k in itertools.product(*ranges)
                 if sum(m * km for m, km in zip(range(1, nu + 1), k)) == nu}
        if {s.multiplicities for s in enumerate_solutions(nu)} != brute or partition_count(nu) != len(brute):
            failures.append(f"p({nu})")
    xs = np.linspace(-6, 6, 49)
    for n in range(0, 31):
        coef = np.zeros(n + 1)
        coef[n] = 1.0
        ref = hermite_e.hermeval(xs, coef)
        got = np.array([hermite(n, x) for x in xs])
        if np.max(np.abs(got - ref) / np.maximum(1, np.abs(ref))) > 1e-12:
            failures.append(f"H_{n} values")
        if any(hermite(n, -x) != (-1) ** n * hermite(n, x) for x in xs):
            failures.append(f"H_{n} parity")
        if n:
            dref = hermite_e.hermeval(xs, hermite_e.hermeder(coef))
            dgot = np.array([n * hermite(n - 1, x) for x in xs])
            if np.max(np.abs(dgot - dref) / np.maximum(1, np.abs(dref))) > 1e-10:
                failures.append(f"H_{n} derivative")
    report(9, "partition and Hermite suites", not failures,
           "all checks pass" if not failures else ", ".join(failures))


def test_criterion_10_negative_control(report, gamma_tail_model):
    conditions = check_conditions(gamma_tail_model)
    cs = cumulant_set(gamma_tail_model.centered(), 40, 1.0)
    try:
        cdf_difference_exact(cs, -1.0, 1.0)
        refused = False
    except ConditionGateError:
        refused = True
    forced = cdf_difference_exact(cs, -1.0, 1.0, override=True)
    ok = (refused and conditions.density_tail_decay.status == "fails"
          and forced.verdict == "diverging" and forced.unverified)
    report(10, "gamma-tail negative control", ok,
           f"gate refused={refused}, tail check {conditions.density_tail_decay.status} for "
           f"eps in {conditions.density_tail_decay.params.get('eps_tested')}, "
           f"override verdict {forced.verdict}")
