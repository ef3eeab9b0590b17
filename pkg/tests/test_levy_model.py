import cmath
import json
import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyedge import (
    Atom,
    CumulantSet,
    LevyMeasure,
    LevyTriplet,
    ModelError,
    MomentDoesNotExist,
    PowerExpPiece,
    TabulatedPiece,
    characteristic_exponent,
    cumulant,
    cumulant_set,
    loads_model,
    standardize,
)
from levyedge.levy_model import LatticeCramerWarning, dumps_model, load_model
from levyedge.levy_model.measure import expm1i_minus_linear

from conftest import MODELS, gamma_tail_piece, uniform_piece

ATOM5 = LevyTriplet(measure=LevyMeasure(atoms=(Atom(1.0, 5.0),)))


def test_cumulant_examples(bounded_model):
    assert cumulant(LevyTriplet(sigma2=1.0), 2, 3.0) == 3.0
    for k in range(2, 9):
        assert cumulant(ATOM5, k) == pytest.approx(5.0, rel=1e-15)
    assert cumulant(bounded_model, 3) == pytest.approx(1.25, rel=1e-10)
    assert cumulant(bounded_model, 2) == pytest.approx(1.0 + 5.0 / 3.0, rel=1e-10)


@pytest.mark.parametrize("k", range(2, 13))
def test_uniform_cumulants_closed_form(bounded_model, k):
    expected = 5.0 / (k + 1) + (1.0 if k == 2 else 0.0)
    assert cumulant(bounded_model, k) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("k", [2, 3, 5, 10, 20])
def test_gamma_process_cumulants(k):
    model = LevyTriplet(measure=LevyMeasure(pieces=(gamma_tail_piece(lower=0.0),)))
    assert cumulant(model, k) == pytest.approx(math.factorial(k - 1), rel=1e-10)


def test_truncated_gamma_moments_match_mpmath():
    model = LevyTriplet(measure=LevyMeasure(pieces=(gamma_tail_piece(),)))
    for k in (2, 4, 7):
        expected = float(mpmath.gammainc(k, 0.01))
        assert cumulant(model, k) == pytest.approx(expected, rel=1e-10)


def test_cumulant_set_examples(bounded_model):
    g = cumulant_set(LevyTriplet(sigma2=1.0), 5, 1.0)
    assert g.gammas[0] == 1.0 and all(v == 0.0 for v in g.gammas[1:])
    assert g.lam(2) == 1.0 and g.is_gaussian
    assert cumulant_set(bounded_model, 1, 4.0).gamma(3) == pytest.approx(5.0, rel=1e-10)
    a = cumulant_set(ATOM5, 6, 1.0)
    for nu in range(2, 9):
        assert a.lam(nu) == pytest.approx(5.0 ** (1 - nu / 2), rel=1e-13)


@settings(max_examples=25, deadline=None)
@given(
    sigma2=st.floats(0.0, 3.0),
    rate=st.floats(0.1, 10.0),
    width=st.floats(0.05, 2.0),
    k=st.integers(2, 12),
    t=st.sampled_from([0.5, 1.0, 4.0, 100.0]),
)
def test_time_linearity(sigma2, rate, width, k, t):
    piece = PowerExpPiece(c=rate, p=0.0, beta=0.0, q=1.0, lower=-width, upper=0.0)
    model = LevyTriplet(sigma2=sigma2, measure=LevyMeasure(pieces=(piece,)))
    one = cumulant(model, k, 1.0)
    assert cumulant(model, k, t) == pytest.approx(t * one, rel=1e-12, abs=1e-300)


def test_bounded_support_lambda_growth(bounded_model):
    cs = cumulant_set(bounded_model, 38, 1.0)
    C = max(1.0, cs.V) / cs.V
    for nu in range(2, 41):
        assert abs(cs.lam(nu)) <= C ** nu * (1 + 1e-12)


def test_lambda_two_is_exactly_one(bounded_model):
    for t in (0.3, 1.0, 7.0):
        assert cumulant_set(bounded_model, 4, t).lambdas[0] == 1.0


def test_cumulant_errors(bounded_model):
    with pytest.raises(ValueError):
        cumulant(bounded_model, 1)
    with pytest.raises(ValueError):
        cumulant(bounded_model, 63)
    heavy = LevyTriplet(measure=LevyMeasure(pieces=(
        PowerExpPiece(c=1.0, p=-4.5, beta=0.0, q=1.0, lower=1.0, upper=math.inf),)))
    assert cumulant(heavy, 3) > 0
    with pytest.raises(MomentDoesNotExist):
        cumulant(heavy, 4)
    with pytest.raises(ModelError):
        CumulantSet(t=1.0, gammas=(0.0, 1.0))


def test_at_time_scales_linearly(bounded_t5):
    one = bounded_t5.at_time(1.0)
    for a, b in zip(one.gammas, bounded_t5.gammas):
        assert b == pytest.approx(5.0 * a, rel=1e-15)


# -- characteristic exponent ---------------------------------------------------

def test_exponent_examples(bounded_model):
    assert characteristic_exponent(LevyTriplet(sigma2=1.0), 2.0) == -2.0
    for s in (0.3, 1.0, 4.0):
        assert characteristic_exponent(ATOM5, s) == pytest.approx(
            5.0 * (cmath.exp(1j * s) - 1 - 1j * s), rel=1e-14)
    jumps = LevyTriplet(measure=LevyMeasure(pieces=(uniform_piece(),)))
    closed = 5.0 * ((cmath.exp(1j) - 1) / 1j - 1 - 0.5j)
    assert characteristic_exponent(jumps, 1.0) == pytest.approx(closed, rel=1e-12)


@given(st.floats(-50, 50))
def test_exponent_symmetry(s):
    model = LevyTriplet(sigma2=0.5, rho=0.2, measure=LevyMeasure(
        atoms=(Atom(-0.5, 1.0),), pieces=(uniform_piece(2.0),)))
    assert characteristic_exponent(model, 0.0) == 0.0
    assert characteristic_exponent(model, -s) == pytest.approx(
        characteristic_exponent(model, s).conjugate(), rel=1e-12, abs=1e-14)


def test_exponent_derivatives_give_cumulants(bounded_model):
    # i^{-k} d^k/ds^k (t psi) at 0 via mpmath differentiation of the closed form.
    t = 2.0

    def log_cf(s):
        return t * (-0.5 * s * s + 5 * ((mpmath.exp(1j * s) - 1) / (1j * s) - 1 - 0.5j * s))

    for k in range(2, 7):
        d = mpmath.diff(log_cf, mpmath.mpf("1e-30"), k)
        assert complex(d / (1j ** k)).real == pytest.approx(cumulant(bounded_model, k, t), rel=1e-4)


def test_expm1i_minus_linear_small_arguments():
    for theta in (1e-9, 3e-3, 0.02, 0.3, 0.49, 0.51, 1.0, 30.0):
        with mpmath.workdps(50):
            th = mpmath.mpf(theta)
            expected = complex(mpmath.exp(1j * th) - 1 - 1j * th)
        got = expm1i_minus_linear(np.array([theta]))[0]
        assert abs(got - expected) <= 1e-15 * abs(expected)


# -- standardize ----------------------------------------------------------------

def test_standardize_examples():
    m, centered = standardize(LevyTriplet(sigma2=4.0, rho=3.0), 1.0)
    assert (m.shift, m.scale) == (3.0, 2.0)
    assert m(5.0) == 1.0 and m.inverse(1.0) == 5.0
    assert centered.mean() == 0.0
    m, _ = standardize(LevyTriplet(sigma2=1.0, rho=0.5, measure=ATOM5.measure), 2.0)
    assert m.shift == pytest.approx(2.0 * 0.5, abs=1e-15)
    with pytest.raises(ModelError):
        standardize(LevyTriplet(), 1.0)


def test_large_jump_mean_enters_shift():
    model = LevyTriplet(measure=LevyMeasure(atoms=(Atom(2.0, 3.0),)))
    m, centered = standardize(model, 1.5)
    assert m.shift == pytest.approx(1.5 * 6.0)
    assert centered.rho == -6.0


# -- construction invariants -----------------------------------------------------

def test_model_validation():
    with pytest.raises(ModelError):
        Atom(0.0, 1.0)
    with pytest.raises(ModelError):
        Atom(1.0, -1.0)
    with pytest.raises(ModelError):
        PowerExpPiece(c=1.0, p=0.0, beta=0.0, q=1.0, lower=-1.0, upper=1.0)
    with pytest.raises(ModelError):
        LevyTriplet(sigma2=-1.0)
    with pytest.raises(ModelError):
        # |u|^{-3.5} near 0 does not integrate u^2.
        LevyMeasure(pieces=(PowerExpPiece(c=1.0, p=-3.5, beta=0.0, q=1.0, lower=0.0, upper=1.0),))


def test_lattice_cramer_warning():
    with pytest.warns(LatticeCramerWarning):
        LevyTriplet(measure=ATOM5.measure, cramer_declared=True)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        LevyTriplet(sigma2=1.0, measure=ATOM5.measure, cramer_declared=True)


def test_tabulated_piece_moments():
    piece = TabulatedPiece(x=(0.5, 1.0, 2.0), y=(0.0, 2.0, 0.0))
    model = LevyTriplet(measure=LevyMeasure(pieces=(piece,)))
    # Triangle density: exact moments by mpmath quadrature of the hat function.
    def dens(u):
        return 4 * (u - 0.5) if u < 1 else 2 * (2 - u)
    for k in (2, 3, 6):
        expected = float(mpmath.quad(lambda u: u ** k * dens(u), [0.5, 1, 2]))
        assert cumulant(model, k) == pytest.approx(expected, rel=1e-13)


# -- config ------------------------------------------------------------------------

@pytest.mark.parametrize("path", sorted(MODELS.glob("*.json")), ids=lambda p: p.stem)
def test_model_files_roundtrip(path):
    model = load_model(path)
    text = dumps_model(model)
    assert dumps_model(loads_model(text)) == text
    assert loads_model(text) == model


def test_roundtrip_preserves_awkward_floats():
    model = LevyTriplet(sigma2=0.1 + 0.2, rho=-1e-300, measure=LevyMeasure(
        atoms=(Atom(1 / 3, 2 ** -40),),
        pieces=(TabulatedPiece(x=(-2.0, -0.7), y=(0.3, 1 / 7)),
                PowerExpPiece(c=1.5, p=0.5, beta=2.0, q=1.5, lower=0.25, upper=math.inf))))
    text = dumps_model(model)
    assert loads_model(text) == model
    assert dumps_model(loads_model(text)) == text
    assert json.loads(text)["density_pieces"][1]["support"] == [0.25, None]


@pytest.mark.parametrize("text", [
    "not json",
    "[]",
    '{"sigma2": 1, "bogus": 2}',
    '{"atoms": [{"x": 1}]}',
    '{"density_pieces": [{"kind": "spline", "params": {}, "support": [0, 1]}]}',
    '{"sigma2": 1, "cramer_declared": "yes"}',
])
def test_bad_configs(text):
    with pytest.raises(ModelError):
        loads_model(text)
