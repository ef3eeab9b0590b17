import math
from pathlib import Path

import pytest

from levyedge import LevyMeasure, LevyTriplet, PowerExpPiece, cumulant_set

MODELS = Path(__file__).resolve().parent.parent / "models"


def uniform_piece(rate=5.0):
    return PowerExpPiece(c=rate, p=0.0, beta=0.0, q=1.0, lower=0.0, upper=1.0)


def gamma_tail_piece(lower=0.01):
    return PowerExpPiece(c=1.0, p=-1.0, beta=1.0, q=1.0, lower=lower, upper=math.inf)


@pytest.fixture(scope="session")
def bounded_model():
    """sigma2 = 1 plus uniform(0, 1] jumps at rate 5."""
    return LevyTriplet(sigma2=1.0, measure=LevyMeasure(pieces=(uniform_piece(),)))


@pytest.fixture(scope="session")
def bounded_t5(bounded_model):
    return cumulant_set(bounded_model.centered(), 40, 5.0)


@pytest.fixture(scope="session")
def gaussian_model():
    return LevyTriplet(sigma2=1.0)


@pytest.fixture(scope="session")
def one_sided_model():
    return LevyTriplet(measure=LevyMeasure(pieces=(uniform_piece(),)), density_declared=True)


@pytest.fixture(scope="session")
def gamma_tail_model():
    return LevyTriplet(measure=LevyMeasure(pieces=(gamma_tail_piece(),)), density_declared=True)
