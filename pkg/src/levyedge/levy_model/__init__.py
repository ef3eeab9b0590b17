"""Levy triplets, their cumulants, and the sufficient-condition checks."""

from .conditions import ConditionCheck, ConditionReport, check_conditions
from .config import dumps_model, load_model, loads_model, model_from_dict, save_model
from .measure import Atom, LevyMeasure, PowerExpPiece, TabulatedPiece
from .triplet import (
    AffineMap,
    CumulantSet,
    LatticeCramerWarning,
    LevyTriplet,
    characteristic_exponent,
    cumulant,
    cumulant_set,
    standardize,
)

__all__ = [
    "AffineMap",
    "Atom",
    "ConditionCheck",
    "ConditionReport",
    "CumulantSet",
    "LatticeCramerWarning",
    "LevyMeasure",
    "LevyTriplet",
    "PowerExpPiece",
    "TabulatedPiece",
    "characteristic_exponent",
    "check_conditions",
    "cumulant",
    "cumulant_set",
    "dumps_model",
    "load_model",
    "loads_model",
    "model_from_dict",
    "save_model",
    "standardize",
]
