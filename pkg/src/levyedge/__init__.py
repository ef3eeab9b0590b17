"""Edgeworth-type expansions for the laws of Levy processes."""

import math

__version__ = "0.1.0"

from .edgeworth import (
    SeriesResult,
    abs_cdf,
    abs_tail,
    cdf_difference_exact,
    cdf_truncated,
    cdf_truncated_values,
    iid_sum_cdf,
    one_sided_cdf,
    pdf_series,
    q_coefficients,
    q_derivative,
    q_function,
)
from .errors import (
    ConditionGateError,
    LevyEdgeError,
    ModelError,
    MomentDoesNotExist,
    QuadratureError,
    SeriesDivergenceError,
)
from .levy_model import (
    AffineMap,
    Atom,
    CumulantSet,
    LevyMeasure,
    LevyTriplet,
    PowerExpPiece,
    TabulatedPiece,
    characteristic_exponent,
    check_conditions,
    cumulant,
    cumulant_set,
    load_model,
    loads_model,
    standardize,
)
from .oracles import OracleEstimate, cf_inversion_cdf, cf_inversion_cdf_diff, gamma_cdf, simulate_cdf
from .partitions import PartitionSolution, enumerate_solutions, partition_count
from .special_functions import hermite, hermite_row, std_normal_cdf, std_normal_pdf

__all__ = [
    name for name, obj in globals().items()
    if not name.startswith("_") and not isinstance(obj, type(math))
]
