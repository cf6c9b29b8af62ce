"""Quantum random access codes: analytic ASP bounds, explicit strategies, seesaw search."""

from ._kernels import BACKEND
from .bounds import (
    BoundReport,
    bound_report,
    corollary_bound,
    known_exact_value,
    result1_bound,
    result2_bound,
    vicente_bound,
)
from .errors import (
    NotPSDError,
    NumericError,
    QracError,
    StrategyFormatError,
    UnsupportedDimensionError,
    ValidationError,
)
from .fileformat import load_strategy, save_strategy, strategy_from_dict, strategy_to_dict
from .rac import (
    RacSetting,
    Strategy,
    Violation,
    best_response_value,
    evaluate_asp,
    tuple_rank,
    tuple_unrank,
    validate_strategy,
)
from .seesaw import SeesawConfig, SeesawResult, SeesawTrace, measurement_step, seesaw_run, state_step
from .strategies import (
    cube_strategy_322,
    fourier_basis,
    mub_bases,
    mub_strategy,
    mub_triple_products,
    n2_optimal_strategy,
    optimal_states_for_measurements,
    weyl_generators,
)

__version__ = "0.1.0"
