"""Lipschitz extension moduli and the e^n <= e_n + 2 gluing construction on finite metric spaces."""

from .errors import *  # noqa: F401,F403
from .gluing import GluingTrace, claim1_bound, glue, paper_form_bound, run_claim1, select_near_nearest
from .metric import (
    Euclidean,
    Finite,
    FiniteMetricSpace,
    LipschitzReport,
    PartialMap,
    RealLine,
    cycle_metric,
    distance_to_subset,
    equilateral,
    graph_metric,
    lipschitz_constant,
    make_map,
    path_metric,
    points_to_metric,
    validate_metric,
)
from .moduli import (
    Claim1Check,
    ModulusResult,
    check_claim1,
    e_n,
    e_up_n,
    modulus_for_subset,
    modulus_for_subset_euclidean,
    witness_ratio,
)
from .solvers import ExtensionResult, brute_force_extend, euclidean_extend, extend, mcshane_extend

__version__ = "0.1.0"
