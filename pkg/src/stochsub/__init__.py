"""Adaptive query strategies for stochastic monotone submodular maximization."""
from .core import ActivationScenario, GroundSet, QueryTranscript, RandomSource, sample_activation, uniform_probs
from .domains import (
    CardinalityDomain,
    IntersectionDomain,
    KnapsackDomain,
    MatchingDomain,
    MatroidBaseDomain,
    MatroidDomain,
    PartitionMatroid,
    SetPackingDomain,
    UniformMatroid,
    k_exchange_certificate,
)
from .objectives import CoverageObjective, LinearObjective, TableObjective, check_axioms
from .solvers import Solver, omniscient_optimum, solve
from .strategy import (
    StrategyConfig,
    StrategyReport,
    compute_round_count,
    run_adaptive_local_search,
    run_algorithm1,
    run_knapsack_combined,
)

__version__ = "0.1.0"
