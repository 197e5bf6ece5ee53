"""Variable-metric evolution strategies for high-dimensional optimization.

The package bundles three strategy kernels (population-based LM-MA-ES, its
elitist (1+1) variant with a low-rank metric, and a full-covariance Cholesky
baseline), an indicator-based multi-objective engine built from populations
of (1+1) instances, a bi-objective quadratic benchmark suite with
analytically known linear Pareto fronts, hypervolume-based quality metrics,
and a reproducible experiment harness with a command-line driver.
"""

from .problems import (
    BiObjectiveProblem,
    DimensionMismatchError,
    FunctionKind,
    QuadraticForm,
    SingleObjectiveProblem,
    UnknownProblemError,
    eval_single,
    make_biobjective,
)
from .strategies import (
    CholeskyEs,
    CholeskyParams,
    ElitistLmmaEs,
    ElitistParams,
    LmmaEs,
    LmmaParams,
    NonFiniteObjectiveError,
    default_cholesky_params,
    default_elitist_params,
    default_lmma_params,
)
from .moea import (
    EngineConfig,
    Individual,
    RankedPopulation,
    SelectionScheme,
    StrategyKind,
    dominates,
    engine_generation,
    hv_contributions_2d,
    hypervolume_2d,
    init_population,
    nondominated_sort,
    rank_population,
)
from .metrics import (
    FRONT_ENDPOINTS,
    OPTIMAL_FRONT_HYPERVOLUME,
    REFERENCE_POINT,
    hypervolume_gap,
    optimal_hypervolume,
    optimal_mu_distribution,
)
from .experiment import ExperimentConfig, RunRecord, RunStream, UsageError, run_experiment, summarize

__version__ = "0.1.0"

__all__ = [
    "BiObjectiveProblem",
    "CholeskyEs",
    "CholeskyParams",
    "DimensionMismatchError",
    "ElitistLmmaEs",
    "ElitistParams",
    "EngineConfig",
    "ExperimentConfig",
    "FRONT_ENDPOINTS",
    "FunctionKind",
    "Individual",
    "LmmaEs",
    "LmmaParams",
    "NonFiniteObjectiveError",
    "OPTIMAL_FRONT_HYPERVOLUME",
    "QuadraticForm",
    "RankedPopulation",
    "REFERENCE_POINT",
    "RunRecord",
    "RunStream",
    "SelectionScheme",
    "SingleObjectiveProblem",
    "StrategyKind",
    "UnknownProblemError",
    "UsageError",
    "default_cholesky_params",
    "default_elitist_params",
    "default_lmma_params",
    "dominates",
    "engine_generation",
    "eval_single",
    "hv_contributions_2d",
    "hypervolume_2d",
    "hypervolume_gap",
    "init_population",
    "make_biobjective",
    "nondominated_sort",
    "optimal_hypervolume",
    "optimal_mu_distribution",
    "rank_population",
    "run_experiment",
    "summarize",
]
