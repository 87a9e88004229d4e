"""Joint semi-parametric estimation and bootstrap inference for INAR(p) count series."""

from .applications import (
    DispersionInference,
    DispersionPair,
    PredictiveInference,
    PredictiveTarget,
    dispersion_ci,
    dispersion_innovations,
    dispersion_observations,
    predictive_ci,
    predictive_probability,
)
from .bootstrap import (
    BootstrapDraws,
    ConfidenceInterval,
    DrawSnapshot,
    empirical_quantile,
    hall_interval,
    parametric_poi_bootstrap,
    sp_inar_bootstrap,
)
from .errors import (
    BootstrapError,
    ConditioningError,
    ConfigError,
    DegenerateSeriesError,
    DomainError,
    InarBootError,
    InputError,
    ParameterError,
    UndefinedDispersionError,
)
from .estimation import FitResult, OptimizerConfig, moment_init, npmle_fit, poisson_ml_fit
from .kernel import (
    SupportBounds,
    TransitionQuery,
    conditional_expectation_A,
    conditional_log_likelihood,
    innovation_posterior,
    score_alpha,
    support_bounds,
    transition_probability,
    transition_probability_inar1,
)
from .model import InarModel
from .pmf import Pmf, explicit_pmf, geometric_pmf, make_pmf, negbin_pmf, poisson_pmf
from .rng import DEFAULT_SEED, SeedSpec, as_generator
from .series import CountSeries, read_series_csv, write_series_csv
from .simulate import binomial_thinning, simulate_inar, simulate_inarch
from .study import (
    CellStats,
    InarchDgp,
    NbInarDgp,
    PoiInarDgp,
    StudyConfig,
    StudyResult,
    emit_table,
    run_study,
    simulate_dgp,
    true_functional,
)

__version__ = "0.1.0"
