"""Softplus and neural-network INGARCH models for overdispersed count series.

A numpy/scipy library covering simulation, conditional maximum likelihood
estimation, moment approximation, residual diagnostics, and one-step-ahead
forecasting for count time series whose conditional mean follows a softplus
link on a linear predictor or a single-hidden-layer network, with Poisson or
negative binomial conditional distributions.
"""

__version__ = "0.1.0"

from .data import CountSeries, as_counts
from .diagnostics import (
    ResidualSeries,
    cumulative_periodogram,
    dispersion_ratio,
    iterated_forecasts,
    one_step_forecasts,
    pacf_from_acf,
    pearson_residuals,
    rmse,
    sample_acf,
    sample_pacf,
)
from .distributions import RngStream, nb_log_pmf, nb_sample, poisson_log_pmf, poisson_sample
from .estimate import (
    FitResult,
    OptimizerOptions,
    StudyCell,
    StudyTable,
    fit_cml,
    information_criteria,
    init_params,
    negloglik,
    simulation_study,
    standard_errors,
)
from .exceptions import ConvergenceWarning, DataError, NumericError, ParameterError
from .model import (
    NEGBIN,
    NEURAL,
    POISSON,
    SOFTPLUS_LINEAR,
    LinearMoments,
    LinearParams,
    ModelSpec,
    StationarityReport,
    check_stationarity,
    conditional_mean_path,
    linear_acvf_general,
    linear_moments_11,
)
from .neural import (
    NeuralWeights,
    fit_neural,
    neural_gradient,
    neural_lambda_path,
    neural_negloglik,
    select_hidden_units,
    slfn_forward,
)
from .simulate import EmpiricalMoments, MomentRow, SimConfig, empirical_moments, moment_study, simulate_path
from .special import log_gamma, logistic, relu, softplus, softplus_deriv, softplus_inverse
