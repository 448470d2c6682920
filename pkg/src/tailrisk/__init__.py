"""Importance-sampling estimates of VaR and expected shortfall for heavy-tailed random walks."""

from .dist import HeavyTailDistribution, ParetoShifted
from .samplers import (
    Algorithm,
    ConfigError,
    MixtureConfig,
    WeightedSample,
    WeightedSampleSet,
    batch,
    sample_conditional_mixture,
    sample_scaling_mixture,
    sample_standard,
    simulate_from_uniforms,
)
from .edf import (
    MassDeficitWarning,
    RiskEstimate,
    WeightedTailEdf,
    build,
    empirical_rho,
    es_estimate,
    risk_estimate,
    second_moment_ratio,
    var_estimate,
)

__version__ = "0.1.0"
