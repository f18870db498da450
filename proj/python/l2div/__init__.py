"""Kernel U-statistic estimation of the squared L2 divergence."""

from ._l2div import (
    ConfidenceInterval,
    DivergenceEstimate,
    PermutationResult,
    VarianceEstimate,
    bandwidth,
    bilinear_term,
    confidence_interval,
    eval_kernel,
    gaussian_l2,
    kde,
    kernel_moments,
    l2_divergence,
    normal_cdf,
    normal_quantile,
    permutation_test,
    quadratic_term,
    sample_gaussian,
    variance_plugin,
)

__all__ = [
    "ConfidenceInterval",
    "DivergenceEstimate",
    "PermutationResult",
    "VarianceEstimate",
    "bandwidth",
    "bilinear_term",
    "confidence_interval",
    "eval_kernel",
    "gaussian_l2",
    "kde",
    "kernel_moments",
    "l2_divergence",
    "normal_cdf",
    "normal_quantile",
    "permutation_test",
    "quadratic_term",
    "sample_gaussian",
    "variance_plugin",
]
