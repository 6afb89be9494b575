"""Distances between pushforward laws: exact 1-D CDFs and empirical EMD."""

from .cdf import PiecewiseLinearCdf, empirical_cdf, pushforward_cdf_1d, wasserstein_1d
from .emd import EmpiricalDistribution, empirical_wasserstein
from .sampling import SourceDistribution, sample_pushforward

__all__ = [
    "EmpiricalDistribution", "PiecewiseLinearCdf", "SourceDistribution", "empirical_cdf",
    "empirical_wasserstein", "pushforward_cdf_1d", "sample_pushforward", "wasserstein_1d",
]
