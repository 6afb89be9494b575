"""Reference values for the standard normal distribution."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr, ndtri

from ..errors import InputError

SQRT_2PI = math.sqrt(2.0 * math.pi)


def normal_cdf_ref(x):
    """Phi(x), accurate to about 1e-16 relative in both tails."""
    return ndtr(np.asarray(x, dtype=np.float64))


def normal_pdf(x):
    x = np.asarray(x, dtype=np.float64)
    return np.exp(-0.5 * x * x) / SQRT_2PI


def normal_quantile_ref(p):
    """Phi^{-1}(p) for p in (0, 1)."""
    p = np.asarray(p, dtype=np.float64)
    if np.any(~(p > 0)) or np.any(~(p < 1)):
        raise InputError("quantile argument must lie in (0, 1)")
    return ndtri(p)


def normal_tail_mean(x: float) -> float:
    """Integral of Phi over (-inf, x]: x Phi(x) + phi(x)."""
    return float(x * normal_cdf_ref(x) + normal_pdf(x))


def erfc_cdf(x: float) -> float:
    """Independent scalar route via math.erfc, used to cross-check the reference."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))
