"""Exact earth mover's distance between equal-size uniform sample sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from ..errors import InputError

MAX_EXACT_POINTS = 4096


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Weighted point cloud; ``points`` is ``(m, d)``, ``weights`` sum to 1."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        w = np.asarray(self.weights, dtype=np.float64)
        if pts.ndim != 2 or w.shape != (pts.shape[0],):
            raise InputError("points must be (m, d) with one weight per point")
        if not np.all(np.isfinite(pts)):
            raise InputError("points must be finite")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise InputError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, points) -> "EmpiricalDistribution":
        pts = np.asarray(points, dtype=np.float64)
        m = pts.shape[0]
        return cls(pts, np.full(m, 1.0 / m))

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def is_uniform(self) -> bool:
        return bool(np.allclose(self.weights, 1.0 / self.size, rtol=0, atol=1e-15))


def empirical_wasserstein(A: EmpiricalDistribution, B: EmpiricalDistribution,
                          max_points: int = MAX_EXACT_POINTS) -> float:
    """W1 between two equal-size uniform point clouds by min-cost perfect matching."""
    if A.dim != B.dim:
        raise InputError(f"dimension mismatch: {A.dim} vs {B.dim}")
    if A.size != B.size:
        raise InputError(f"exact EMD needs equal sizes, got {A.size} and {B.size}")
    if not (A.is_uniform() and B.is_uniform()):
        raise InputError("exact EMD needs uniform weights")
    if A.size > max_points:
        raise InputError(f"exact EMD limited to {max_points} points, got {A.size}")
    cost = cdist(A.points, B.points)
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum() / A.size)
