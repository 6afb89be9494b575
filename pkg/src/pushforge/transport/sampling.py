"""Seeded source distributions and empirical pushforwards."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from ..network import Network
from .emd import EmpiricalDistribution

KINDS = ("uniform_box", "standard_normal")


@dataclass(frozen=True)
class SourceDistribution:
    """``U([0,1]^dims)`` or ``N(0, I_dims)`` with a fixed 64-bit seed.

    Draws come from the counter-based Philox generator keyed by the seed, so
    a (seed, count) pair always yields the same samples.
    """

    kind: str
    dims: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown source kind {self.kind!r}; expected one of {KINDS}")
        if int(self.dims) != self.dims or self.dims < 1:
            raise InputError(f"dims must be a positive integer, got {self.dims}")
        if not (0 <= int(self.seed) < 2 ** 64):
            raise InputError("seed must fit in 64 bits")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=int(self.seed)))

    def sample(self, count: int) -> np.ndarray:
        if count < 1:
            raise InputError("sample count must be positive")
        g = self.generator()
        if self.kind == "uniform_box":
            return g.random((count, self.dims))
        return g.standard_normal((count, self.dims))


def sample_pushforward(net: Network, source: SourceDistribution, count: int) -> EmpiricalDistribution:
    """Evaluate ``net`` on ``count`` seeded draws from ``source``."""
    if source.dims != net.input_dim:
        raise InputError(f"source has {source.dims} dims, network expects {net.input_dim}")
    x = source.sample(count)
    return EmpiricalDistribution.uniform(net(x))
