"""Tent maps and the space-filling generator built from them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError, InsufficientCarryError
from ..network import AffineLayer, Network, linear_net
from .wiring import Wiring


def tent_value(k: int, x):
    """Closed-form k-piece tent map on [0, 1] (reference implementation)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.mod(k * x, 2.0)
    return np.where(y <= 1.0, y, 2.0 - y)


def tent_coefficients(k: int) -> np.ndarray:
    """Output weights of the k-unit tent layer ``sum_i c_i relu(k x - i)``."""
    c = np.array([2.0 * (-1) ** i for i in range(k)])
    c[0] = 1.0
    return c


def tent_map_net(k: int) -> Network:
    """Two-layer network with k hidden units computing t_k exactly on [0, 1]."""
    if int(k) != k or k < 1:
        raise InputError(f"tent map frequency must be a positive integer, got {k}")
    k = int(k)
    hidden = AffineLayer(np.full((k, 1), float(k)), -np.arange(k, dtype=np.float64))
    out = AffineLayer(tent_coefficients(k)[None, :], [0.0], "identity")
    return Network([hidden, out])


@dataclass
class SpaceFillingPlan:
    """Node allocation actually wired by :func:`space_filling_net`.

    ``outputs_per_input[i]`` is the number of outputs driven by input ``i``;
    ``nodes[l][i]`` counts the tent units of input ``i`` in hidden layer ``l``;
    ``k`` is the per-output frequency ratio (output ``e`` of input ``i`` is
    ``t_{k^e}(x_i)``).
    """

    n: int
    d: int
    N: int
    L: int
    outputs_per_input: list[int]
    run_length: int
    nodes: list[list[int]] = field(default_factory=list)
    k: int = 1
    carry_nodes: int = 0
    node_count: int = 0

    @property
    def space_filling_nodes(self) -> int:
        return int(sum(sum(row) for row in self.nodes))

    @property
    def coupling_bound(self) -> float:
        """Wasserstein bound sqrt(d)/k from the box coupling."""
        return 0.0 if self.d == self.n else math.sqrt(self.d) / self.k

    def as_dict(self) -> dict:
        return {
            "n": self.n, "d": self.d, "N": self.N, "L": self.L,
            "outputs_per_input": self.outputs_per_input, "run_length": self.run_length,
            "nodes": self.nodes, "k": self.k, "carry_nodes": self.carry_nodes,
            "space_filling_nodes": self.space_filling_nodes, "node_count": self.node_count,
        }


def _outputs_per_input(n: int, d: int) -> list[int]:
    base, extra = divmod(d, n)
    return [base + (1 if i < extra else 0) for i in range(n)]


def _wire(n: int, d_i: list[int], run: int, per_layer: int) -> tuple[Network, list[list[int]], int]:
    """Build the tent chains; every nontrivial stage is ``run`` layers of ``per_layer`` units."""
    stages = [di - 1 for di in d_i]
    depth = max(stages) * run
    if depth == 0:
        return linear_net(np.eye(n)), [], 0
    w = Wiring(n)
    xs = w.inputs
    done: list[list] = [[x] for x in xs]      # finished outputs per input, in order
    current = list(xs)                         # value fed to the next tent layer
    coef = tent_coefficients(per_layer)
    nodes = []
    carries = 0
    for layer in range(depth):
        stage = layer // run
        rows = []
        spans = []
        for i in range(n):
            if stage < stages[i]:
                start = len(rows)
                rows += [(current[i] * per_layer - j, "relu") for j in range(per_layer)]
                spans.append((i, start))
        cspans = []
        for i in range(n):
            for e in range(len(done[i])):
                cspans.append((i, e, len(rows)))
                rows.append((done[i][e], "relu"))   # outputs live in [0, 1]
        carries += len(cspans)
        units = w.layer(rows)
        nodes.append([per_layer if stage < stages[i] else 0 for i in range(n)])
        for i, e, pos in cspans:
            done[i][e] = units[pos]
        for i, start in spans:
            v = units[start] * coef[0]
            for j in range(1, per_layer):
                v = v + units[start + j] * coef[j]
            current[i] = v
            if (layer + 1) % run == 0:
                done[i].append(v)
    outputs = [e for i in range(n) for e in done[i]]
    return w.finish(outputs), nodes, carries


def space_filling_net(n: int, d: int, N: int, L: int) -> tuple[Network, SpaceFillingPlan]:
    """Generator from [0,1]^n to [0,1]^d made of chained tent maps.

    ``N`` is the node budget and ``L`` the number of hidden layers. ``d`` nodes
    per layer are reserved to carry finished outputs; the rest build tent maps.
    Output ``e`` (0-based) among those driven by input ``i`` is
    ``t_{k^e}(x_i)``; the coupling between input and output boxes of side
    ``1/k`` gives W(f#U, U) <= sqrt(d)/k.
    """
    for name, v in (("n", n), ("d", d), ("N", N), ("L", L)):
        if int(v) != v or v < 1:
            raise InputError(f"{name} must be a positive integer, got {v}")
    n, d, N, L = int(n), int(d), int(N), int(L)
    if d < n:
        raise InputError("output dimension must be at least the input dimension")
    if N <= d * L:
        raise InsufficientCarryError(f"N={N} leaves no space-filling nodes after {d * L} carry nodes")
    d_i = _outputs_per_input(n, d)
    stages = math.ceil((d - n) / n)
    run = L // stages if stages else 0
    per_output = (N - d * L) // d
    plan = SpaceFillingPlan(n, d, N, L, d_i, run)
    if stages == 0:
        net, _, _ = _wire(n, d_i, 1, 1)
        plan.node_count = net.node_count
        return net, plan
    if run == 0:
        raise InsufficientCarryError(f"L={L} hidden layers cannot hold {stages} tent stages")
    per_layer = max(1, per_output // run)
    while True:
        net, nodes, carries = _wire(n, d_i, run, per_layer)
        if net.node_count <= N or per_layer == 1:
            break
        per_layer -= 1
    plan.nodes = nodes
    plan.k = per_layer ** run
    plan.carry_nodes = carries
    plan.node_count = net.node_count
    return net, plan
