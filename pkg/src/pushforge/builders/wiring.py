"""Small layer-by-layer assembly helper used by the constructive builders.

Values flowing through a network under construction are :class:`Expr`
objects: affine combinations of the units of the layer currently being
built on. Each call to :meth:`Wiring.layer` or :meth:`Wiring.run` consumes
expressions of the current layer and returns expressions over the next one.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import InputError
from ..network import ActivationKind, AffineLayer, Flavor, Network


class Expr:
    """Affine combination ``coef . h + const`` of the current layer ``h``."""

    __slots__ = ("coef", "const", "stamp")

    def __init__(self, coef: np.ndarray, const: float, stamp: int):
        self.coef = coef
        self.const = float(const)
        self.stamp = stamp

    def _check(self, other: "Expr") -> None:
        if other.stamp != self.stamp:
            raise InputError("expressions belong to different layers")

    def __add__(self, other):
        if isinstance(other, Expr):
            self._check(other)
            return Expr(self.coef + other.coef, self.const + other.const, self.stamp)
        return Expr(self.coef, self.const + float(other), self.stamp)

    __radd__ = __add__

    def __neg__(self):
        return Expr(-self.coef, -self.const, self.stamp)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, c):
        c = float(c)
        return Expr(self.coef * c, self.const * c, self.stamp)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / float(c))


class Wiring:
    """Incremental network builder.

    >>> w = Wiring(1)
    >>> (x,) = w.inputs
    >>> (h,) = w.layer([(x, "relu")])
    >>> net = w.finish([h * 2.0])
    """

    def __init__(self, n_inputs: int):
        self.width = n_inputs
        self.stamp = 0
        self.layers: list[AffineLayer] = []
        eye = np.eye(n_inputs)
        self.inputs = [Expr(eye[i], 0.0, 0) for i in range(n_inputs)]

    def const(self, c: float) -> Expr:
        return Expr(np.zeros(self.width), c, self.stamp)

    def _units(self, n: int) -> list[Expr]:
        eye = np.eye(n)
        return [Expr(eye[i], 0.0, self.stamp) for i in range(n)]

    def _push(self, rows: Sequence[Expr], kinds: Sequence[str]) -> None:
        for e in rows:
            if e.stamp != self.stamp:
                raise InputError("expression is stale: it refers to an earlier layer")
        w = np.array([e.coef for e in rows]).reshape(len(rows), self.width)
        b = np.array([e.const for e in rows])
        self.layers.append(AffineLayer(w, b, list(kinds)))
        self.width = len(rows)
        self.stamp += 1

    def layer(self, units: Sequence[tuple[Expr, str]]) -> list[Expr]:
        """Add one hidden layer; each entry is ``(pre-activation, kind)``."""
        if not units:
            raise InputError("a hidden layer needs at least one unit")
        self._push([u[0] for u in units], [u[1] for u in units])
        return self._units(len(units))

    def run(self, blocks: Sequence[tuple[Network, Sequence[Expr]]],
            carries: Sequence[tuple[Expr, float | None]] = ()) -> tuple[list[list[Expr]], list[Expr]]:
        """Run sub-networks side by side while carrying extra values.

        ``blocks`` are ``(net, inputs)`` pairs; ``carries`` are ``(expr, lower)``
        pairs where ``lower`` is a known lower bound of the value (one ReLU per
        layer) or ``None`` (two ReLUs per layer). Returns the block outputs and
        the carried values over the resulting current layer.
        """
        depth = max([n.hidden_layers for n, _ in blocks] + [0])
        if depth == 0 and not blocks:
            return [], [e for e, _ in carries]
        # state per block: list of exprs feeding its next affine map
        state = [list(inp) for _, inp in blocks]
        for net, inp in blocks:
            if len(inp) != net.input_dim:
                raise InputError(f"block expects {net.input_dim} inputs, got {len(inp)}")
        cstate = [e for e, _ in carries]
        for level in range(depth):
            rows: list[Expr] = []
            kinds: list[str] = []
            spans = []
            for bi, (net, _) in enumerate(blocks):
                start = len(rows)
                if level < net.hidden_layers:
                    lay = net.layers[level]
                    for u in range(lay.n_out):
                        e = self.const(lay.bias[u])
                        for j, src in enumerate(state[bi]):
                            if lay.weights[u, j] != 0.0:
                                e = e + src * lay.weights[u, j]
                        rows.append(e)
                        kinds.append("step" if lay.step_mask[u] else "relu")
                    spans.append(("net", start, lay.n_out))
                else:
                    # block already finished its hidden layers: carry outputs as pairs
                    if level == net.hidden_layers:
                        state[bi] = self._apply_final(net, state[bi])
                    for e in state[bi]:
                        rows += [e, -e]
                        kinds += ["relu", "relu"]
                    spans.append(("pair", start, len(state[bi])))
            cspans = []
            for ci, (_, lower) in enumerate(carries):
                start = len(rows)
                if lower is None:
                    rows += [cstate[ci], -cstate[ci]]
                    kinds += ["relu", "relu"]
                else:
                    rows.append(cstate[ci] - lower)
                    kinds.append("relu")
                cspans.append(start)
            self._push(rows, kinds)
            units = self._units(len(rows))
            for bi, (kind, start, n) in enumerate(spans):
                if kind == "net":
                    state[bi] = units[start:start + n]
                else:
                    state[bi] = [units[start + 2 * j] - units[start + 2 * j + 1] for j in range(n)]
            for ci, (_, lower) in enumerate(carries):
                s = cspans[ci]
                cstate[ci] = units[s] - units[s + 1] if lower is None else units[s] + lower
        outs = []
        for bi, (net, _) in enumerate(blocks):
            if net.hidden_layers == depth:
                outs.append(self._apply_final(net, state[bi]))
            else:
                outs.append(state[bi])
        return outs, cstate

    def _apply_final(self, net: Network, src: list[Expr]) -> list[Expr]:
        lay = net.layers[-1]
        out = []
        for u in range(lay.n_out):
            e = self.const(lay.bias[u])
            for j, s in enumerate(src):
                if lay.weights[u, j] != 0.0:
                    e = e + s * lay.weights[u, j]
            out.append(e)
        return out

    def finish(self, outputs: Sequence[Expr]) -> Network:
        """Close the network with an identity layer producing ``outputs``."""
        self._push(list(outputs), [ActivationKind.IDENTITY.value] * len(outputs))
        has_step = any(layer.step_mask.any() for layer in self.layers)
        return Network(self.layers, Flavor.RELU_STEP if has_step else Flavor.RELU_ONLY)
