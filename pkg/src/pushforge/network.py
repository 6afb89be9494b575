"""Layered ReLU / ReLU-Step networks: representation, evaluation and combination.

A network is the composition ``A_L o act o A_{L-1} o ... o act o A_1`` where
every ``A_i`` is affine. Each hidden unit carries its own activation kind
(ReLU or Step) so that gates and carried values can share a layer; the final
layer is always the identity.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import FormatError, InputError, NumericError

FORMAT_VERSION = 1


class ActivationKind(str, enum.Enum):
    RELU = "relu"
    STEP = "step"
    IDENTITY = "identity"


class Flavor(str, enum.Enum):
    RELU_ONLY = "relu_only"
    RELU_STEP = "relu_step"


_CODES = {ActivationKind.RELU: 0, ActivationKind.STEP: 1, ActivationKind.IDENTITY: 2}
_KINDS = {v: k for k, v in _CODES.items()}


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


_CHUNK = 4096


@dataclass(frozen=True, eq=False)
class AffineLayer:
    """``x -> act(W x + b)`` with a per-unit activation kind."""

    weights: np.ndarray
    bias: np.ndarray
    kinds: np.ndarray  # int8 codes, one per output unit

    def __init__(self, weights, bias, activation=ActivationKind.RELU):
        w = _frozen(np.atleast_2d(weights))
        b = _frozen(np.atleast_1d(bias))
        if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
            raise InputError(f"weights {w.shape} and bias {b.shape} disagree")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise InputError("layer entries must be finite")
        if isinstance(activation, (str, ActivationKind)):
            codes = np.full(w.shape[0], _CODES[ActivationKind(activation)], dtype=np.int8)
        else:
            codes = np.array([_CODES[ActivationKind(a)] for a in activation], dtype=np.int8)
            if codes.shape[0] != w.shape[0]:
                raise InputError("one activation per output unit required")
        codes.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)
        object.__setattr__(self, "kinds", codes)

    @property
    def n_in(self) -> int:
        return self.weights.shape[1]

    @property
    def n_out(self) -> int:
        return self.weights.shape[0]

    @property
    def activation(self) -> ActivationKind | tuple[ActivationKind, ...]:
        """Single kind when the layer is uniform, otherwise a per-unit tuple."""
        if self.n_out and np.all(self.kinds == self.kinds[0]):
            return _KINDS[int(self.kinds[0])]
        return tuple(_KINDS[int(c)] for c in self.kinds)

    @property
    def is_identity(self) -> bool:
        return bool(np.all(self.kinds == _CODES[ActivationKind.IDENTITY]))

    @property
    def step_mask(self) -> np.ndarray:
        return self.kinds == _CODES[ActivationKind.STEP]

    @property
    def relu_mask(self) -> np.ndarray:
        return self.kinds == _CODES[ActivationKind.RELU]

    def apply(self, h: np.ndarray) -> np.ndarray:
        z = h @ self.weights.T
        z += self.bias
        relu = self.relu_mask
        if relu.all():
            return np.maximum(z, 0.0, out=z)
        if self.is_identity:
            return z
        out = z.copy()
        out[..., relu] = np.maximum(z[..., relu], 0.0)
        steps = self.step_mask
        out[..., steps] = (z[..., steps] > 0).astype(np.float64)
        return out


class Network:
    """Immutable feedforward network of :class:`AffineLayer` objects."""

    __slots__ = ("layers", "flavor")

    def __init__(self, layers: Sequence[AffineLayer], flavor: Flavor | str | None = None):
        layers = tuple(layers)
        if not layers:
            raise InputError("a network needs at least one affine map")
        for i, (a, b) in enumerate(zip(layers, layers[1:])):
            if a.n_out != b.n_in:
                raise InputError(f"layer {i} outputs {a.n_out} values but layer {i + 1} takes {b.n_in}")
        for layer in layers[:-1]:
            if np.any(layer.kinds == _CODES[ActivationKind.IDENTITY]):
                raise InputError("identity activation is only allowed on the final layer")
        if not layers[-1].is_identity:
            raise InputError("the final layer must use the identity activation")
        has_step = any(layer.step_mask.any() for layer in layers)
        if flavor is None:
            flavor = Flavor.RELU_STEP if has_step else Flavor.RELU_ONLY
        flavor = Flavor(flavor)
        if has_step and flavor is Flavor.RELU_ONLY:
            raise InputError("step units require the relu_step flavor")
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "flavor", flavor)

    def __setattr__(self, name, value):
        raise AttributeError("Network is immutable")

    def __repr__(self) -> str:
        widths = [self.input_dim] + [layer.n_out for layer in self.layers]
        return f"Network({'-'.join(map(str, widths))}, {self.flavor.value})"

    @property
    def input_dim(self) -> int:
        return self.layers[0].n_in

    @property
    def output_dim(self) -> int:
        return self.layers[-1].n_out

    @property
    def num_layers(self) -> int:
        """Number of affine maps (L)."""
        return len(self.layers)

    @property
    def hidden_layers(self) -> int:
        return len(self.layers) - 1

    @property
    def widths(self) -> list[int]:
        return [self.input_dim] + [layer.n_out for layer in self.layers]

    @property
    def node_count(self) -> int:
        """Total nodes N, input and output layers included."""
        return int(sum(self.widths))

    @property
    def hidden_units(self) -> int:
        return int(sum(layer.n_out for layer in self.layers[:-1]))

    @property
    def step_units(self) -> int:
        return int(sum(layer.step_mask.sum() for layer in self.layers))

    def __call__(self, x) -> np.ndarray:
        return evaluate(self, x)


def evaluate(net: Network, x) -> np.ndarray:
    """Evaluate ``net`` at a point ``(n0,)`` or a batch ``(m, n0)``."""
    h = np.asarray(x, dtype=np.float64)
    if h.ndim == 0:
        h = h.reshape(1)
    if h.shape[-1] != net.input_dim:
        raise InputError(f"expected input dimension {net.input_dim}, got {h.shape[-1]}")
    if h.ndim == 2 and h.shape[0] > _CHUNK:
        # row blocks keep the per-layer working set in cache for deep nets
        h = np.concatenate([evaluate_rows(net, h[i:i + _CHUNK]) for i in range(0, h.shape[0], _CHUNK)])
    else:
        h = evaluate_rows(net, h)
    if not np.all(np.isfinite(h)):
        raise NumericError("network produced a non-finite value")
    return h


def evaluate_rows(net: Network, h: np.ndarray) -> np.ndarray:
    for layer in net.layers:
        h = layer.apply(h)
    return h


def linear_net(weights, bias=None) -> Network:
    """Single affine map with no nonlinearity."""
    w = np.atleast_2d(np.asarray(weights, dtype=np.float64))
    b = np.zeros(w.shape[0]) if bias is None else bias
    return Network([AffineLayer(w, b, ActivationKind.IDENTITY)])


def identity_net(dim: int, hidden: int, lower=None) -> Network:
    """Identity map on R^dim routed through ``hidden`` ReLU layers.

    With ``lower`` (per-coordinate lower bounds) each coordinate costs one unit
    per layer, ``relu(x - lower) + lower``, exact for ``x >= lower``. Without it
    each coordinate uses the pair ``relu(x), relu(-x)``, exact everywhere.
    """
    eye = np.eye(dim)
    if hidden == 0:
        return linear_net(eye)
    if lower is not None:
        lo = np.broadcast_to(np.asarray(lower, dtype=np.float64), (dim,))
        layers = [AffineLayer(eye, -lo)]
        layers += [AffineLayer(eye, np.zeros(dim)) for _ in range(hidden - 1)]
        layers.append(AffineLayer(eye, lo, ActivationKind.IDENTITY))
        return Network(layers)
    split = np.vstack([eye, -eye])
    layers = [AffineLayer(split, np.zeros(2 * dim))]
    layers += [AffineLayer(split @ np.hstack([eye, -eye]), np.zeros(2 * dim)) for _ in range(hidden - 1)]
    layers.append(AffineLayer(np.hstack([eye, -eye]), np.zeros(dim), ActivationKind.IDENTITY))
    return Network(layers)


def _merge(first: AffineLayer, second: AffineLayer) -> AffineLayer:
    # first is an identity layer; fold it into second
    w = second.weights @ first.weights
    b = second.weights @ first.bias + second.bias
    return AffineLayer(w, b, [_KINDS[int(c)] for c in second.kinds])


def compose(outer: Network, inner: Network) -> Network:
    """``outer o inner``; the affine maps meeting at the seam are merged."""
    if inner.output_dim != outer.input_dim:
        raise InputError(f"inner outputs {inner.output_dim} values, outer expects {outer.input_dim}")
    seam = _merge(inner.layers[-1], outer.layers[0])
    layers = inner.layers[:-1] + (seam,) + outer.layers[1:]
    flavor = Flavor.RELU_STEP if Flavor.RELU_STEP in (inner.flavor, outer.flavor) else Flavor.RELU_ONLY
    return Network(layers, flavor)


def _block_diag(mats: Iterable[np.ndarray]) -> np.ndarray:
    mats = list(mats)
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    out = np.zeros((rows, cols))
    r = c = 0
    for m in mats:
        out[r:r + m.shape[0], c:c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out


def pad_depth(net: Network, hidden: int, lower=None) -> Network:
    """Append identity carries so ``net`` has exactly ``hidden`` hidden layers."""
    extra = hidden - net.hidden_layers
    if extra < 0:
        raise InputError("cannot reduce depth")
    if extra == 0:
        return net
    return compose(identity_net(net.output_dim, extra, lower), net)


def parallel(nets: Sequence[Network], lowers: Sequence | None = None) -> Network:
    """Block-diagonal stacking: input and output vectors are concatenations.

    Nets shallower than the deepest one are padded with identity carries;
    ``lowers[i]`` (optional) is a lower bound on net ``i``'s outputs allowing
    single-unit carries.
    """
    nets = list(nets)
    if not nets:
        raise InputError("parallel() needs at least one network")
    if len(nets) == 1:
        return nets[0]
    depth = max(n.hidden_layers for n in nets)
    lowers = list(lowers) if lowers is not None else [None] * len(nets)
    padded = [pad_depth(n, depth, lo) for n, lo in zip(nets, lowers)]
    layers = []
    for i in range(depth + 1):
        parts = [n.layers[i] for n in padded]
        w = _block_diag(p.weights for p in parts)
        b = np.concatenate([p.bias for p in parts])
        kinds = [_KINDS[int(c)] for p in parts for c in p.kinds]
        layers.append(AffineLayer(w, b, kinds))
    flavor = Flavor.RELU_STEP if any(n.flavor is Flavor.RELU_STEP for n in nets) else Flavor.RELU_ONLY
    return Network(layers, flavor)


def replace_steps(net: Network, delta: float) -> Network:
    """Swap every Step unit for a ReLU pair computing the ramp ``s_delta``.

    ``s_delta(z) = relu(z/delta) - relu(z/delta - 1)``: 0 for ``z <= 0``,
    ``z/delta`` on ``[0, delta]``, 1 above. Two ReLU units replace each step.
    """
    if not delta > 0:
        raise InputError("delta must be positive")
    if net.step_units == 0:
        return net
    layers = list(net.layers)
    out: list[AffineLayer] = []
    carry_cols: np.ndarray | None = None  # column map for the following layer
    for idx, layer in enumerate(layers):
        w, b = layer.weights, layer.bias
        if carry_cols is not None:
            w = w @ carry_cols
        steps = layer.step_mask
        if idx == len(layers) - 1 or not steps.any():
            kinds = [_KINDS[int(c)] for c in layer.kinds]
            out.append(AffineLayer(w, b, kinds))
            carry_cols = None
            continue
        rows_w, rows_b = [], []
        n_new = int(layer.n_out + steps.sum())
        mapping = np.zeros((n_new, layer.n_out))
        j = 0
        for u in range(layer.n_out):
            if steps[u]:
                rows_w += [w[u] / delta, w[u] / delta]
                rows_b += [b[u] / delta, b[u] / delta - 1.0]
                mapping[j, u] = 1.0
                mapping[j + 1, u] = -1.0
                j += 2
            else:
                rows_w.append(w[u])
                rows_b.append(b[u])
                mapping[j, u] = 1.0
                j += 1
        out.append(AffineLayer(np.array(rows_w), np.array(rows_b), ActivationKind.RELU))
        # old unit u equals sum_j mapping[j, u] * new_j
        carry_cols = mapping.T
    return Network(out, Flavor.RELU_ONLY)


# ---------------------------------------------------------------- serialization


def to_dict(net: Network) -> dict:
    layers = []
    for layer in net.layers:
        act = layer.activation
        layers.append({
            "rows": layer.n_out,
            "cols": layer.n_in,
            "weights": layer.weights.ravel().tolist(),
            "bias": layer.bias.tolist(),
            "activation": act.value if isinstance(act, ActivationKind) else [a.value for a in act],
        })
    return {"version": FORMAT_VERSION, "flavor": net.flavor.value, "layers": layers}


def from_dict(doc: dict) -> Network:
    if doc.get("version") != FORMAT_VERSION:
        raise FormatError(f"unsupported network format version {doc.get('version')!r}")
    try:
        layers = []
        for entry in doc["layers"]:
            w = np.asarray(entry["weights"], dtype=np.float64).reshape(entry["rows"], entry["cols"])
            layers.append(AffineLayer(w, entry["bias"], entry["activation"]))
        return Network(layers, doc["flavor"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise FormatError(f"malformed network document: {exc}") from exc


def dumps(net: Network, **extra) -> str:
    doc = to_dict(net)
    doc.update(extra)
    return json.dumps(doc, indent=1)


def loads(text: str) -> Network:
    return from_dict(json.loads(text))


def save(net: Network, path, **extra) -> None:
    Path(path).write_text(dumps(net, **extra))


def load(path) -> Network:
    return loads(Path(path).read_text())
