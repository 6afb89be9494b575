"""Direct verification helpers: box coupling of space-filling nets and grid sup errors."""

from __future__ import annotations

import numpy as np

from ..errors import InputError
from ..network import Network


def box_coupling_check(net: Network, plan, grid_per_box: int = 5, chunk: int = 200_000) -> bool:
    """Check that every input box lands in a single output box, injectively.

    Input ``i`` is cut into ``k^{d_i}`` intervals; each output coordinate into
    ``k`` intervals. ``grid_per_box`` interior points are tested per input box.
    """
    if net.input_dim != plan.n or net.output_dim != plan.d:
        raise InputError("plan does not match the network dimensions")
    if grid_per_box < 1:
        raise InputError("grid_per_box must be positive")
    k = int(plan.k)
    d_i = list(plan.outputs_per_input)
    counts = [k ** di for di in d_i]
    total = int(np.prod([float(c) for c in counts]))
    if total > 50_000_000:
        raise InputError(f"{total} input boxes is too many to enumerate")
    offsets = (np.arange(grid_per_box) + 0.5) / grid_per_box
    seen = np.empty(total, dtype=np.int64)
    strides = k ** np.arange(plan.d - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, max(1, chunk // grid_per_box)):
        ids = np.arange(start, min(total, start + max(1, chunk // grid_per_box)), dtype=np.int64)
        # mixed-radix decode of the box id into per-input interval indices
        rem = ids.copy()
        idx = []
        for c in reversed(counts):
            idx.append(rem % c)
            rem //= c
        idx = idx[::-1]
        pts = np.stack([(idx[i][:, None] + offsets[None, :]) / counts[i] for i in range(plan.n)], axis=-1)
        out = net(pts.reshape(-1, plan.n)).reshape(len(ids), grid_per_box, plan.d)
        cells = np.clip(np.floor(out * k), 0, k - 1).astype(np.int64)
        if np.any(cells != cells[:, :1, :]):
            return False
        seen[ids] = cells[:, 0, :] @ strides
    return len(np.unique(seen)) == total


def sup_error(net: Network, oracle, grid) -> tuple[float, np.ndarray]:
    """Largest absolute deviation of ``net`` from ``oracle`` over ``grid``.

    Returns the error and the first grid point attaining it.
    """
    g = np.asarray(grid, dtype=np.float64)
    if g.size == 0:
        raise InputError("grid is empty")
    if g.ndim == 1:
        g = g[:, None]
    got = net(g)
    ref = np.asarray(oracle(g), dtype=np.float64).reshape(got.shape)
    err = np.max(np.abs(got - ref), axis=1)
    j = int(np.argmax(err))
    return float(err[j]), g[j]
