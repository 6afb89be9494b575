"""Enumeration of the linear regions of a network over a box.

Three routes are provided. Scalar-input networks use an exact interval sweep
(:func:`affine_pieces_1d`), two-input networks use convex polygon clipping,
and the general route refines polyhedra with linear programs. Points on a
unit's switching hyperplane are treated as inactive; pieces of zero measure
are dropped.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import InputError, RegionBudgetError
from .network import Network

DEFAULT_BUDGET = 2_000_000
_CHUNK = 20_000


def region_budget(budget: int | None = None) -> int:
    """Work budget: explicit value, else ``PUSHFORGE_BUDGET``, else the default."""
    if budget is not None:
        return int(budget)
    env = os.environ.get("PUSHFORGE_BUDGET")
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise InputError(f"PUSHFORGE_BUDGET must be an integer, got {env!r}") from exc
    return DEFAULT_BUDGET


# ------------------------------------------------------------------ 1-D sweep


@dataclass(frozen=True)
class PiecewiseAffine1D:
    """``f(x) = slopes[j] * x + intercepts[j]`` on ``[xs[j], xs[j+1]]``."""

    xs: np.ndarray          # (k + 1,)
    slopes: np.ndarray      # (k, m)
    intercepts: np.ndarray  # (k, m)

    @property
    def num_pieces(self) -> int:
        return len(self.xs) - 1

    @property
    def breakpoints(self) -> np.ndarray:
        """Interior points where the affine formula changes."""
        return self.xs[1:-1]

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        j = np.clip(np.searchsorted(self.xs, x, side="right") - 1, 0, self.num_pieces - 1)
        return self.slopes[j] * x[..., None] + self.intercepts[j]

    def values_at_knots(self) -> tuple[np.ndarray, np.ndarray]:
        """Left and right end values of every piece, each ``(k, m)``."""
        left = self.slopes * self.xs[:-1, None] + self.intercepts
        right = self.slopes * self.xs[1:, None] + self.intercepts
        return left, right


def _same_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    scale = 1.0 + np.maximum(np.abs(a), np.abs(b))
    return np.all(np.abs(a - b) <= 1e-12 * scale, axis=1)


def _merge_equal(xs, S, C):
    if len(S) < 2:
        return xs, S, C
    eq = _same_rows(S[:-1], S[1:]) & _same_rows(C[:-1], C[1:])
    if not eq.any():
        return xs, S, C
    keep_piece = np.concatenate([[True], ~eq])
    keep_x = np.concatenate([keep_piece, [True]])
    return xs[keep_x], S[keep_piece], C[keep_piece]


def _split_layer(xs, S, C, layer):
    """Refine intervals at the switching points of ``layer`` and apply it."""
    w, b = layer.weights, layer.bias
    Sz = S @ w.T
    Cz = C @ w.T + b
    lo = xs[:-1, None]
    hi = xs[1:, None]
    tol = 1e-15 * np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))
    with np.errstate(divide="ignore", invalid="ignore"):
        r = -Cz / Sz
    valid = (Sz != 0) & (r > lo + tol) & (r < hi - tol)
    counts = valid.sum(axis=1)
    k = len(S)
    if counts.any():
        rs = np.sort(np.where(valid, r, np.inf), axis=1)
        maxc = int(counts.max())
        table = np.concatenate([xs[:-1, None], rs[:, :maxc]], axis=1)
        mask = np.arange(maxc + 1)[None, :] <= counts[:, None]
        left = table[mask]
        rep = np.repeat(np.arange(k), counts + 1)
        new_xs = np.append(left, xs[-1])
        keep = np.diff(new_xs) > 0
        left, rep = left[keep], rep[keep]
        new_xs = np.append(left, xs[-1])
    else:
        new_xs, rep = xs, np.arange(k)
    mid = 0.5 * (new_xs[:-1] + new_xs[1:])
    Sz, Cz = Sz[rep], Cz[rep]
    active = (Sz * mid[:, None] + Cz) > 0
    steps = layer.step_mask
    S_new = np.where(active, Sz, 0.0)
    C_new = np.where(active, Cz, 0.0)
    if steps.any():
        S_new[:, steps] = 0.0
        C_new[:, steps] = active[:, steps].astype(np.float64)
    return _merge_equal(new_xs, S_new, C_new)


def _sweep(xs, S, C, layers, start, budget):
    for li in range(start, len(layers) - 1):
        if len(S) > _CHUNK:
            h = len(S) // 2
            a = _sweep(xs[:h + 1], S[:h], C[:h], layers, li, budget)
            b = _sweep(xs[h:], S[h:], C[h:], layers, li, budget)
            return (np.concatenate([a[0][:-1], b[0]]),
                    np.concatenate([a[1], b[1]]), np.concatenate([a[2], b[2]]))
        xs, S, C = _split_layer(xs, S, C, layers[li])
        if len(S) > budget:
            raise RegionBudgetError(f"more than {budget} pieces after layer {li + 1}")
    last = layers[-1]
    return xs, S @ last.weights.T, C @ last.weights.T + last.bias


def affine_pieces_1d(net: Network, a: float, b: float, *, merge: bool = True,
                     budget: int | None = None) -> PiecewiseAffine1D:
    """Exact piecewise-affine form of a scalar-input network on ``[a, b]``.

    With ``merge`` adjacent pieces carrying the same affine formula are
    joined, so breakpoints are exactly the points where the function bends.
    """
    if net.input_dim != 1:
        raise InputError("affine_pieces_1d needs a scalar-input network")
    if not (np.isfinite(a) and np.isfinite(b) and a < b):
        raise InputError(f"bad interval [{a}, {b}]")
    budget = region_budget(budget)
    xs = np.array([a, b], dtype=np.float64)
    S = np.ones((1, 1))
    C = np.zeros((1, 1))
    xs, S, C = _sweep(xs, S, C, list(net.layers), 0, budget)
    if merge:
        xs, S, C = _merge_equal(xs, S, C)
    return PiecewiseAffine1D(xs, S, C)


def breakpoints_1d(net: Network, a: float, b: float) -> np.ndarray:
    """Knots of the affine-piece partition of ``[a, b]``, endpoints included."""
    return affine_pieces_1d(net, a, b).xs.copy()


# ------------------------------------------------------------ polyhedral regions


@dataclass
class PolyhedralRegion:
    """Convex region ``{x : A x <= b}`` on which the network is affine.

    ``map_matrix @ x + map_offset`` is the network output on the region and
    ``pattern`` lists, per hidden layer, which units are active.
    """

    A: np.ndarray
    b: np.ndarray
    map_matrix: np.ndarray
    map_offset: np.ndarray
    pattern: tuple[tuple[bool, ...], ...]
    witness: np.ndarray
    measure: float = float("nan")
    vertices: np.ndarray | None = field(default=None, repr=False)

    def contains(self, x, tol: float = 1e-9) -> bool:
        return bool(np.all(self.A @ np.asarray(x) <= self.b + tol))


def _box_constraints(lo, hi):
    d = len(lo)
    A = np.vstack([np.eye(d), -np.eye(d)])
    b = np.concatenate([hi, -lo])
    return A, b


def _apply_pattern(S, C, zS, zC, active, layer):
    S_new = np.where(active[None, :], zS, 0.0)
    C_new = np.where(active, zC, 0.0)
    steps = layer.step_mask
    if steps.any():
        S_new[:, steps] = 0.0
        C_new[steps] = active[steps].astype(np.float64)
    return S_new, C_new


def _polygon_area(v):
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _clip(v, g, c, tol):
    """Split convex polygon ``v`` by the line ``g . x + c = 0``."""
    s = v @ g + c
    scale = tol * (1.0 + np.abs(c) + np.abs(v) @ np.abs(g))
    if np.all(s <= scale) or np.all(s >= -scale):
        return None
    pos, neg = [], []
    n = len(v)
    for i in range(n):
        p, q = v[i], v[(i + 1) % n]
        sp, sq = s[i], s[(i + 1) % n]
        if sp >= 0:
            pos.append(p)
        if sp <= 0:
            neg.append(p)
        if (sp > 0 > sq) or (sp < 0 < sq):
            t = sp / (sp - sq)
            m = p + t * (q - p)
            pos.append(m)
            neg.append(m)
    return np.array(pos), np.array(neg)


def _regions_2d(net, lo, hi, budget, tol=1e-12):
    v0 = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]], float)
    min_area = 1e-18 * float(np.prod(hi - lo))
    cells = [(v0, np.eye(2), np.zeros(2), ())]
    for li, layer in enumerate(net.layers[:-1]):
        out = []
        for v, S, C, pat in cells:
            zS = S @ layer.weights.T
            zC = C @ layer.weights.T + layer.bias
            pieces = [v]
            for u in range(layer.n_out):
                nxt = []
                for p in pieces:
                    cut = _clip(p, zS[:, u], zC[u], tol)
                    if cut is None:
                        nxt.append(p)
                    else:
                        nxt += [q for q in cut if len(q) >= 3 and _polygon_area(q) > min_area]
                pieces = nxt
            for p in pieces:
                centre = p.mean(axis=0)
                active = centre @ zS + zC > 0
                S2, C2 = _apply_pattern(S, C, zS, zC, active, layer)
                out.append((p, S2, C2, pat + (tuple(bool(a) for a in active),)))
            if len(out) > budget:
                raise RegionBudgetError(f"more than {budget} regions after layer {li + 1}")
        cells = out
    last = net.layers[-1]
    regions = []
    for v, S, C, pat in cells:
        M = (S @ last.weights.T).T
        off = C @ last.weights.T + last.bias
        edges = np.roll(v, -1, axis=0) - v
        normals = np.stack([edges[:, 1], -edges[:, 0]], axis=1)
        centre = v.mean(axis=0)
        # orient normals outward
        sign = np.sign(np.einsum("ij,ij->i", normals, v - centre))
        sign[sign == 0] = 1.0
        normals = normals * sign[:, None]
        A = normals
        b = np.einsum("ij,ij->i", normals, v)
        regions.append(PolyhedralRegion(A, b, M, off, pat, centre, _polygon_area(v), v))
    return regions


def _chebyshev(A, b):
    norms = np.linalg.norm(A, axis=1)
    d = A.shape[1]
    res = linprog(np.r_[np.zeros(d), -1.0], A_ub=np.hstack([A, norms[:, None]]), b_ub=b,
                  bounds=[(None, None)] * d + [(0, None)], method="highs")
    if res.status != 0:
        return None, 0.0
    return res.x[:d], float(res.x[d])


def _regions_lp(net, lo, hi, budget, min_radius=1e-9):
    A0, b0 = _box_constraints(lo, hi)
    d = len(lo)
    centre0 = 0.5 * (lo + hi)
    cells = [(A0, b0, centre0, np.eye(d), np.zeros(d), ())]
    for li, layer in enumerate(net.layers[:-1]):
        for u in range(layer.n_out):
            nxt = []
            for A, b, centre, S, C, pat in cells:
                g = S @ layer.weights[u]
                c = C @ layer.weights[u] + layer.bias[u]
                val = centre @ g + c
                gn = np.linalg.norm(g)
                if gn == 0.0:
                    nxt.append((A, b, centre, S, C, pat))
                    continue
                # centre side is non-empty; probe the other side
                if val > 0:
                    A2, b2 = np.vstack([A, g]), np.r_[b, -c]
                    A1, b1 = np.vstack([A, -g]), np.r_[b, c]
                else:
                    A1, b1 = np.vstack([A, g]), np.r_[b, -c]
                    A2, b2 = np.vstack([A, -g]), np.r_[b, c]
                c2, r2 = _chebyshev(A2, b2)
                if c2 is None or r2 <= min_radius:
                    nxt.append((A, b, centre, S, C, pat))
                    continue
                c1, r1 = _chebyshev(A1, b1)
                nxt.append((A1, b1, c1, S, C, pat))
                nxt.append((A2, b2, c2, S, C, pat))
            cells = nxt
            if len(cells) > budget:
                raise RegionBudgetError(f"more than {budget} regions in layer {li + 1}")
        out = []
        for A, b, centre, S, C, pat in cells:
            zS = S @ layer.weights.T
            zC = C @ layer.weights.T + layer.bias
            active = centre @ zS + zC > 0
            S2, C2 = _apply_pattern(S, C, zS, zC, active, layer)
            out.append((A, b, centre, S2, C2, pat + (tuple(bool(a) for a in active),)))
        cells = out
    last = net.layers[-1]
    regions = []
    for A, b, centre, S, C, pat in cells:
        M = (S @ last.weights.T).T
        off = C @ last.weights.T + last.bias
        regions.append(PolyhedralRegion(A, b, M, off, pat, centre))
    return regions


def _regions_1d(net, lo, hi, budget):
    pieces = affine_pieces_1d(net, float(lo[0]), float(hi[0]), merge=False, budget=budget)
    regions = []
    for j in range(pieces.num_pieces):
        a, b = pieces.xs[j], pieces.xs[j + 1]
        mid = 0.5 * (a + b)
        h = np.array([mid])
        pat = []
        for layer in net.layers[:-1]:
            z = layer.weights @ h + layer.bias
            pat.append(tuple(bool(t) for t in z > 0))
            h = layer.apply(h)
        regions.append(PolyhedralRegion(np.array([[1.0], [-1.0]]), np.array([b, -a]),
                                        pieces.slopes[j][:, None], pieces.intercepts[j],
                                        tuple(pat), np.array([mid]), b - a))
    return regions


def _sort_key(r: PolyhedralRegion):
    return tuple(np.round(r.witness, 12))


def enumerate_regions(net: Network, lo, hi, *, method: str = "auto",
                      budget: int | None = None) -> list[PolyhedralRegion]:
    """Linear regions of ``net`` restricted to the box ``[lo, hi]``.

    ``method`` is ``"auto"`` (interval sweep for one input, polygon clipping
    for two, LP refinement otherwise), ``"lp"`` or ``"polygon"``.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=np.float64))
    hi = np.atleast_1d(np.asarray(hi, dtype=np.float64))
    d = net.input_dim
    if lo.shape != (d,) or hi.shape != (d,):
        raise InputError(f"box bounds must have length {d}")
    if not np.all(lo < hi):
        raise InputError("box must have positive volume")
    budget = region_budget(budget)
    if method == "auto":
        method = {1: "interval", 2: "polygon"}.get(d, "lp")
    if method == "interval":
        if d != 1:
            raise InputError("interval method needs one input")
        regions = _regions_1d(net, lo, hi, budget)
    elif method == "polygon":
        if d != 2:
            raise InputError("polygon method needs two inputs")
        regions = _regions_2d(net, lo, hi, budget)
    elif method == "lp":
        regions = _regions_lp(net, lo, hi, budget)
    else:
        raise InputError(f"unknown method {method!r}")
    return sorted(regions, key=_sort_key)
