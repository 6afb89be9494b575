"""Best L1 fit of the standard normal CDF by continuous piecewise-linear functions."""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize
from scipy.special import ndtr

from .errors import InputError
from .transport.oracles import normal_pdf

_SAMPLES = 17


def _prim(x):
    """Antiderivative of Phi."""
    return x * ndtr(x) + normal_pdf(x)


def _cuts(t0, t1, v0, v1):
    """Sub-interval endpoints (k, S) per segment where ``Phi - line`` keeps one sign."""
    h = t1 - t0
    m = (v1 - v0) / h
    lam = np.linspace(0.0, 1.0, _SAMPLES)
    x = t0[:, None] + h[:, None] * lam
    g = ndtr(x) - (v0[:, None] + m[:, None] * (x - t0[:, None]))
    change = np.sign(g[:, :-1]) * np.sign(g[:, 1:]) < 0
    seg, col = np.nonzero(change)
    lo, hi = x[seg, col], x[seg, col + 1]
    glo = g[seg, col]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        gm = ndtr(mid) - (v0[seg] + m[seg] * (mid - t0[seg]))
        left = np.sign(gm) == np.sign(glo)
        lo = np.where(left, mid, lo)
        glo = np.where(left, gm, glo)
        hi = np.where(left, hi, mid)
    zs, zc = np.nonzero(g[:, 1:-1] == 0.0)
    roots = np.concatenate([0.5 * (lo + hi), x[zs, zc + 1]])
    seg = np.concatenate([seg, zs])
    k = len(t0)
    pts = np.concatenate([t0, t1, roots])
    owner = np.concatenate([np.arange(k), np.arange(k), seg])
    order = np.lexsort((pts, owner))
    return pts[order], owner[order], m


def segment_errors(t0, t1, v0, v1, grad: bool = False):
    """Exact ``int |Phi - line|`` per segment; optionally the partial derivatives.

    The line joins ``(t0, v0)`` and ``(t1, v1)``. With ``grad`` returns
    ``(err, d/dt0, d/dt1, d/dv0, d/dv1)``.
    """
    t0, t1, v0, v1 = (np.atleast_1d(np.asarray(a, dtype=np.float64)) for a in (t0, t1, v0, v1))
    pts, owner, m = _cuts(t0, t1, v0, v1)
    same = owner[1:] == owner[:-1]
    a, b, o = pts[:-1][same], pts[1:][same], owner[:-1][same]
    mid = 0.5 * (a + b)
    s = np.sign(ndtr(mid) - (v0[o] + m[o] * (mid - t0[o])))
    # int (Phi - v0 - m (x - t0)) over [a, b]
    lin = (v0[o] - m[o] * t0[o]) * (b - a) + 0.5 * m[o] * (b * b - a * a)
    err = np.bincount(o, s * (_prim(b) - _prim(a) - lin), minlength=len(t0))
    if not grad:
        return err
    h = t1 - t0
    # int s * lambda and int s * (1 - lambda), lambda = (x - t0) / h
    i1 = s * (b - a)
    ix = s * 0.5 * (b * b - a * a)
    S1 = np.bincount(o, i1, minlength=len(t0))
    Sx = np.bincount(o, ix, minlength=len(t0))
    s_lam = (Sx - t0 * S1) / h
    s_one = S1 - s_lam
    g0 = np.abs(ndtr(t0) - v0)
    g1 = np.abs(ndtr(t1) - v1)
    return err, -g0 + m * s_one, g1 + m * s_lam, -s_one, -s_lam


def pwl_l1_error(knots, values) -> float:
    """``int |Phi - f|`` over ``[knots[0], knots[-1]]`` for the interpolating PL ``f``."""
    t = np.asarray(knots, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if t.shape != v.shape or t.size < 2 or np.any(np.diff(t) <= 0):
        raise InputError("knots must be strictly increasing with one value each")
    return float(segment_errors(t[:-1], t[1:], v[:-1], v[1:]).sum())


def _dp_knots(pieces: int, a: float, b: float, grid: int) -> np.ndarray:
    """Knots minimising the sum of per-segment errors over grid points (segments fitted independently)."""
    g = np.linspace(a, b, grid)
    i, j = np.triu_indices(grid, 1)
    lo, hi = g[i], g[j]
    # a line through the quarter points is the best L1 line when Phi'' keeps its sign
    q0, q1 = lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo)
    f0, f1 = ndtr(q0), ndtr(q1)
    sl = (f1 - f0) / (q1 - q0)
    cost = np.full((grid, grid), np.inf)
    cost[i, j] = segment_errors(lo, hi, f0 + sl * (lo - q0), f0 + sl * (hi - q0))
    best = np.full((pieces + 1, grid), np.inf)
    arg = np.zeros((pieces + 1, grid), dtype=np.int64)
    best[0, 0] = 0.0
    for p in range(1, pieces + 1):
        tot = best[p - 1][:, None] + cost
        arg[p] = np.argmin(tot, axis=0)
        best[p] = tot[arg[p], np.arange(grid)]
    idx = [grid - 1]
    for p in range(pieces, 0, -1):
        idx.append(arg[p, idx[-1]])
    return g[np.array(idx[::-1])]


def _equidistributed_knots(pieces: int, a: float, b: float, skew: float = 0.0) -> np.ndarray:
    """Knots equidistributing ``|Phi''|^(1/3)``, the asymptotically optimal density for L1.

    ``skew`` tilts the density by ``exp(skew x)`` to give asymmetric starts.
    """
    x = np.linspace(a, b, 20001)
    dens = (np.abs(x * normal_pdf(x)) ** (1.0 / 3.0) + 1e-3) * np.exp(skew * x)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(x))])
    return np.interp(np.linspace(0.0, cum[-1], pieces + 1), cum, x)


def _refine(knots: np.ndarray, a: float, b: float) -> tuple[float, np.ndarray, np.ndarray]:
    """Jointly optimise knot positions (via softmax gaps) and values with L-BFGS."""
    n = len(knots) - 1
    width = b - a
    theta0 = np.log(np.diff(knots) / width)
    v_init = ndtr(knots)

    def unpack(z):
        th = z[:n] - z[:n].max()
        p = np.exp(th)
        p /= p.sum()
        t = a + width * np.concatenate([[0.0], np.cumsum(p)])
        t[-1] = b
        return p, t, z[n:]

    def fun(z):
        p, t, v = unpack(z)
        err, d0, d1, dv0, dv1 = segment_errors(t[:-1], t[1:], v[:-1], v[1:], grad=True)
        dt = np.zeros(n + 1)
        dt[:-1] += d0
        dt[1:] += d1
        dv = np.zeros(n + 1)
        dv[:-1] += dv0
        dv[1:] += dv1
        # t_k = a + width * sum_{i<k} p_i for interior k
        dh = np.cumsum(dt[1:-1][::-1])[::-1]
        dh = np.concatenate([dh, [0.0]]) * width
        dth = p * (dh - np.dot(p, dh))
        return float(err.sum()), np.concatenate([dth, dv])

    res = minimize(fun, np.concatenate([theta0, v_init]), jac=True, method="L-BFGS-B",
                   options={"maxiter": 3000, "ftol": 1e-15, "gtol": 1e-13})
    _, t, v = unpack(res.x)
    return pwl_l1_error(t, v), t, v


def pwl_phi_best_fit(pieces: int, interval=(-2.0, 2.0), grid: int = 161) -> tuple[float, np.ndarray, np.ndarray]:
    """Best found ``pieces``-piece continuous PL fit of Phi on ``interval``: (error, knots, values).

    Starts from a dynamic-programming knot choice on a uniform grid (when the
    grid has room) and from ``|Phi''|^(1/3)`` equidistributions, refines each
    by gradient descent on the exact L1 error, and keeps the best.
    """
    a, b = (float(v) for v in interval)
    if not a < b:
        raise InputError(f"interval must satisfy a < b, got {interval}")
    if int(pieces) != pieces or pieces < 1:
        raise InputError(f"number of pieces must be a positive integer, got {pieces}")
    pieces = int(pieces)
    starts = [_equidistributed_knots(pieces, a, b)]
    if pieces <= 16:
        # few pieces: the optimum need not be symmetric, so also start from tilted layouts
        starts += [_equidistributed_knots(pieces, a, b, s) for s in (-1.0, 1.0)]
    if 4 * pieces <= grid:
        starts.append(_dp_knots(pieces, a, b, grid))
    fits = [_refine(k, a, b) for k in starts]
    return min(fits, key=lambda f: f[0])


def pwl_phi_best_l1(pieces: int, interval=(-2.0, 2.0)) -> float:
    """Smallest L1 error found for a ``pieces``-piece continuous PL fit of Phi."""
    return pwl_phi_best_fit(pieces, interval)[0]


def fit_power_law(ns, errors) -> tuple[float, float]:
    """Least-squares ``log err = log C + slope log n``; returns (slope, C)."""
    x, y = np.log(np.asarray(ns, dtype=float)), np.log(np.asarray(errors, dtype=float))
    slope, icpt = np.polyfit(x, y, 1)
    return float(slope), float(np.exp(icpt))
