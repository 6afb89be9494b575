"""Piecewise-linear distribution functions and exact 1-D Wasserstein distances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from ..network import Network
from ..regions import PiecewiseAffine1D, affine_pieces_1d
from .oracles import normal_cdf_ref, normal_pdf


@dataclass(frozen=True)
class PiecewiseLinearCdf:
    """CDF that is 0 left of ``xs[0]``, 1 from ``xs[-1]`` on, linear in between.

    A jump at ``c`` appears as two equal breakpoints ``c, c`` carrying the
    left limit and the value at ``c``.
    """

    xs: np.ndarray
    vs: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.float64)
        vs = np.asarray(self.vs, dtype=np.float64)
        if xs.ndim != 1 or xs.shape != vs.shape or len(xs) == 0:
            raise InputError("breakpoints and values must be equal-length 1-D arrays")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(vs))):
            raise InputError("CDF entries must be finite")
        if np.any(np.diff(xs) < 0):
            raise InputError("breakpoints must be sorted")
        if np.any(np.diff(vs) < -1e-12) or vs[0] < -1e-12 or abs(vs[-1] - 1.0) > 1e-9:
            raise InputError("values must rise from >= 0 to 1")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "vs", np.clip(vs, 0.0, 1.0))

    def __call__(self, y):
        return self._eval(np.asarray(y, dtype=np.float64), "right")

    def left_limit(self, y):
        return self._eval(np.asarray(y, dtype=np.float64), "left")

    def _eval(self, y, side):
        xs, vs = self.xs, self.vs
        i = np.searchsorted(xs, y, side=side) - 1
        n = len(xs)
        inside = (i >= 0) & (i < n - 1)
        j = np.clip(i, 0, n - 2) if n > 1 else np.zeros_like(i)
        if n == 1:
            return np.where(i >= 0, 1.0, 0.0) if side == "right" else np.where(y > xs[0], 1.0, 0.0)
        x0, x1 = xs[j], xs[j + 1]
        v0, v1 = vs[j], vs[j + 1]
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.where(x1 > x0, (y - x0) / (x1 - x0), 1.0)
        mid = v0 + np.clip(t, 0.0, 1.0) * (v1 - v0)
        out = np.where(inside, mid, np.where(i < 0, 0.0, 1.0))
        if side == "left":
            # at y == xs[0] the left limit is 0 regardless
            out = np.where(y <= xs[0], 0.0, out)
        return out

    @property
    def support(self) -> tuple[float, float]:
        return float(self.xs[0]), float(self.xs[-1])

    def mean(self) -> float:
        """Mean of the distribution: jumps and linear segments in closed form."""
        dv = np.diff(self.vs)
        mids = 0.5 * (self.xs[:-1] + self.xs[1:])
        return float(np.sum(dv * mids) + self.vs[0] * self.xs[0])

    def to_rows(self) -> list[tuple[float, float]]:
        return list(zip(self.xs.tolist(), self.vs.tolist()))


def uniform_cdf(lo: float = 0.0, hi: float = 1.0) -> PiecewiseLinearCdf:
    return PiecewiseLinearCdf(np.array([lo, hi]), np.array([0.0, 1.0]))


def point_mass_cdf(c: float) -> PiecewiseLinearCdf:
    return PiecewiseLinearCdf(np.array([c, c]), np.array([0.0, 1.0]))


def mixture_cdf(atoms, atom_mass, lows, highs, masses) -> PiecewiseLinearCdf:
    """CDF of point masses plus uniform pieces on ``[lows[j], highs[j]]``."""
    atoms = np.asarray(atoms, dtype=np.float64)
    atom_mass = np.asarray(atom_mass, dtype=np.float64)
    lows = np.asarray(lows, dtype=np.float64)
    highs = np.asarray(highs, dtype=np.float64)
    masses = np.asarray(masses, dtype=np.float64)
    total = atom_mass.sum() + masses.sum()
    if total <= 0:
        raise InputError("mixture has no mass")
    knots = np.unique(np.concatenate([atoms, lows, highs]))
    dens = masses / (highs - lows)
    slope_change = np.zeros(len(knots))
    np.add.at(slope_change, np.searchsorted(knots, lows), dens)
    np.add.at(slope_change, np.searchsorted(knots, highs), -dens)
    jump = np.zeros(len(knots))
    np.add.at(jump, np.searchsorted(knots, atoms), atom_mass)
    slope = np.cumsum(slope_change)          # slope on [knots[i], knots[i+1]]
    rise = slope[:-1] * np.diff(knots)
    left = np.cumsum(np.concatenate([[0.0], rise])) + np.concatenate([[0.0], np.cumsum(jump)[:-1]])
    right = left + jump
    left /= total
    right /= total
    has_jump = jump > 0
    xs = np.repeat(knots, np.where(has_jump, 2, 1))
    vs = np.empty(len(xs))
    pos = np.cumsum(np.where(has_jump, 2, 1)) - 1
    vs[pos] = right
    vs[pos[has_jump] - 1] = left[has_jump]
    vs = np.maximum.accumulate(np.clip(vs, 0.0, None))
    vs[-1] = 1.0
    return PiecewiseLinearCdf(xs, vs)


def cdf_from_pieces(pieces: PiecewiseAffine1D, flat_tol: float = 0.0) -> PiecewiseLinearCdf:
    """Pushforward of the uniform law on ``[xs[0], xs[-1]]`` through scalar pieces.

    A piece with slope ``s`` over an interval of mass ``m`` contributes a
    uniform law of mass ``m`` on its image, or a point mass when ``s = 0``.
    """
    if pieces.slopes.shape[1] != 1:
        raise InputError("pushforward CDF needs a scalar output")
    xs = pieces.xs
    mass = np.diff(xs) / (xs[-1] - xs[0])
    s = pieces.slopes[:, 0]
    c = pieces.intercepts[:, 0]
    y0 = s * xs[:-1] + c
    y1 = s * xs[1:] + c
    lo, hi = np.minimum(y0, y1), np.maximum(y0, y1)
    flat = (hi - lo) <= flat_tol * np.maximum(1.0, np.abs(lo))
    atoms = 0.5 * (lo[flat] + hi[flat])
    return mixture_cdf(atoms, mass[flat], lo[~flat], hi[~flat], mass[~flat])


def pushforward_cdf_1d(net: Network, a: float = 0.0, b: float = 1.0,
                       budget: int | None = None) -> PiecewiseLinearCdf:
    """Exact CDF of ``net # U[a, b]`` for a scalar network."""
    if net.input_dim != 1 or net.output_dim != 1:
        raise InputError("pushforward_cdf_1d needs a univariate network")
    return cdf_from_pieces(affine_pieces_1d(net, a, b, budget=budget))


def empirical_cdf(samples) -> PiecewiseLinearCdf:
    """Step-function CDF of equally weighted scalar samples."""
    x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    if len(x) == 0:
        raise InputError("no samples")
    knots, counts = np.unique(x, return_counts=True)
    cum = np.cumsum(counts) / len(x)
    xs = np.repeat(knots, 2)
    vs = np.empty(len(xs))
    vs[0::2] = np.concatenate([[0.0], cum[:-1]])
    vs[1::2] = cum
    vs[-1] = 1.0
    return PiecewiseLinearCdf(xs, vs)


# ------------------------------------------------------------- W1 distances


def _abs_linear_integral(d0, d1, h):
    """Integral over length h of |linear function| with end values d0, d1."""
    a0, a1 = np.abs(d0), np.abs(d1)
    same = d0 * d1 >= 0
    with np.errstate(invalid="ignore", divide="ignore"):
        cross = h * (d0 * d0 + d1 * d1) / (2.0 * (a0 + a1))
    return np.where(same, 0.5 * h * (a0 + a1), np.nan_to_num(cross))


def _w1_pl(F: PiecewiseLinearCdf, G: PiecewiseLinearCdf) -> float:
    knots = np.unique(np.concatenate([F.xs, G.xs]))
    if len(knots) < 2:
        return 0.0
    lo, hi = knots[:-1], knots[1:]
    d0 = F(lo) - G(lo)
    d1 = F.left_limit(hi) - G.left_limit(hi)
    return float(np.sum(_abs_linear_integral(d0, d1, hi - lo)))


def _phi_antideriv(x):
    return x * normal_cdf_ref(x) + normal_pdf(x)


def _g_integral(s, c, l, r):
    """Integral of (s x + c - Phi(x)) over [l, r]."""
    return 0.5 * s * (r * r - l * l) + c * (r - l) - (_phi_antideriv(r) - _phi_antideriv(l))


def _w1_normal(F: PiecewiseLinearCdf) -> float:
    xs, vs = F.xs, F.vs
    # tails where F is 0 (left) or 1 (right)
    total = float(_phi_antideriv(xs[0]))
    x_end = xs[-1]
    total += float(normal_pdf(x_end) - x_end * (1.0 - normal_cdf_ref(x_end)))
    keep = np.diff(xs) > 0
    l, r = xs[:-1][keep], xs[1:][keep]
    v0, v1 = vs[:-1][keep], vs[1:][keep]
    if len(l) == 0:
        return total
    s = (v1 - v0) / (r - l)
    c = v0 - s * l
    # split every segment where g = F - Phi changes convexity (x = 0) or
    # has a stationary point (phi(x) = s), leaving monotone pieces
    with np.errstate(invalid="ignore", divide="ignore"):
        xs_stat = np.sqrt(np.maximum(-2.0 * np.log(s * np.sqrt(2.0 * np.pi)), 0.0))
    xs_stat = np.where(s > 0, xs_stat, np.inf)
    cand = np.stack([np.zeros_like(l), -xs_stat, xs_stat], axis=1)
    inside = (cand > l[:, None]) & (cand < r[:, None])
    cand = np.sort(np.where(inside, cand, np.inf), axis=1)
    cnt = inside.sum(axis=1)
    table = np.concatenate([l[:, None], cand], axis=1)
    mask = np.arange(4)[None, :] <= cnt[:, None]
    sub_l = table[mask]
    rep = np.repeat(np.arange(len(l)), cnt + 1)
    nxt = np.concatenate([table[:, 1:], np.full((len(l), 1), np.inf)], axis=1)
    nxt = np.where(np.arange(4)[None, :] == cnt[:, None], r[:, None], nxt)
    sub_r = nxt[mask]
    ss, cc = s[rep], c[rep]
    g_l = ss * sub_l + cc - normal_cdf_ref(sub_l)
    g_r = ss * sub_r + cc - normal_cdf_ref(sub_r)
    change = g_l * g_r < 0
    root = 0.5 * (sub_l + sub_r)
    if change.any():
        a, b = sub_l[change].copy(), sub_r[change].copy()
        ga = g_l[change]
        s2, c2 = ss[change], cc[change]
        for _ in range(200):
            m = 0.5 * (a + b)
            gm = s2 * m + c2 - normal_cdf_ref(m)
            left = np.sign(gm) == np.sign(ga)
            a = np.where(left, m, a)
            b = np.where(left, b, m)
            if np.all(b - a <= 4e-16 * np.maximum(1.0, np.abs(a))):
                break
        root[change] = 0.5 * (a + b)
    whole = np.abs(_g_integral(ss, cc, sub_l, sub_r))
    split = np.abs(_g_integral(ss, cc, sub_l, root)) + np.abs(_g_integral(ss, cc, root, sub_r))
    total += float(np.sum(np.where(change, split, whole)))
    return total


NORMAL = "normal"


def wasserstein_1d(F: PiecewiseLinearCdf, G) -> float:
    """W1 between two 1-D laws as the L1 distance of their CDFs.

    ``G`` is another :class:`PiecewiseLinearCdf` or the string ``"normal"``
    for the standard normal law; the normal case integrates exactly using the
    antiderivative ``x Phi(x) + phi(x)`` on monotone sub-segments.
    """
    if not isinstance(F, PiecewiseLinearCdf):
        raise InputError("first argument must be a PiecewiseLinearCdf")
    if isinstance(G, str):
        if G != NORMAL:
            raise InputError(f"unknown analytic law {G!r}")
        return _w1_normal(F)
    if not isinstance(G, PiecewiseLinearCdf):
        raise InputError("second argument must be a PiecewiseLinearCdf or 'normal'")
    return _w1_pl(F, G)
