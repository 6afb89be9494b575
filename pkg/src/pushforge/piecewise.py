"""Exact arithmetic on continuous-or-jumping scalar piecewise-affine functions of one variable.

Used to follow a network block by block when sweeping it layer by layer
would be too slow: compositions with a precomputed piecewise form cost time
proportional to the number of resulting pieces only.
"""

from __future__ import annotations

import numpy as np

from .regions import PiecewiseAffine1D


class PL:
    """``f(x) = s[j] x + c[j]`` on ``[xs[j], xs[j+1]]`` (scalar output)."""

    __slots__ = ("xs", "s", "c")

    def __init__(self, xs, s, c):
        self.xs = np.asarray(xs, dtype=np.float64)
        self.s = np.asarray(s, dtype=np.float64)
        self.c = np.asarray(c, dtype=np.float64)

    @classmethod
    def affine(cls, a: float, b: float, slope: float = 1.0, offset: float = 0.0) -> "PL":
        return cls([a, b], [slope], [offset])

    @classmethod
    def from_pieces(cls, p: PiecewiseAffine1D, out: int = 0) -> "PL":
        return cls(p.xs, p.slopes[:, out], p.intercepts[:, out])

    def to_pieces(self) -> PiecewiseAffine1D:
        return PiecewiseAffine1D(self.xs, self.s[:, None], self.c[:, None])

    @property
    def num_pieces(self) -> int:
        return len(self.s)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        j = np.clip(np.searchsorted(self.xs, x, side="right") - 1, 0, self.num_pieces - 1)
        return self.s[j] * x + self.c[j]

    def _at(self, knots):
        mid = 0.5 * (knots[:-1] + knots[1:])
        j = np.clip(np.searchsorted(self.xs, mid, side="right") - 1, 0, self.num_pieces - 1)
        return self.s[j], self.c[j]

    def refine(self, knots) -> "PL":
        knots = np.union1d(self.xs, knots)
        s, c = self._at(knots)
        return PL(knots, s, c)

    def __add__(self, other):
        if isinstance(other, PL):
            knots = np.union1d(self.xs, other.xs)
            s1, c1 = self._at(knots)
            s2, c2 = other._at(knots)
            return PL(knots, s1 + s2, c1 + c2).merged()
        return PL(self.xs, self.s, self.c + float(other))

    __radd__ = __add__

    def __neg__(self):
        return PL(self.xs, -self.s, -self.c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, k):
        k = float(k)
        return PL(self.xs, self.s * k, self.c * k)

    __rmul__ = __mul__

    def merged(self, tol: float = 1e-12) -> "PL":
        if self.num_pieces < 2:
            return self
        ds = np.abs(self.s[1:] - self.s[:-1]) <= tol * (1 + np.abs(self.s[1:]))
        dc = np.abs(self.c[1:] - self.c[:-1]) <= tol * (1 + np.abs(self.c[1:]))
        same = ds & dc
        if not same.any():
            return self
        keep = np.concatenate([[True], ~same])
        return PL(self.xs[np.concatenate([keep, [True]])], self.s[keep], self.c[keep])

    def split_at_levels(self, levels) -> "PL":
        """Insert breakpoints where the function crosses any of ``levels``."""
        lo, hi = self.xs[:-1], self.xs[1:]
        new = []
        for v in levels:
            with np.errstate(divide="ignore", invalid="ignore"):
                r = (v - self.c) / self.s
            ok = (self.s != 0) & (r > lo) & (r < hi)
            new.append(r[ok])
        if not new:
            return self
        return self.refine(np.concatenate(new))

    def apply_ramp(self, delta: float) -> "PL":
        """``clip(f / delta, 0, 1)``; ``delta = 0`` gives the step ``1[f > 0]``."""
        if delta > 0:
            f = self.split_at_levels([0.0, delta])
            s, c = f._at(f.xs)
            mid = 0.5 * (f.xs[:-1] + f.xs[1:])
            v = s * mid + c
            below = v <= 0
            above = v >= delta
            ns = np.where(below | above, 0.0, s / delta)
            nc = np.where(below, 0.0, np.where(above, 1.0, c / delta))
            return PL(f.xs, ns, nc).merged()
        f = self.split_at_levels([0.0])
        mid = 0.5 * (f.xs[:-1] + f.xs[1:])
        v = f.s * mid + f.c
        return PL(f.xs, np.zeros(f.num_pieces), (v > 0).astype(np.float64)).merged()

    def clamp(self, lo: float, hi: float) -> "PL":
        f = self.split_at_levels([lo, hi])
        mid = 0.5 * (f.xs[:-1] + f.xs[1:])
        v = f.s * mid + f.c
        below, above = v <= lo, v >= hi
        ns = np.where(below | above, 0.0, f.s)
        nc = np.where(below, lo, np.where(above, hi, f.c))
        return PL(f.xs, ns, nc).merged()

    def compose_into(self, outer: "PL") -> "PL":
        """``outer o self``; ``outer`` must cover the range of ``self``."""
        lo, hi = self.xs[:-1], self.xs[1:]
        v0 = self.s * lo + self.c
        v1 = self.s * hi + self.c
        vmin, vmax = np.minimum(v0, v1), np.maximum(v0, v1)
        inner_bp = outer.xs[1:-1]
        i0 = np.searchsorted(inner_bp, vmin, side="right")
        i1 = np.searchsorted(inner_bp, vmax, side="left")
        cnt = np.maximum(i1 - i0, 0)
        if cnt.sum():
            rep = np.repeat(np.arange(len(lo)), cnt)
            offs = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
            bp = inner_bp[i0[rep] + offs]
            xs_new = (bp - self.c[rep]) / self.s[rep]
            xs_new = xs_new[(xs_new > lo[rep]) & (xs_new < hi[rep])]
            knots = np.union1d(self.xs, xs_new)
        else:
            knots = self.xs
        s, c = self._at(knots)
        mid = 0.5 * (knots[:-1] + knots[1:])
        val = s * mid + c
        j = np.clip(np.searchsorted(outer.xs, val, side="right") - 1, 0, outer.num_pieces - 1)
        return PL(knots, outer.s[j] * s, outer.s[j] * c + outer.c[j]).merged()
