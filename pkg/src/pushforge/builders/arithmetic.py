"""Arithmetic gadgets: clamping, approximate products, powers and power series."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError
from ..network import AffineLayer, Network
from .wiring import Expr, Wiring


@dataclass
class AccuracyCert:
    """Accuracy claim attached to a built network.

    ``claimed_sup_error`` holds on ``domain`` except on a set of measure at
    most ``zeta``.
    """

    target_eps: float
    domain: list
    claimed_sup_error: float
    zeta: float = 0.0
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"target_eps": self.target_eps, "domain": self.domain,
                "claimed_sup_error": self.claimed_sup_error, "zeta": self.zeta, **self.extra}


def _check_positive(name: str, v: float) -> None:
    if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
        raise InputError(f"{name} must be a positive finite number, got {v!r}")


def clamp_net(lo: float, hi: float) -> Network:
    """Exact ``x -> max(lo, min(x, hi))`` as ``lo + relu(x - lo) - relu(x - hi)``."""
    if not lo < hi:
        raise InputError(f"clamp needs lo < hi, got [{lo}, {hi}]")
    hidden = AffineLayer([[1.0], [1.0]], [-lo, -hi])
    return Network([hidden, AffineLayer([[1.0, -1.0]], [lo], "identity")])


def clamp_expr(w: Wiring, e: Expr, lo: float, hi: float) -> Expr:
    """Clamp inside a :class:`Wiring` (one hidden layer)."""
    a, b = w.layer([(e - lo, "relu"), (e - hi, "relu")])
    return a - b + lo


def error_budget_split(eps: float, lipschitz_outer: float) -> tuple[float, float]:
    """Split ``eps`` for ``g o f``: inner error eps/(2 Lip(g)), outer error eps/2."""
    _check_positive("eps", eps)
    _check_positive("lipschitz_outer", lipschitz_outer)
    return eps / (2.0 * lipschitz_outer), eps / 2.0


def squaring_iterations(M: float, eps: float) -> int:
    """Sawtooth refinements so the polarization product errs by at most eps.

    Each squarer is off by at most 4^-(m+1); the product combines three of
    them with weights summing to 3 M^2.
    """
    return max(1, math.ceil((math.log2(3.0 * M * M / eps) - 2.0) / 2.0))


def multiplier_size_bound(M: float, eps: float) -> float:
    """Documented node bound ``30 + 13 (ln(1/eps) + ln M)`` for :func:`multiplier_net`."""
    return 30.0 + 13.0 * (math.log(1.0 / eps) + math.log(M))


def multiplier_net(M: float, eps: float) -> Network:
    """Two-input network with ``|out - x y| <= eps`` on ``[-M, M]^2``.

    Uses ``x y = M^2 (4 a^2 - b^2 - c^2) / 2`` with ``a = |x+y|/2M``,
    ``b = |x|/M``, ``c = |y|/M`` in ``[0, 1]``; each square is the sawtooth
    expansion ``s - sum_m t_{2^m}(s) / 4^m``.
    """
    if not (math.isfinite(M) and M >= 1):
        raise InputError(f"multiplier range M must be >= 1, got {M}")
    if not (0 < eps < 1):
        raise InputError(f"multiplier eps must lie in (0, 1), got {eps}")
    m = squaring_iterations(M, eps)
    w = Wiring(2)
    x, y = w.inputs
    u = w.layer([(x + y, "relu"), (-x - y, "relu"), (x, "relu"), (-x, "relu"),
                 (y, "relu"), (-y, "relu")])
    s = [(u[0] + u[1]) / (2 * M), (u[2] + u[3]) / M, (u[4] + u[5]) / M]
    g = list(s)
    acc = list(s)
    for it in range(m):
        rows = []
        for j in range(3):
            rows += [(g[j] * 2.0, "relu"), (g[j] * 2.0 - 1.0, "relu")]
        for j in range(3):
            rows.append((acc[j] + 1.0, "relu"))   # acc >= -1 throughout
        h = w.layer(rows)
        scale = 0.25 ** (it + 1)
        for j in range(3):
            g[j] = h[2 * j] - h[2 * j + 1] * 2.0
            acc[j] = h[6 + j] - 1.0 - g[j] * scale
    out = (acc[0] * 4.0 - acc[1] - acc[2]) * (M * M / 2.0)
    return w.finish([out])


def multiply(w: Wiring, x: Expr, y: Expr, M: float, eps: float,
             carries=()) -> tuple[Expr, list[Expr]]:
    """Insert a multiplier block into ``w``; returns the product and carried values."""
    (out,), carried = w.run([(multiplier_net(M, eps), [x, y])], carries)
    return out[0], carried


def power_tower_net(n: int, M: float, eps: float) -> Network:
    """One input, ``n + 1`` outputs approximating ``1, x, ..., x^n`` on ``[-M, M]``.

    ``x^k`` is the product of ``x^(k-1)`` and ``x``; the k-th multiplier is
    budgeted ``eps / (2 (2M)^(n-k))`` so the propagated error of every power
    stays below ``eps``.
    """
    if int(n) != n or n < 0:
        raise InputError(f"power count must be a nonnegative integer, got {n}")
    if not (math.isfinite(M) and M >= 1):
        raise InputError(f"range M must be >= 1, got {M}")
    _check_positive("eps", eps)
    n = int(n)
    w = Wiring(1)
    (x,) = w.inputs
    powers = [w.const(1.0), x]
    for k in range(2, n + 1):
        budget = min(0.5, eps / (2.0 * (2.0 * M) ** (n - k)))
        rng = max(M, M ** (k - 1)) + eps
        p, carried = multiply(w, powers[-1], x, rng, budget,
                              carries=[(pw, -M ** j - eps) for j, pw in enumerate(powers[1:], 1)]
                              )
        powers = [w.const(1.0)] + carried + [p]
        x = carried[0]
    return w.finish(powers[: n + 1])


def series_error_weights(coefs, odd: bool) -> float:
    """Sum over terms of |c_j| times the number of product errors term j inherits."""
    coefs = np.asarray(coefs, dtype=np.float64)
    j = np.arange(len(coefs))
    steps = 2 * j if odd else np.maximum(j - 1, 0)
    return float(np.sum(np.abs(coefs) * steps))


def series_expr(w: Wiring, u: Expr, coefs, budget: float, odd: bool = False,
                carries=()) -> tuple[Expr, list[Expr]]:
    """Approximate ``sum_j c_j u^(s_j)`` for ``u`` in ``[-1, 1]`` inside ``w``.

    ``s_j = j`` (or ``2j + 1`` with ``odd``). Powers are formed one product
    at a time and folded into a carried partial sum, so the width stays
    constant. Total network error is at most ``budget``.
    """
    coefs = [float(c) for c in coefs]
    carries = list(carries)
    total = sum(abs(c) for c in coefs)
    weight = series_error_weights(coefs, odd)
    step_eps = min(0.25, budget / weight) if weight > 0 else 0.25
    rng = 1.0 + 2.0 * budget
    acc_lo = -total - 1.0
    if odd:
        base, extra = multiply(w, u, u, rng, step_eps, carries=[(u, -rng)] + carries)
        p = extra[0]
        carries_now = extra[1:]
        acc = p * coefs[0]
        start = 1
    else:
        base = u
        p = u
        carries_now = [e for e, _ in carries]
        acc = w.const(coefs[0])
        if len(coefs) > 1:
            acc = acc + u * coefs[1]
        start = 2
    lowers = [lo for _, lo in carries]
    for j in range(start, len(coefs)):
        cs = [(acc, acc_lo), (base, -rng)] + list(zip(carries_now, lowers))
        p, got = multiply(w, p, base, rng, step_eps, carries=cs)
        acc, base, carries_now = got[0], got[1], got[2:]
        acc = acc + p * coefs[j]
    return acc, carries_now


def series_net(coefs, budget: float, odd: bool = False) -> Network:
    """Stand-alone network for :func:`series_expr` on ``[-1, 1]``."""
    w = Wiring(1)
    acc, _ = series_expr(w, w.inputs[0], coefs, budget, odd)
    return w.finish([acc])
