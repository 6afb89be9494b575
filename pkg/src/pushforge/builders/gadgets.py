"""Elementary-function gadgets (exp, ln, cos, sin, powers), Box-Muller and sums of uniforms."""

from __future__ import annotations

import math
import re

import numpy as np

from ..errors import InputError
from ..network import Network, compose, linear_net
from .arithmetic import AccuracyCert, clamp_expr, error_budget_split, multiplier_net, series_expr
from .wiring import Wiring

KINDS = ("exp", "ln", "cos", "sin", "pow")
LN2 = math.log(2.0)


def parse_kind(kind: str, alpha: float | None = None) -> tuple[str, float | None]:
    """Accept ``"pow"`` with ``alpha`` or the compact form ``"pow(0.5)"``."""
    m = re.fullmatch(r"\s*pow\s*\(\s*([-+0-9.eE]+)\s*\)\s*", kind)
    if m:
        return "pow", float(m.group(1))
    if kind not in KINDS:
        raise InputError(f"unknown gadget kind {kind!r}; expected one of {KINDS}")
    if kind == "pow" and alpha is None:
        raise InputError("pow needs an exponent")
    return kind, alpha


def _taylor_coefs(kind: str, c: float, R: float, n: int) -> list[float]:
    j = np.arange(n + 1)
    scale = np.array([R ** k / math.factorial(k) for k in j])
    if kind == "exp":
        return list(math.exp(c) * scale)
    if kind == "cos":
        return list(np.cos(c + j * math.pi / 2) * scale)
    return list(np.sin(c + j * math.pi / 2) * scale)


def _taylor_terms(kind: str, a: float, b: float, R: float, tail: float) -> int:
    """Smallest degree whose Lagrange remainder on the domain is at most ``tail``."""
    bound = math.exp(b) if kind == "exp" else 1.0
    n = 0
    term = bound * R
    while term > tail:
        n += 1
        term *= R / (n + 1)
        if n > 500:
            raise InputError("domain too wide for a Taylor gadget")
    return n


def _smooth_gadget(kind: str, a: float, b: float, eps: float) -> tuple[Network, AccuracyCert]:
    c, R = 0.5 * (a + b), 0.5 * (b - a)
    if R == 0.0:
        R = 0.5
    n = _taylor_terms(kind, a, b, R, eps / 2)
    coefs = _taylor_coefs(kind, c, R, n)
    tail = (math.exp(b) if kind == "exp" else 1.0) * R ** (n + 1) / math.factorial(n + 1)
    w = Wiring(1)
    x = clamp_expr(w, w.inputs[0], c - R, c + R)
    acc, _ = series_expr(w, (x - c) / R, coefs, eps / 2)
    net = w.finish([acc])
    cert = AccuracyCert(eps, [a, b], tail + eps / 2, extra={"kind": kind, "terms": n + 1})
    return net, cert


def ln_stages(a: float, b: float) -> int:
    """Halving/doubling stages that bring ``[a, b]`` into ``[1/2, 3/2]``."""
    return max(0, math.ceil(math.log2(max(b, 1.0 / a))))


def _ln_gadget(a: float, b: float, eps: float) -> tuple[Network, AccuracyCert]:
    S = ln_stages(a, b)
    C = max(b, 2.0) + 1.0
    w = Wiring(1)
    x = clamp_expr(w, w.inputs[0], a, b)
    cnt = w.const(0.0)
    off = S + 1.0
    for _ in range(S):
        # Step gates pick doubling (x < 1/2) or halving (x > 3/2); C switches the ReLUs off
        g_lo, g_hi, xc, cc = w.layer([(0.5 - x, "step"), (x - 1.5, "step"),
                                      (x, "relu"), (cnt + off, "relu")])
        d, h, xc, cc = w.layer([(xc - C + g_lo * C, "relu"), (xc - C + g_hi * C, "relu"),
                                (xc, "relu"), (cc + g_hi - g_lo, "relu")])
        x = xc + d - h * 0.5
        cnt = cc - off
    # remainder after degree n is at most sum_{j>n} 2^-j / j <= 2^-n / (n + 1)
    n = 1
    while 2.0 ** -n / (n + 1) > eps / 2:
        n += 1
    coefs = [0.0] + [(-1) ** (j + 1) / (j * 2.0 ** j) for j in range(1, n + 1)]
    tail = 2.0 ** -n / (n + 1)
    # x in [1/2, 3/2] is written 1 + u/2 with u in [-1, 1]
    acc, (cnt,) = series_expr(w, (x - 1.0) * 2.0, coefs, eps / 2, carries=[(cnt, -off)])
    net = w.finish([acc + cnt * LN2])
    cert = AccuracyCert(eps, [a, b], tail + eps / 2,
                        extra={"kind": "ln", "stages": S, "terms": n})
    return net, cert


def analytic_gadget(kind: str, domain, eps: float, alpha: float | None = None) -> tuple[Network, AccuracyCert]:
    """Network approximating exp, ln, cos, sin or ``x^alpha`` uniformly on ``domain``.

    exp/cos/sin use a Taylor polynomial about the domain centre whose
    Lagrange remainder is at most eps/2, evaluated by a chain of multipliers
    with network error eps/2. ln first doubles or halves the input with Step
    gates until it lies in ``[1/2, 3/2]``, counting the moves, then evaluates
    the ``ln(1 + u/2)`` series. ``x^alpha`` is ``exp(alpha ln x)``. Inputs are
    clamped to the domain.
    """
    kind, alpha = parse_kind(kind, alpha)
    a, b = (float(v) for v in domain)
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise InputError(f"domain must be a finite interval with a < b, got {domain}")
    if not (isinstance(eps, (int, float)) and 0 < eps < 1):
        raise InputError(f"eps must lie in (0, 1), got {eps}")
    if kind in ("ln", "pow") and a <= 0:
        raise InputError(f"{kind} needs a positive domain, got {domain}")
    if kind == "ln":
        return _ln_gadget(a, b, eps)
    if kind != "pow":
        return _smooth_gadget(kind, a, b, eps)
    lo, hi = sorted((alpha * math.log(a), alpha * math.log(b)))
    if hi - lo < 1e-9:
        lo, hi = lo - 0.5, hi + 0.5
    eps_in, eps_out = error_budget_split(eps, math.exp(hi))
    ln_net, ln_cert = _ln_gadget(a, b, eps_in / abs(alpha) if alpha else 0.5)
    exp_net, exp_cert = _smooth_gadget("exp", lo, hi, eps_out)
    net = compose(exp_net, compose(linear_net([[alpha]]), ln_net))
    claimed = exp_cert.claimed_sup_error + math.exp(hi) * abs(alpha) * ln_cert.claimed_sup_error
    cert = AccuracyCert(eps, [a, b], claimed, extra={"kind": "pow", "alpha": alpha})
    return net, cert


def box_muller_truncation(eps: float) -> float:
    """Largest ``e = eps/10 * 2^-j`` with ``2 e (sqrt(2 ln(1/e)) + 1) < eps/10``."""
    e = eps / 10.0
    while 2.0 * e * (math.sqrt(2.0 * math.log(1.0 / e)) + 1.0) >= eps / 10.0:
        e /= 2.0
    return e


def radius_net(lo: float, eps_r: float) -> tuple[Network, float]:
    """``sqrt(-2 ln x)`` on ``[lo, 1]`` to within ``eps_r``; also returns the radius cap.

    ``-2 ln x`` is clamped below at ``v_min = eps_r^2 / 4`` before the square
    root, so by Hoelder continuity of the root the first stage needs accuracy
    ``v_min / 2`` in ``-2 ln x`` (``v_min / 4`` in ``ln x``).
    """
    v_min = eps_r ** 2 / 4.0
    v_max = -2.0 * math.log(lo)
    ln_net, _ = _ln_gadget(lo, 1.0, v_min / 4.0)
    root, _ = analytic_gadget("pow", [v_min, v_max], eps_r / 2.0, alpha=0.5)
    return compose(root, compose(linear_net([[-2.0]]), ln_net)), math.sqrt(v_max)


def box_muller_net(eps: float) -> tuple[Network, AccuracyCert]:
    """Two-input network approximating ``(x1, x2) -> r(x1) (cos 2 pi x2, sin 2 pi x2)``.

    ``r(x1) = sqrt(-2 ln x1)``. Inputs ``x1 < eps_trunc`` form the exception
    set; there the network returns the value at ``eps_trunc``. Error budget:
    radius eps/4, each trig factor eps/(4 r_max), each product eps/4.
    """
    if not (isinstance(eps, (int, float)) and 0 < eps < 0.25):
        raise InputError(f"eps must lie in (0, 1/4), got {eps}")
    trunc = box_muller_truncation(eps)
    eps_r = eps / 4.0
    r_net, r_max = radius_net(trunc, eps_r)
    eps_c = eps / (4.0 * (r_max + eps_r))
    turn = linear_net([[2.0 * math.pi]])
    cos_net, _ = analytic_gadget("cos", [0.0, 2.0 * math.pi], eps_c)
    sin_net, _ = analytic_gadget("sin", [0.0, 2.0 * math.pi], eps_c)
    cos_net, sin_net = compose(cos_net, turn), compose(sin_net, turn)
    eps_m = eps / 4.0
    mult = multiplier_net(r_max + eps_r + 1.0, eps_m)
    w = Wiring(2)
    x1, x2 = w.inputs
    (r,), (c,), (s,) = w.run([(r_net, [x1]), (cos_net, [x2]), (sin_net, [x2])])[0]
    (z1,), (z2,) = w.run([(mult, [r, c]), (mult, [r, s])])[0]
    net = w.finish([z1, z2])
    claimed = eps_r * (1.0 + eps_c) + r_max * eps_c + eps_m
    cert = AccuracyCert(eps, [[trunc, 1.0], [0.0, 1.0]], claimed, zeta=trunc,
                        extra={"eps_trunc": trunc, "r_max": r_max})
    return net, cert


def sum_of_uniforms_net(n: int) -> Network:
    """Affine map ``x -> (sum x_i - n/2) / sqrt(n/12)``; no nonlinearity."""
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise InputError(f"n must be a positive integer, got {n!r}")
    s = math.sqrt(n / 12.0)
    return linear_net(np.full((1, n), 1.0 / s), [-n / 2.0 / s])
