"""Networks for the normal CDF, its inverse, and a uniform-to-normal generator."""

from __future__ import annotations

import math

import numpy as np

from ..errors import InputError
from ..network import Network, compose, linear_net
from ..transport.oracles import SQRT_2PI, normal_cdf_ref, normal_pdf, normal_quantile_ref
from .arithmetic import AccuracyCert, clamp_expr, clamp_net, series_expr
from .wiring import Expr, Wiring


def cdf_series_coefficients(R: float, n: int) -> list[float]:
    """Maclaurin coefficients of Phi(R u) - 1/2 in odd powers u^(2k+1), k <= n."""
    return [(-1) ** k * R ** (2 * k + 1) / (SQRT_2PI * math.factorial(k) * (2 * k + 1) * 2 ** k)
            for k in range(n + 1)]


def _abs_term(R: float, k: int) -> float:
    # |coefficient| in log space to survive large k
    lg = ((2 * k + 1) * math.log(R) - 0.5 * math.log(2 * math.pi) - math.lgamma(k + 1)
          - math.log(2 * k + 1) - k * math.log(2))
    return math.exp(lg)


def cdf_series_terms(R: float, tail: float) -> int:
    """Smallest n whose dropped terms sum to at most ``tail`` for |u| <= 1."""
    K = int(2 * R * R) + 60
    terms = np.array([_abs_term(R, k) for k in range(K + 1)])
    # past k = R^2 consecutive terms shrink by more than half, so the
    # remainder after K is at most terms[K]
    suffix = np.cumsum(terms[::-1])[::-1] + terms[K]
    for n in range(K):
        if suffix[n + 1] <= tail:
            return n
    raise InputError("series tail tolerance too small")


def cdf_cutoff(eps: float) -> float:
    """R (rounded up to 1e-3) with 1 - Phi(R) <= eps / 4."""
    return math.ceil(-float(normal_quantile_ref(eps / 4.0)) * 1000.0) / 1000.0


def normal_cdf_net(eps: float) -> tuple[Network, AccuracyCert]:
    """Network within ``eps`` of Phi on all of R.

    Inside [-R, R] a truncated Maclaurin series is evaluated with products;
    on [R, 2R] and [-2R, -R] the output ramps linearly to 1 and 0, and the
    result is clamped to [0, 1]. R is chosen with 1 - Phi(R) <= eps/4.
    """
    if not (0 < eps < 0.5):
        raise InputError(f"eps must lie in (0, 1/2), got {eps}")
    R = cdf_cutoff(eps)
    n = cdf_series_terms(R, eps / 4.0)
    coefs = cdf_series_coefficients(R, n)
    w = Wiring(1)
    (z,) = w.inputs
    h = w.layer([(z + R, "relu"), (z - R, "relu"), (z - 2 * R, "relu"),
                 (-z - R, "relu"), (-z - 2 * R, "relu")])
    u = (h[0] - h[1] - R) / R
    up = (h[1] - h[2]) / R
    down = (h[3] - h[4]) / R
    p, (up, down) = series_expr(w, u, coefs, eps / 4.0, odd=True,
                                carries=[(up, 0.0), (down, 0.0)])
    core = w.finish([p + 0.5, up, down])
    at = core(np.array([[-R], [R]]))[:, 0]
    p_lo, p_hi = float(at[0]), float(at[1])
    mix = linear_net([[1.0, 1.0 - p_hi, -p_lo]])
    net = compose(clamp_net(0.0, 1.0), compose(mix, core))
    cert = AccuracyCert(eps, [-math.inf, math.inf], 0.75 * eps,
                        extra={"cutoff": R, "terms": n + 1})
    return net, cert


def binary_search_expr(w: Wiring, y: Expr, f_net: Network, a: float, b: float, t: int,
                       y_lower: float | None = None) -> tuple[Expr, Expr]:
    """Append ``t`` bisection steps for ``f(x) = y`` on ``[a, b]`` to ``w``.

    Step i tests ``y > f(low + w_i/2)`` with a Step unit and, if so, moves
    ``low`` up by ``w_i/2`` where ``w_i = (b - a) 2^-i``. Returns the final
    midpoint and the carried ``y``.
    """
    low = w.const(a)
    for i in range(t):
        half = (b - a) * 2.0 ** (-i - 1)
        (fo,), (y, low) = w.run([(f_net, [low + half])], [(y, y_lower), (low, a)])
        rows = [(y - fo[0], "step"), (low - a, "relu")]
        rows += [(y, "relu"), (-y, "relu")] if y_lower is None else [(y - y_lower, "relu")]
        units = w.layer(rows)
        low = units[0] * half + units[1] + a
        y = units[2] - units[3] if y_lower is None else units[2] + y_lower
    return low + (b - a) * 2.0 ** (-t - 1), y


def binary_search_inverter(f_net: Network, a: float, b: float, t: int, lipschitz_inv: float,
                           f_eps: float = 0.0) -> tuple[Network, AccuracyCert]:
    """ReLU-Step network approximating the inverse of an increasing f on [a, b].

    ``f_net`` approximates f within ``f_eps``; ``lipschitz_inv`` bounds the
    Lipschitz constant of f^{-1}. The output is the midpoint of the final
    bracket, within ``(b - a) 2^-t + f_eps * lipschitz_inv`` of f^{-1}(y).
    """
    if f_net.input_dim != 1 or f_net.output_dim != 1:
        raise InputError("the inverted network must be univariate")
    if not a < b:
        raise InputError(f"need a < b, got [{a}, {b}]")
    if int(t) != t or t < 1:
        raise InputError(f"t must be a positive integer, got {t}")
    w = Wiring(1)
    out, _ = binary_search_expr(w, w.inputs[0], f_net, a, b, int(t))
    net = w.finish([out])
    bound = (b - a) * 2.0 ** (-t) + f_eps * lipschitz_inv
    cert = AccuracyCert(bound, [a, b], bound, extra={"t": int(t), "f_eps": f_eps,
                                                     "lipschitz_inv": lipschitz_inv})
    return net, cert


def inverse_normal_cdf_net(eps: float, zeta: float | None = None,
                           t: int | None = None) -> tuple[Network, AccuracyCert]:
    """ReLU-Step network within ``eps`` of Phi^{-1} on [Phi(a), Phi(b)], a = -b = -ln(1/eps).

    Accuracy is guaranteed outside an exception set of measure ``zeta``
    (default ``eps``): the two tails where the local Lipschitz constant of
    Phi^{-1} exceeds ``1/phi(b')`` with ``2 Phi(-b') = zeta``.
    """
    if not (0 < eps < 0.25):
        raise InputError(f"eps must lie in (0, 1/4), got {eps}")
    zeta = eps if zeta is None else zeta
    if not (0 < zeta < 1):
        raise InputError(f"zeta must lie in (0, 1), got {zeta}")
    b = math.log(1.0 / eps)
    a = -b
    if t is None:
        t = math.ceil(math.log2(2.0 * (b - a) / eps))
    b_good = min(b, -float(normal_quantile_ref(zeta / 2.0)))
    lip = 1.0 / float(normal_pdf(b_good))
    cdf_eps = min(0.25, (eps - (b - a) * 2.0 ** (-t - 1)) / lip)
    f_net, f_cert = normal_cdf_net(cdf_eps)
    net, _ = binary_search_inverter(f_net, a, b, t, lip, f_cert.claimed_sup_error)
    claimed = (b - a) * 2.0 ** (-t - 1) + f_cert.claimed_sup_error * lip
    lo_y = float(normal_cdf_ref(a))
    cert = AccuracyCert(eps, [lo_y, 1.0 - lo_y], claimed, zeta,
                        extra={"t": t, "interval": [a, b], "cdf_eps": cdf_eps,
                               "lipschitz_inv": lip})
    return net, cert


def _cdf_budget(eps: float) -> float:
    """CDF accuracy for the generator: first-order W1 cost 2 e q(e) <= eps/4.

    Shifting the CDF by ``e`` moves quantiles by about ``e / phi``; integrated
    over the body this costs ``2 e q(e)`` with ``q(e) = Phi^{-1}(1 - e)``.
    The returned value is the target passed to :func:`normal_cdf_net`, whose
    claimed error is three quarters of it.
    """
    lo, hi = 1e-9, 0.1
    for _ in range(80):
        e = math.sqrt(lo * hi)
        cost = 2.0 * e * -float(normal_quantile_ref(e))
        lo, hi = (e, hi) if cost <= eps / 4.0 else (lo, e)
    return lo / 0.75


def uniform_to_normal_core(eps: float) -> tuple[Network, dict, Network]:
    """ReLU-Step generator before step replacement, plus its design parameters.

    With ``A = ln(1/eps^2)`` the inverse CDF is bisected on ``[-A, A]``;
    inputs below ``Phi(-A)`` or above ``Phi(A)`` are pinned to ``-A`` / ``A``
    by Step gates and the output is clamped to ``[-A, A]``. Also returns the
    CDF sub-network used by the bisection.
    """
    A = 2.0 * math.log(1.0 / eps)
    # final bracket half-width at most eps/8
    t = math.ceil(math.log2(8.0 * A / eps))
    cdf_eps = _cdf_budget(eps)
    f_net, f_cert = normal_cdf_net(cdf_eps)
    p_lo = float(normal_cdf_ref(-A))
    p_hi = float(normal_cdf_ref(A))
    w = Wiring(1)
    (y,) = w.inputs
    out, y = binary_search_expr(w, y, f_net, -A, A, t)
    g = w.layer([(p_lo - y, "step"), (y - p_hi, "step"), (out + A, "relu")])
    pinned = g[2] - A - g[0] * (4.0 * A) + g[1] * (4.0 * A)
    final = clamp_expr(w, pinned, -A, A)
    net = w.finish([final])
    params = {"A": A, "t": t, "cdf_eps": cdf_eps, "cdf_claimed": f_cert.claimed_sup_error,
              "pin_low": p_lo, "pin_high": p_hi}
    return net, params, f_net


def generator_pieces(params: dict, f_pl, delta: float):
    """Exact piecewise form on [0, 1] of the generator, step units as ramps of width delta.

    Follows the network block by block: each bisection step composes the
    precomputed piecewise form ``f_pl`` of the CDF sub-network with the
    current midpoint. ``delta = 0`` reproduces the Step version.
    """
    from ..piecewise import PL

    A, t = params["A"], params["t"]
    y = PL.affine(0.0, 1.0)
    low = PL.affine(0.0, 1.0, 0.0, -A)
    for i in range(t):
        half = 2.0 * A * 2.0 ** (-i - 1)
        fm = (low + half).compose_into(f_pl)
        gate = (y - fm).apply_ramp(delta)
        low = low + gate * half
    out = low + 2.0 * A * 2.0 ** (-t - 1)
    g0 = (params["pin_low"] - y).apply_ramp(delta)
    g1 = (y - params["pin_high"]).apply_ramp(delta)
    pinned = out - g0 * (4.0 * A) + g1 * (4.0 * A)
    return pinned.clamp(-A, A)


def step_exception_measure(pieces_a, pieces_b, tol: float = 1e-9) -> float:
    """Length of the set where two scalar piecewise-affine maps differ by more than tol."""
    xs = np.union1d(pieces_a.xs, pieces_b.xs)
    lo, hi = xs[:-1], xs[1:]
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    mid = 0.5 * (lo + hi)
    ja = np.clip(np.searchsorted(pieces_a.xs, mid) - 1, 0, pieces_a.num_pieces - 1)
    jb = np.clip(np.searchsorted(pieces_b.xs, mid) - 1, 0, pieces_b.num_pieces - 1)
    ds = pieces_a.slopes[ja, 0] - pieces_b.slopes[jb, 0]
    dc = pieces_a.intercepts[ja, 0] - pieces_b.intercepts[jb, 0]
    d0, d1 = ds * lo + dc, ds * hi + dc
    # |d0 + (d1 - d0) s| > tol on a sub-interval of [lo, hi]; d is linear
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = (tol - d0) / (d1 - d0)
        r2 = (-tol - d0) / (d1 - d0)
    inside_lo = np.clip(np.minimum(r1, r2), 0.0, 1.0)
    inside_hi = np.clip(np.maximum(r1, r2), 0.0, 1.0)
    const = d1 == d0
    frac_ok = np.where(const, (np.abs(d0) <= tol).astype(float), inside_hi - inside_lo)
    return float(np.sum((1.0 - frac_ok) * (hi - lo)))


def uniform_to_normal_net(eps: float, max_halvings: int = 40) -> tuple[Network, AccuracyCert]:
    """ReLU network pushing U[0,1] to within ``eps`` of N(0,1) in W1.

    See :func:`uniform_to_normal_build`, which also returns the exact
    pushforward CDF.
    """
    net, cert, _ = uniform_to_normal_build(eps, max_halvings)
    return net, cert


def uniform_to_normal_build(eps: float, max_halvings: int = 40):
    """ReLU network pushing U[0,1] to within ``eps`` of N(0,1), its certificate and pushforward CDF.

    The ReLU-Step generator from :func:`uniform_to_normal_core` has its Step
    units replaced by ramps of width ``delta``. ``delta`` starts at
    ``eps^2 2^-t / N`` and is halved until the exact W1 between the two
    pushforwards is below ``eps/10``. The certificate's claimed error is the
    exact W1 of the final pushforward against N(0,1).
    """
    from ..network import replace_steps
    from ..piecewise import PL
    from ..regions import affine_pieces_1d
    from ..transport.cdf import cdf_from_pieces, wasserstein_1d

    if not (0 < eps < 0.25):
        raise InputError(f"eps must lie in (0, 1/4), got {eps}")
    step_net, params, f_net = uniform_to_normal_core(eps)
    A = params["A"]
    f_pl = PL.from_pieces(affine_pieces_1d(f_net, -A - 1.0, A + 1.0))
    step_pl = generator_pieces(params, f_pl, 0.0)
    step_cdf = cdf_from_pieces(step_pl.to_pieces())
    delta = eps * eps * 2.0 ** (-params["t"]) / step_net.node_count
    for _ in range(max_halvings):
        relu_pl = generator_pieces(params, f_pl, delta)
        relu_cdf = cdf_from_pieces(relu_pl.to_pieces())
        gap = wasserstein_1d(relu_cdf, step_cdf)
        if gap < eps / 10.0:
            break
        delta /= 2.0
    else:
        raise InputError("could not make the step replacement accurate enough")
    zeta = step_exception_measure(relu_pl.to_pieces(), step_pl.to_pieces())
    w1 = wasserstein_1d(relu_cdf, "normal")
    cert = AccuracyCert(eps, [-A, A], w1, zeta,
                        extra={"metric": "W1", "delta": delta, "replacement_gap": gap,
                               "pieces": relu_pl.num_pieces, **params})
    return replace_steps(step_net, delta), cert, relu_cdf
