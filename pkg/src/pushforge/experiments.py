"""Experiment drivers shared by the CLI sweeps and the acceptance suite.

Every driver is deterministic given its arguments (including the seed) and
returns plain dict rows suitable for CSV output.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .bounds import affine_piece_bound, network_lower_bound, tent_upper_bound, tent_upper_bound_appendix
from .builders.gadgets import box_muller_net, sum_of_uniforms_net
from .builders.normal import (binary_search_inverter, inverse_normal_cdf_net, normal_cdf_net,
                              uniform_to_normal_build)
from .builders.tent import space_filling_net, tent_map_net, tent_value
from .errors import InputError, PushforgeError
from .network import AffineLayer, Network, compose, linear_net
from .pwl_fit import fit_power_law, pwl_phi_best_l1
from .regions import breakpoints_1d, enumerate_regions
from .transport.checks import box_coupling_check, sup_error
from .transport.cdf import empirical_cdf, wasserstein_1d
from .transport.emd import EmpiricalDistribution, empirical_wasserstein
from .transport.oracles import normal_cdf_ref, normal_quantile_ref
from .transport.sampling import SourceDistribution, sample_pushforward

DEFAULT_SEED = 20240917


def perturb(net: Network, amount: float = 0.5) -> Network:
    """Copy of ``net`` with the first weight of the first layer shifted by ``amount``."""
    first = net.layers[0]
    w = np.array(first.weights)
    w.flat[0] += amount
    layers = (AffineLayer(w, first.bias, first.activation),) + net.layers[1:]
    return Network(layers, net.flavor)


def _pmap(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- tent maps


def tent_exactness(ks=range(1, 17), points: int = 10_000, corrupt: bool = False) -> list[dict]:
    """Grid error of ``tent_map_net(k)`` against the closed form, and its breakpoints."""
    x = np.linspace(0.0, 1.0, points)
    rows = []
    for k in ks:
        net = tent_map_net(k)
        if corrupt:
            net = perturb(net)
        err = float(np.max(np.abs(net(x[:, None]).ravel() - tent_value(k, x))))
        bp = breakpoints_1d(net, 0.0, 1.0)
        want = np.arange(k + 1) / k
        bp_ok = len(bp) == len(want) and bool(np.max(np.abs(bp - want)) <= 1e-12)
        rows.append({"k": k, "max_error": err, "breakpoints_exact": bp_ok})
    return rows


def _sandwich_point(args) -> dict:
    N, L, n, d, samples, seed, slack, corrupt = args
    row = {"N": N, "L": L, "n": n, "d": d, "samples": samples, "seed": seed}
    if N <= d * L:
        row["status"] = "skipped:N<=dL"
        return row
    try:
        net, plan = space_filling_net(n, d, N, L)
    except PushforgeError as exc:
        row["status"] = f"skipped:{exc}"
        return row
    if corrupt:
        net = perturb(net)
    pts = sample_pushforward(net, SourceDistribution("uniform_box", n, seed), samples)
    ref = EmpiricalDistribution.uniform(SourceDistribution("uniform_box", d, seed + 1).sample(samples))
    emd = empirical_wasserstein(pts, ref)
    coupling = math.sqrt(d) / plan.k if n < d else 0.0
    lower = network_lower_bound(N, L, n, d) if n < d else 0.0
    boxes = box_coupling_check(net, plan)
    row.update({
        "status": "ok", "k": plan.k, "nodes": net.node_count, "layers": net.num_layers,
        "box_check": boxes, "emd": emd, "coupling_bound": coupling,
        "tent_upper": tent_upper_bound(N, L, n, d), "tent_upper_appendix": tent_upper_bound_appendix(N, L, n, d),
        "net_lower": lower,
        "sandwich": bool(boxes and lower <= emd and emd <= coupling + slack),
    })
    return row


def space_filling_sandwich(Ns, Ls, n: int = 1, d: int = 2, samples: int = 2000,
                           seed: int = DEFAULT_SEED, slack: float = 0.03, jobs: int = 1,
                           corrupt: bool = False) -> list[dict]:
    """Measured EMD of space-filling nets sandwiched between the lower bound and ``sqrt(d)/k + slack``.

    Pushforward samples use ``seed``; the reference ``U([0,1]^d)`` sample uses ``seed + 1``.
    Rows come back in grid order (N outer, L inner) whatever ``jobs`` is.
    """
    grid = [(int(N), int(L), n, d, samples, seed, slack, corrupt) for N in Ns for L in Ls]
    if not grid:
        raise InputError("the parameter grid is empty")
    return _pmap(_sandwich_point, grid, jobs)


# ---------------------------------------------------------------- regions


def random_net(rng: np.random.Generator, n0: int, hidden: list[int]) -> Network:
    dims = [n0] + list(hidden) + [1]
    layers = [AffineLayer(rng.standard_normal((dims[i + 1], dims[i])), rng.standard_normal(dims[i + 1]),
                          "relu" if i + 1 < len(dims) - 1 else "identity") for i in range(len(dims) - 1)]
    return Network(layers)


def region_counts(count: int = 200, seed: int = DEFAULT_SEED, box: float = 3.0) -> list[dict]:
    """Regions of random small nets on ``[-box, box]^n0`` versus the affine-piece bound."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    rows = []
    for i in range(count):
        n0 = int(rng.integers(1, 3))
        depth = int(rng.integers(1, 4))
        hidden = [int(h) for h in rng.integers(1, 7, size=depth)]
        net = random_net(rng, n0, hidden)
        regions = enumerate_regions(net, [-box] * n0, [box] * n0)
        bound = affine_piece_bound(net.node_count, net.num_layers, n0)
        rows.append({"index": i, "n0": n0, "widths": "-".join(map(str, hidden)), "nodes": net.node_count,
                     "layers": net.num_layers, "regions": len(regions), "bound": bound,
                     "ok": len(regions) <= bound})
    return rows


def tent_composition_counts(max_pieces: int = 256) -> list[dict]:
    """Region counts of ``t_k`` composed ``e`` times; exact value ``k^e``."""
    rows = []
    for k in range(2, 17):
        e = 1
        while k ** e <= max_pieces:
            net = tent_map_net(k)
            for _ in range(e - 1):
                net = compose(tent_map_net(k), net)
            got = len(enumerate_regions(net, [0.0], [1.0]))
            rows.append({"k": k, "e": e, "regions": got, "expected": k ** e, "ok": got == k ** e})
            e += 1
    return rows


# ---------------------------------------------------------------- normal CDF


def phi_sweep(eps_list, grid_step: float = 0.01, corrupt: bool = False) -> list[dict]:
    """Sup error on ``[-6, 6]`` and size of ``normal_cdf_net(eps)``."""
    count = int(round(6.0 / grid_step))
    grid = np.arange(-count, count + 1) * grid_step
    rows = []
    for eps in eps_list:
        net, cert = normal_cdf_net(eps)
        if corrupt:
            net = perturb(net)
        err, at = sup_error(net, normal_cdf_ref, grid)
        rows.append({"eps": eps, "nodes": net.node_count, "layers": net.num_layers, "sup_error": err,
                     "argmax": float(at[0]), "claimed": cert.claimed_sup_error, "ok": err <= eps})
    return rows


def size_growth_slope(rows) -> float:
    """Slope of log(nodes) against log(ln(1/eps)); a polynomial of degree p gives about p."""
    x = [math.log(math.log(1.0 / r["eps"])) for r in rows]
    y = [math.log(r["nodes"]) for r in rows]
    return float(np.polyfit(x, y, 1)[0])


def inverse_sweep(eps_list, points: int = 1001) -> list[dict]:
    """Error of ``inverse_normal_cdf_net(eps)`` on its domain minus the exception tails."""
    rows = []
    for eps in eps_list:
        net, cert = inverse_normal_cdf_net(eps)
        z = cert.zeta
        lo, hi = cert.domain
        ys = np.linspace(max(lo, z / 2), min(hi, 1 - z / 2), points)
        err, at = sup_error(net, normal_quantile_ref, ys)
        rows.append({"eps": eps, "t": cert.extra["t"], "nodes": net.node_count, "zeta": z, "sup_error": err,
                     "argmax": float(at[0]), "claimed": cert.claimed_sup_error, "ok": err <= eps})
    return rows


def inverter_check(kind: str, t: int, points: int = 1000, cdf_eps: float = 1e-4) -> dict:
    """Inverter error against ``(b-a)2^-t + eps_f L`` on grid points away from bracket edges.

    ``kind`` is ``identity`` (f(x) = x on [0, 1], exact) or ``normal``
    (``normal_cdf_net(cdf_eps)`` on [-2, 2], L = 1/phi(2)). Points whose exact
    preimage lies within ``1e-6`` bracket widths of a dyadic bracket edge,
    where a gate input can round either way, are excluded.
    """
    if kind == "identity":
        a, b, f_eps, lip = 0.0, 1.0, 0.0, 1.0
        f_net = linear_net([[1.0]])
        f_true, f_inv = (lambda x: x), (lambda y: y)
    elif kind == "normal":
        a, b = -2.0, 2.0
        f_net, cert = normal_cdf_net(cdf_eps)
        f_eps = cert.claimed_sup_error
        lip = 1.0 / float(np.exp(-2.0) / math.sqrt(2 * math.pi))
        f_true, f_inv = normal_cdf_ref, normal_quantile_ref
    else:
        raise InputError(f"unknown inverter test function {kind!r}")
    net, icert = binary_search_inverter(f_net, a, b, t, lip, f_eps)
    xs = np.linspace(a, b, points + 2)[1:-1]
    width = (b - a) * 2.0 ** -t
    keep = np.abs((xs - a) / width - np.round((xs - a) / width)) > 1e-6
    ys = np.asarray(f_true(xs[keep]), dtype=float)
    out = net(ys[:, None]).ravel()
    err = float(np.max(np.abs(out - np.asarray(f_inv(ys), dtype=float))))
    bound = width + f_eps * lip
    return {"kind": kind, "t": t, "points": int(keep.sum()), "max_error": err, "bound": bound,
            "ok": err <= bound}


# ---------------------------------------------------------------- generators


def uniform_normal_check(eps: float = 0.05, grid: int = 100_000) -> dict:
    """Exact W1 of the uniform-to-normal generator plus a direct-evaluation cross-check.

    The cross-check evaluates the network at the midpoints ``u_i`` of a
    uniform grid and averages ``|sorted outputs - Phi^{-1}(u_i)|``, a
    quadrature of the quantile form of W1 that never uses the piecewise form.
    """
    net, cert, cdf = uniform_to_normal_build(eps)
    w_exact = wasserstein_1d(cdf, "normal")
    u = (np.arange(grid) + 0.5) / grid
    out = net(u[:, None]).ravel()
    w_grid = float(np.mean(np.abs(np.sort(out) - normal_quantile_ref(u))))
    A = cert.extra["A"]
    return {"eps": eps, "nodes": net.node_count, "layers": net.num_layers, "w1_exact": w_exact,
            "w1_quantile_grid": w_grid, "delta": cert.extra["delta"], "zeta": cert.zeta,
            "median": float(net([[0.5]])[0, 0]), "range_ok": bool(np.all(np.abs(out) <= A + 1e-9)),
            "pieces": cert.extra["pieces"]}


def box_muller_demo(eps: float = 0.1, samples: int = 2000, seed: int = DEFAULT_SEED,
                    corrupt: bool = False) -> dict:
    """Anchor values and EMD of ``box_muller_net(eps)`` against independent normal samples."""
    net, cert = box_muller_net(eps)
    if corrupt:
        net = perturb(net)
    h = math.exp(-0.5)
    anchors = np.array([[h, 0.0], [h, 0.25], [h, 0.5]])
    want = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    anchor_err = float(np.max(np.abs(net(anchors) - want)))
    pts = sample_pushforward(net, SourceDistribution("uniform_box", 2, seed), samples)
    ref = SourceDistribution("standard_normal", 2, seed + 1).sample(samples)
    emd = empirical_wasserstein(pts, EmpiricalDistribution.uniform(ref))
    return {"eps": eps, "nodes": net.node_count, "layers": net.num_layers, "zeta": cert.zeta,
            "claimed": cert.claimed_sup_error, "anchor_error": anchor_err, "emd": emd,
            "samples": samples, "seed": seed}


def _sum_samples(n: int, count: int, seed: int, chunk: int = 250_000) -> np.ndarray:
    net = sum_of_uniforms_net(n)
    g = SourceDistribution("uniform_box", n, seed).generator()
    out = []
    for start in range(0, count, chunk):
        m = min(chunk, count - start)
        out.append(net(g.random((m, n))).ravel())
    return np.concatenate(out)


def berry_esseen(ns=(4, 16, 64), samples: int = 1_000_000, seed: int = DEFAULT_SEED) -> list[dict]:
    """W1 between the empirical law of the normalised sum of ``n`` uniforms and N(0,1)."""
    rows = []
    for n in ns:
        w = wasserstein_1d(empirical_cdf(_sum_samples(int(n), samples, seed)), "normal")
        rows.append({"n": int(n), "samples": samples, "seed": seed, "w1": w, "C": w * math.sqrt(n)})
    return rows


def pwl_scaling(ns=(2, 4, 8, 16, 32, 64), interval=(-2.0, 2.0)) -> tuple[list[dict], dict]:
    """Best PL L1 error of Phi per piece count, with the fitted power law."""
    rows = []
    for n in ns:
        e = pwl_phi_best_l1(n, interval)
        rows.append({"pieces": n, "l1_error": e, "error_n4": e * n ** 4})
    slope, C = fit_power_law([r["pieces"] for r in rows], [r["l1_error"] for r in rows])
    return rows, {"slope": slope, "C": C, "K_fit": min(r["error_n4"] for r in rows)}
