"""Command-line front end: build networks, run sweeps, evaluate bounds, verify acceptance.

Every command writes into ``--out`` (default ``pushforge-out``) and refuses to
overwrite existing files. Parameters come from flags, then a JSON ``--config``
file, then the documented defaults.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import experiments as ex
from .acceptance import CORRUPTIBLE, CRITERIA, numeric_report, run_all
from .bounds import BoundParams, bound_report, reports_to_csv
from .builders.arithmetic import clamp_net, multiplier_net, power_tower_net
from .builders.gadgets import analytic_gadget, box_muller_net, sum_of_uniforms_net
from .builders.normal import inverse_normal_cdf_net, normal_cdf_net, uniform_to_normal_net
from .builders.tent import space_filling_net, tent_map_net
from .errors import PushforgeError
from .network import dumps, load
from .regions import enumerate_regions
from .svg import line_plot
from .transport.cdf import PiecewiseLinearCdf, pushforward_cdf_1d, wasserstein_1d

DEFAULTS = {
    "sweep-tent": {"N": [12, 20, 36, 68], "L": [2, 3], "n": 1, "d": 2, "samples": 2000, "slack": 0.03},
    "sweep-phi": {"eps": [1e-1, 1e-2, 1e-3, 1e-4]},
    "sweep-inverse": {"eps": [0.1, 0.05, 0.01]},
    "boxmuller-demo": {"eps": 0.1, "samples": 2000},
    "berry-esseen": {"n": [4, 16, 64], "samples": 1_000_000},
    "bounds": {"N": [20], "L": [2], "n": 1, "d": 2},
}


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    """Resolved parameters of one command: flags over config file over defaults."""

    kind: str
    params: dict = field(default_factory=dict)
    seed: int = ex.DEFAULT_SEED
    out: Path = Path("pushforge-out")
    jobs: int = 1

    @classmethod
    def resolve(cls, kind: str, args) -> "ExperimentConfig":
        params = dict(DEFAULTS.get(kind, {}))
        file_cfg = {}
        if args.config:
            try:
                file_cfg = json.loads(Path(args.config).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError(f"cannot read config {args.config}: {exc}") from exc
            if not isinstance(file_cfg, dict):
                raise UsageError("config file must hold a JSON object")
        params.update({k: v for k, v in file_cfg.items() if k not in ("seed", "out", "jobs")})
        for key in list(params):
            flag = getattr(args, f"p_{key}", None)
            if flag is not None:
                params[key] = flag
        for key, value in params.items():
            if isinstance(value, list) and not value:
                raise UsageError(f"parameter grid {key!r} is empty")
        seed = args.seed if args.seed is not None else int(file_cfg.get("seed", ex.DEFAULT_SEED))
        if not (0 <= seed < 2 ** 64):
            raise UsageError("seed must be an unsigned 64-bit integer")
        out = Path(args.out if args.out is not None else file_cfg.get("out", "pushforge-out"))
        jobs = args.jobs if args.jobs is not None else int(file_cfg.get("jobs", 1))
        return cls(kind, params, seed, out, max(1, jobs))


# ---------------------------------------------------------------- output helpers


def _write_once(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(path, "x") as fh:
            fh.write(text)
    except FileExistsError as exc:
        raise UsageError(f"refusing to overwrite {path}") from exc
    return path


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return json.dumps(v)
    return v


def _csv_text(rows: list[dict], comment: str) -> str:
    cols = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    buf = io.StringIO()
    buf.write(f"# {comment}\n")
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: _fmt(r.get(k, "")) for k in cols})
    return buf.getvalue()


def _comment(cfg: ExperimentConfig) -> str:
    return f"seed={cfg.seed} params={json.dumps(cfg.params, sort_keys=True)}"


def _report(paths, summary: dict | None = None) -> None:
    if summary is not None:
        print(json.dumps(summary, sort_keys=True))
    for p in paths:
        print(f"wrote {p}")


# ---------------------------------------------------------------- build


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"build {args.kind} needs --{' --'.join(m.replace('_', '-') for m in missing)}")
    return [getattr(args, n) for n in names]


def _build(args):
    kind = args.kind
    cert = None
    if kind == "tent":
        (k,) = _need(args, "k")
        net = tent_map_net(k)
        cert = {"pieces": k}
    elif kind == "clamp":
        lo, hi = _need(args, "lo", "hi")
        net = clamp_net(lo, hi)
    elif kind == "space-filling":
        n, d, N, L = _need(args, "n", "d", "nodes", "layers")
        net, plan = space_filling_net(n, d, N, L)
        cert = plan.as_dict()
        cert["coupling_bound"] = plan.coupling_bound
    elif kind == "multiplier":
        M, eps = _need(args, "M", "eps")
        net = multiplier_net(M, eps)
        cert = {"target_eps": eps, "domain": [[-M, M], [-M, M]]}
    elif kind == "power-tower":
        n, M, eps = _need(args, "n", "M", "eps")
        net = power_tower_net(n, M, eps)
        cert = {"target_eps": eps, "domain": [-M, M]}
    elif kind in ("normal-cdf", "inverse-normal", "uniform-normal", "box-muller"):
        (eps,) = _need(args, "eps")
        fn = {"normal-cdf": normal_cdf_net, "inverse-normal": inverse_normal_cdf_net,
              "uniform-normal": uniform_to_normal_net, "box-muller": box_muller_net}[kind]
        net, c = fn(eps)
        cert = c.as_dict()
    elif kind == "gadget":
        fn_kind, lo, hi, eps = _need(args, "function", "lo", "hi", "eps")
        net, c = analytic_gadget(fn_kind, [lo, hi], eps, alpha=args.alpha)
        cert = c.as_dict()
    elif kind == "sum-uniforms":
        (n,) = _need(args, "n")
        net = sum_of_uniforms_net(n)
    else:
        raise UsageError(f"unknown build kind {kind!r}")
    cfg = ExperimentConfig.resolve("build", args)
    info = {"nodes": net.node_count, "layers": net.num_layers, "flavor": net.flavor.value}
    path = _write_once(cfg.out / f"{kind}.json", dumps(net, certificate=cert, summary=info) + "\n")
    _report([path], {"kind": kind, **info, "certificate": cert})


# ---------------------------------------------------------------- single-net commands


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _eval(args):
    net = load(args.network)
    x = np.array([_parse_floats(p) for p in args.x])
    y = net(x)
    print(json.dumps({"inputs": x.tolist(), "outputs": y.tolist()}))


def _regions(args):
    net = load(args.network)
    lo, hi = _parse_floats(args.lo), _parse_floats(args.hi)
    regs = enumerate_regions(net, lo, hi, method=args.method)
    cfg = ExperimentConfig.resolve("regions", args)
    rows = [{"index": i, "witness": r.witness.tolist(), "measure": r.measure,
             "constraints": len(r.b)} for i, r in enumerate(regs)]
    path = _write_once(cfg.out / "regions.csv", _csv_text(rows, f"seed={cfg.seed} lo={lo} hi={hi} method={args.method}"))
    _report([path], {"regions": len(regs)})


def _cdf(args):
    net = load(args.network)
    F = pushforward_cdf_1d(net, args.a, args.b)
    cfg = ExperimentConfig.resolve("cdf", args)
    rows = [{"breakpoint": x, "value": v} for x, v in F.to_rows()]
    path = _write_once(cfg.out / "cdf.csv", _csv_text(rows, f"seed={cfg.seed} source=U[{args.a},{args.b}]"))
    _report([path], {"breakpoints": len(rows), "mean": F.mean()})


def _read_cdf(path: str) -> PiecewiseLinearCdf:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    try:
        return PiecewiseLinearCdf([float(r["breakpoint"]) for r in rows], [float(r["value"]) for r in rows])
    except (KeyError, ValueError) as exc:
        raise UsageError(f"{path} is not a breakpoint,value CSV") from exc


def _wasserstein(args):
    F = _read_cdf(args.first)
    G = "normal" if args.second == "normal" else _read_cdf(args.second)
    print(json.dumps({"w1": wasserstein_1d(F, G)}))


# ---------------------------------------------------------------- sweeps


def _sweep_tent(args):
    cfg = ExperimentConfig.resolve("sweep-tent", args)
    p = cfg.params
    rows = ex.space_filling_sandwich(p["N"], p["L"], p["n"], p["d"], p["samples"], cfg.seed,
                                     p["slack"], jobs=cfg.jobs)
    csv_path = _write_once(cfg.out / "sweep_tent.csv", _csv_text(rows, _comment(cfg)))
    paths = [csv_path]
    ok = [r for r in rows if r["status"] == "ok"]
    for L in p["L"]:
        sel = [r for r in ok if r["L"] == L]
        if not sel:
            continue
        xs = [r["N"] for r in sel]
        svg = line_plot({"measured EMD": (xs, [r["emd"] for r in sel]),
                         "tent upper bound": (xs, [r["tent_upper"] for r in sel]),
                         "network lower bound": (xs, [r["net_lower"] for r in sel])},
                        title=f"space-filling nets, L={L}", xlabel="N", ylabel="W")
        paths.append(_write_once(cfg.out / f"sweep_tent_L{L}.svg", svg))
    failed = [r for r in ok if not r["sandwich"]]
    _report(paths, {"rows": len(rows), "sandwich_failures": len(failed)})
    return 1 if failed else 0


def _sweep_phi(args):
    cfg = ExperimentConfig.resolve("sweep-phi", args)
    rows = ex.phi_sweep(cfg.params["eps"])
    paths = [_write_once(cfg.out / "sweep_phi.csv", _csv_text(rows, _comment(cfg)))]
    xs = [math.log(1 / r["eps"]) for r in rows]
    paths.append(_write_once(cfg.out / "sweep_phi.svg", line_plot(
        {"nodes": (xs, [r["nodes"] for r in rows])}, title="normal CDF network size",
        xlabel="ln(1/eps)", ylabel="nodes")))
    _report(paths, {"log_log_slope": ex.size_growth_slope(rows) if len(rows) > 1 else None,
                    "all_within_eps": all(r["ok"] for r in rows)})
    return 0 if all(r["ok"] for r in rows) else 1


def _sweep_inverse(args):
    cfg = ExperimentConfig.resolve("sweep-inverse", args)
    rows = ex.inverse_sweep(cfg.params["eps"])
    path = _write_once(cfg.out / "sweep_inverse.csv", _csv_text(rows, _comment(cfg)))
    _report([path], {"all_within_eps": all(r["ok"] for r in rows)})
    return 0 if all(r["ok"] for r in rows) else 1


def _boxmuller(args):
    cfg = ExperimentConfig.resolve("boxmuller-demo", args)
    r = ex.box_muller_demo(cfg.params["eps"], cfg.params["samples"], cfg.seed)
    path = _write_once(cfg.out / "boxmuller.csv", _csv_text([r], _comment(cfg)))
    _report([path], r)


def _berry(args):
    cfg = ExperimentConfig.resolve("berry-esseen", args)
    rows = ex.berry_esseen(cfg.params["n"], cfg.params["samples"], cfg.seed)
    paths = [_write_once(cfg.out / "berry_esseen.csv", _csv_text(rows, _comment(cfg)))]
    ns = [r["n"] for r in rows]
    paths.append(_write_once(cfg.out / "berry_esseen.svg", line_plot(
        {"W1": (ns, [r["w1"] for r in rows]), "C/sqrt(n) fit": (ns, [rows[0]["C"] / math.sqrt(n) for n in ns])},
        title="sum of uniforms vs normal", xlabel="n", ylabel="W1")))
    _report(paths, {"C": [r["C"] for r in rows]})


def _bounds(args):
    cfg = ExperimentConfig.resolve("bounds", args)
    p = cfg.params
    reports = []
    for N in p["N"]:
        for L in p["L"]:
            reports.append(bound_report(BoundParams(int(N), int(L), int(p["n"]), int(p["d"]),
                                                    p.get("l"), p.get("m_B", 1.0), p.get("N_A"))))
    text = reports_to_csv(reports)
    path = _write_once(cfg.out / "bounds.csv", f"# {_comment(cfg)}\n{text}")
    _report([path], reports[0].as_row() if len(reports) == 1 else {"rows": len(reports)})


def _verify(args):
    cfg = ExperimentConfig.resolve("verify", args)
    corrupt = args.corrupt or []
    results = run_all(corrupt, reproducibility=not args.no_repeat, only=args.only)
    for r in results:
        print(r.line())
    summary = numeric_report(results)
    path = _write_once(cfg.out / "verify.json", summary + "\n")
    failed = [r.number for r in results if not r.passed]
    print(json.dumps({"passed": len(results) - len(failed), "failed": failed}))
    print(f"wrote {path}")
    return 1 if failed else 0


# ---------------------------------------------------------------- parser


def _grid(cast):
    def parse(text):
        try:
            vals = [cast(v) for v in text.split(",") if v.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad list {text!r}") from exc
        if not vals:
            raise argparse.ArgumentTypeError("empty grid")
        return vals
    return parse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with parameters (flags take precedence)")
    common.add_argument("--seed", type=int, help=f"unsigned 64-bit seed (default {ex.DEFAULT_SEED})")
    common.add_argument("--out", help="output directory (default pushforge-out)")
    common.add_argument("--jobs", type=int, help="parallel grid points (default 1)")

    parser = argparse.ArgumentParser(prog="pushforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", parents=[common], help="build a network and write it with its certificate")
    b.add_argument("kind", choices=["tent", "clamp", "space-filling", "multiplier", "power-tower", "normal-cdf",
                                    "inverse-normal", "uniform-normal", "gadget", "box-muller", "sum-uniforms"])
    b.add_argument("--k", type=int)
    b.add_argument("--lo", type=float)
    b.add_argument("--hi", type=float)
    b.add_argument("--n", type=int)
    b.add_argument("--d", type=int)
    b.add_argument("--nodes", type=int)
    b.add_argument("--layers", type=int)
    b.add_argument("--M", type=float)
    b.add_argument("--eps", type=float)
    b.add_argument("--function", help="gadget function: exp, ln, cos, sin or pow")
    b.add_argument("--alpha", type=float, help="exponent for pow")
    b.set_defaults(func=_build)

    e = sub.add_parser("eval", parents=[common], help="evaluate a network file")
    e.add_argument("network")
    e.add_argument("--x", action="append", required=True, help="comma-separated input point (repeatable)")
    e.set_defaults(func=_eval)

    r = sub.add_parser("regions", parents=[common], help="enumerate linear regions on a box")
    r.add_argument("network")
    r.add_argument("--lo", required=True, help="comma-separated lower corner")
    r.add_argument("--hi", required=True, help="comma-separated upper corner")
    r.add_argument("--method", default="auto", choices=["auto", "interval", "polygon", "lp"])
    r.set_defaults(func=_regions)

    c = sub.add_parser("cdf", parents=[common], help="exact pushforward CDF of U[a,b] through a 1-D net")
    c.add_argument("network")
    c.add_argument("--a", type=float, default=0.0)
    c.add_argument("--b", type=float, default=1.0)
    c.set_defaults(func=_cdf)

    w = sub.add_parser("wasserstein", parents=[common], help="W1 between two CDF files or a CDF and N(0,1)")
    w.add_argument("first")
    w.add_argument("second", help="CDF CSV file or the word 'normal'")
    w.set_defaults(func=_wasserstein)

    s = sub.add_parser("sweep-tent", parents=[common], help="space-filling sandwich sweep (CSV + SVG)")
    s.add_argument("--N", dest="p_N", metavar="N", type=_grid(int), help="node counts, default 12,20,36,68")
    s.add_argument("--L", dest="p_L", metavar="L", type=_grid(int), help="hidden layer counts, default 2,3")
    s.add_argument("--n", dest="p_n", metavar="N", type=int, help="input dimension, default 1")
    s.add_argument("--d", dest="p_d", metavar="D", type=int, help="output dimension, default 2")
    s.add_argument("--samples", dest="p_samples", metavar="SAMPLES", type=int, help="EMD sample count, default 2000")
    s.add_argument("--slack", dest="p_slack", metavar="SLACK", type=float, help="sampling slack, default 0.03")
    s.set_defaults(func=_sweep_tent)

    s = sub.add_parser("sweep-phi", parents=[common], help="normal CDF network accuracy and size")
    s.add_argument("--eps", dest="p_eps", metavar="EPS", type=_grid(float), help="default 1e-1,1e-2,1e-3,1e-4")
    s.set_defaults(func=_sweep_phi)

    s = sub.add_parser("sweep-inverse", parents=[common], help="inverse normal CDF network accuracy")
    s.add_argument("--eps", dest="p_eps", metavar="EPS", type=_grid(float), help="default 0.1,0.05,0.01")
    s.set_defaults(func=_sweep_inverse)

    s = sub.add_parser("boxmuller-demo", parents=[common], help="Box-Muller network anchors and EMD")
    s.add_argument("--eps", dest="p_eps", metavar="EPS", type=float, help="default 0.1")
    s.add_argument("--samples", dest="p_samples", metavar="SAMPLES", type=int, help="default 2000")
    s.set_defaults(func=_boxmuller)

    s = sub.add_parser("berry-esseen", parents=[common], help="sum-of-uniforms W1 against N(0,1)")
    s.add_argument("--n", dest="p_n", metavar="N", type=_grid(int), help="default 4,16,64")
    s.add_argument("--samples", dest="p_samples", metavar="SAMPLES", type=int, help="default 1000000")
    s.set_defaults(func=_berry)

    s = sub.add_parser("bounds", parents=[common], help="evaluate every closed-form bound")
    s.add_argument("--N", dest="p_N", metavar="N", type=_grid(int), help="default 20")
    s.add_argument("--L", dest="p_L", metavar="L", type=_grid(int), help="default 2")
    s.add_argument("--n", dest="p_n", metavar="N", type=int, help="default 1")
    s.add_argument("--d", dest="p_d", metavar="D", type=int, help="default 2")
    s.add_argument("--l", dest="p_l", metavar="L", type=float, help="enclosing radius, default sqrt(d)/2")
    s.add_argument("--mB", dest="p_m_B", metavar="M_B", type=float, help="target measure, default 1")
    s.add_argument("--NA", dest="p_N_A", metavar="N_A", type=float, help="piece count, default the affine-piece bound")
    s.set_defaults(func=_bounds)

    v = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    v.add_argument("--corrupt", action="append", choices=CORRUPTIBLE,
                   help="perturb one weight of this builder's network (fault injection)")
    v.add_argument("--no-repeat", action="store_true", help="skip the second run of the reproducibility check")
    v.add_argument("--only", type=_grid(int), metavar="LIST",
                   help=f"comma-separated criterion numbers (default all {len(CRITERIA)})")
    v.set_defaults(func=_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except (UsageError, PushforgeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return int(code or 0)


if __name__ == "__main__":
    sys.exit(main())
