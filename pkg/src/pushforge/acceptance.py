"""Acceptance suite: every criterion measured, compared with its threshold, and timed."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

from . import experiments as ex

CORRUPTIBLE = ("tent", "space-filling", "phi", "box-muller")


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: dict
    threshold: dict
    seconds: float = 0.0
    time_limit: float = math.inf
    values_ok: bool = field(default=True, repr=False)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        meas = json.dumps(self.measured, sort_keys=True)
        thr = json.dumps(self.threshold, sort_keys=True)
        return (f"[{tag}] {self.number:2d} {self.name}: measured {meas} threshold {thr} "
                f"({self.seconds:.2f} s of {self.time_limit:g} s)")

    def numeric(self) -> dict:
        """Deterministic part of the result (no timings)."""
        return {"number": self.number, "name": self.name, "values_ok": self.values_ok,
                "measured": self.measured, "threshold": self.threshold}


def _timed(fn, number, name, limit, corrupt):
    t0 = time.perf_counter()
    ok, measured, threshold = fn(corrupt)
    dt = time.perf_counter() - t0
    return CriterionResult(number, name, bool(ok and dt < limit), measured, threshold, dt, limit,
                           values_ok=bool(ok))


def _tent(corrupt):
    rows = ex.tent_exactness(range(1, 17), 10_000, corrupt="tent" in corrupt)
    worst = max(r["max_error"] for r in rows)
    bp = all(r["breakpoints_exact"] for r in rows)
    return worst <= 1e-12 and bp, {"max_error": worst, "breakpoints_exact": bp}, {"max_error": 1e-12}


def _sandwich(corrupt):
    rows = ex.space_filling_sandwich([12, 20, 36, 68], [2, 3], samples=2000, seed=ex.DEFAULT_SEED,
                                     slack=0.03, corrupt="space-filling" in corrupt)
    measured = {f"N{r['N']}_L{r['L']}": {"k": r.get("k"), "box": r.get("box_check"), "emd": r.get("emd"),
                                         "upper": r.get("coupling_bound"), "lower": r.get("net_lower")}
                for r in rows}
    ok = all(r.get("status") == "ok" and r["sandwich"] for r in rows)
    return ok, measured, {"upper": "sqrt(2)/k + 0.03", "lower": "network_lower_bound"}


def _regions(corrupt):
    rows = ex.region_counts(200, ex.DEFAULT_SEED)
    comp = ex.tent_composition_counts(256)
    worst = max(r["regions"] / r["bound"] for r in rows)
    ok = all(r["ok"] for r in rows) and all(r["ok"] for r in comp)
    return ok, {"max_regions_over_bound": worst, "nets": len(rows),
                "compositions_exact": sum(r["ok"] for r in comp), "compositions": len(comp)}, \
        {"max_regions_over_bound": 1.0}


PHI_MAX_DEGREE = 4.0


def _phi(corrupt):
    rows = ex.phi_sweep([1e-1, 1e-2, 1e-3], corrupt="phi" in corrupt)
    slope = ex.size_growth_slope(rows)
    ok = all(r["ok"] for r in rows) and slope <= PHI_MAX_DEGREE
    meas = {f"eps{r['eps']:g}": {"sup_error": r["sup_error"], "nodes": r["nodes"]} for r in rows}
    meas["log_log_slope"] = slope
    return ok, meas, {"sup_error": "<= eps", "log_log_slope": PHI_MAX_DEGREE}


def _uniform_normal(corrupt):
    r = ex.uniform_normal_check(0.05)
    # the direct-evaluation quadrature must agree with the exact value
    agree = abs(r["w1_exact"] - r["w1_quantile_grid"]) <= 1e-3
    ok = r["w1_exact"] <= 0.05 and agree and r["range_ok"]
    keys = ("w1_exact", "w1_quantile_grid", "median", "delta", "zeta", "nodes", "pieces")
    return ok, {k: r[k] for k in keys}, {"w1_exact": 0.05, "route_agreement": 1e-3}


def _inverter(corrupt):
    rows = [ex.inverter_check(kind, t) for kind in ("identity", "normal") for t in (4, 8, 12)]
    meas = {f"{r['kind']}_t{r['t']}": {"max_error": r["max_error"], "bound": r["bound"]} for r in rows}
    return all(r["ok"] for r in rows), meas, {"max_error": "(b-a)2^-t + eps L"}


def _box_muller(corrupt):
    r = ex.box_muller_demo(0.1, 2000, ex.DEFAULT_SEED, corrupt="box-muller" in corrupt)
    ok = r["anchor_error"] <= 0.1 and r["emd"] <= 0.15
    return ok, {k: r[k] for k in ("anchor_error", "emd", "zeta", "nodes")}, {"anchor_error": 0.1, "emd": 0.15}


def _berry_esseen(corrupt):
    rows = ex.berry_esseen((4, 16, 64), 1_000_000, ex.DEFAULT_SEED)
    ws = [r["w1"] for r in rows]
    cs = [r["C"] for r in rows]
    decreasing = all(a > b for a, b in zip(ws, ws[1:]))
    ratio = max(cs) / min(cs)
    meas = {f"n{r['n']}": {"w1": r["w1"], "C": r["C"]} for r in rows}
    meas.update({"decreasing": decreasing, "C_ratio": ratio})
    return decreasing and ratio <= 2.0, meas, {"C_ratio": 2.0}


def _pwl(corrupt):
    rows, fit = ex.pwl_scaling((2, 4, 8, 16, 32, 64), (-2.0, 2.0))
    ok = fit["K_fit"] > 0 and fit["slope"] <= -2.0
    meas = {f"n{r['pieces']}": r["l1_error"] for r in rows}
    meas.update({"slope": fit["slope"], "K_fit": fit["K_fit"]})
    return ok, meas, {"slope": -2.0, "K_fit": "> 0"}


CRITERIA = [
    (1, "tent-map exactness", 1.0, _tent),
    (2, "space-filling sandwich", 120.0, _sandwich),
    (3, "region-count bound", 120.0, _regions),
    (4, "normal CDF network", 30.0, _phi),
    (5, "uniform to normal", 60.0, _uniform_normal),
    (6, "binary-search inverter", 60.0, _inverter),
    (7, "Box-Muller", 60.0, _box_muller),
    (8, "Berry-Esseen rate", 60.0, _berry_esseen),
    (9, "PL fit scaling", 120.0, _pwl),
]


def run_criterion(number: int, corrupt=()) -> CriterionResult:
    for num, name, limit, fn in CRITERIA:
        if num == number:
            return _timed(fn, num, name, limit, set(corrupt))
    raise KeyError(f"no criterion {number}")


def run_suite(corrupt=(), only=None) -> list[CriterionResult]:
    return [run_criterion(num, corrupt) for num, *_ in CRITERIA if only is None or num in only]


def numeric_report(results) -> str:
    """Canonical JSON of the deterministic part of ``results``."""
    return json.dumps([r.numeric() for r in results], sort_keys=True, indent=1)


def run_all(corrupt=(), reproducibility: bool = True, total_limit: float = 600.0,
            only=None) -> list[CriterionResult]:
    """Criteria 1-9 (or ``only``), then criterion 10 by repeating them and comparing numeric output."""
    t0 = time.perf_counter()
    first = run_suite(corrupt, only)
    results = list(first)
    if reproducibility:
        second = run_suite(corrupt, only)
        same = numeric_report(first) == numeric_report(second)
        dt = time.perf_counter() - t0
        results.append(CriterionResult(10, "reproducibility", same and dt < total_limit,
                                       {"identical": same},
                                       {"identical": True}, dt, total_limit, values_ok=same))
    return results
