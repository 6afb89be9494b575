"""Closed-form Wasserstein upper and lower bounds for generative ReLU networks."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

from .errors import InputError


def _check_int(name: str, v, low: int = 1) -> int:
    if int(v) != v or v < low:
        raise InputError(f"{name} must be an integer >= {low}, got {v!r}")
    return int(v)


def _check_dims(n, d, strict: bool = False) -> tuple[int, int]:
    n, d = _check_int("n", n), _check_int("d", d)
    if n > d or (strict and n == d):
        raise InputError(f"need 1 <= n {'<' if strict else '<='} d, got n={n}, d={d}")
    return n, d


def tent_upper_bound(N: int, L: int, n: int, d: int) -> float:
    """``sqrt(d) * floor((N - dL)/(nL)) ** -floor(L / ceil((d-n)/n))``; 0 when ``n = d``.

    Returns ``inf`` when the floored base is 0 (too few nodes for a nontrivial bound).
    """
    N, L = _check_int("N", N), _check_int("L", L)
    n, d = _check_dims(n, d)
    if N <= d * L:
        raise InputError(f"need N > dL, got N={N}, dL={d * L}")
    if n == d:
        return 0.0
    base = (N - d * L) // (n * L)
    expo = L // -(-(d - n) // n)
    if base == 0:
        return math.inf if expo > 0 else math.sqrt(d)
    return math.sqrt(d) * float(base) ** (-expo)


def tent_upper_bound_appendix(N: int, L: int, n: int, d: int) -> float:
    """``sqrt(d) * floor(((d-n)/n) (N - dL + d)/(dL)) ** -floor(nL/d)``, the simplified form."""
    N, L = _check_int("N", N), _check_int("L", L)
    n, d = _check_dims(n, d)
    if N <= d * L:
        raise InputError(f"need N > dL, got N={N}, dL={d * L}")
    if n == d:
        return 0.0
    base = math.floor((d - n) * (N - d * L + d) / (n * d * L))
    expo = (n * L) // d
    if base == 0:
        return math.inf if expo > 0 else math.sqrt(d)
    return math.sqrt(d) * float(base) ** (-expo)


def affine_piece_bound(N: int, L: int, n0: int) -> float:
    """``(e N/(n0 L) + e) ** (n0 L)`` affine pieces; 1 for ``L = 0`` (a single affine map)."""
    N, n0 = _check_int("N", N), _check_int("n0", n0)
    L = _check_int("L", L, low=0)
    if L == 0:
        return 1.0
    return (math.e * N / (n0 * L) + math.e) ** (n0 * L)


def plane_distance_bound(n: int, d: int, l: float, m_B: float) -> float:
    """Lower bound on ``W(U_B, any law on an n-plane)`` for ``B`` inside a radius-``l`` ball.

    ``((d-n)/(d-n+1)) (Gamma((d-n)/2+1) Gamma(n/2+1) / pi^(d/2) l^-n m_B)^(1/(d-n))``.
    Gamma is ``math.gamma`` (correctly rounded to within a few ulp).
    """
    n, d = _check_dims(n, d, strict=True)
    if not (l > 0 and m_B > 0 and math.isfinite(l) and math.isfinite(m_B)):
        raise InputError(f"l and m_B must be positive and finite, got {l}, {m_B}")
    k = d - n
    inner = math.gamma(k / 2 + 1) * math.gamma(n / 2 + 1) / math.pi ** (d / 2) * l ** (-n) * m_B
    return k / (k + 1) * inner ** (1.0 / k)


def dimension_gap_bound(n: int, d: int, l: float, m_B: float, N_A: float) -> float:
    """:func:`plane_distance_bound` with ``m_B`` replaced by ``m_B / N_A``."""
    if not (N_A >= 1 and math.isfinite(N_A)):
        raise InputError(f"N_A must be >= 1, got {N_A}")
    return plane_distance_bound(n, d, l, m_B / N_A)


def network_lower_bound(N: int, L: int, n: int, d: int) -> float:
    """Lower bound for any ``N``-node, ``L``-layer net from ``[0,1]^n`` to ``U([0,1]^d)``.

    Uses ``l = sqrt(d)/2`` (circumradius of the unit cube), ``m_B = 1`` and
    ``N_A = affine_piece_bound(N, L, n)``.
    """
    n, d = _check_dims(n, d, strict=True)
    return dimension_gap_bound(n, d, math.sqrt(d) / 2, 1.0, affine_piece_bound(N, L, n))


@dataclass(frozen=True)
class BoundParams:
    N: int
    L: int
    n: int
    d: int
    l: float | None = None
    m_B: float = 1.0
    N_A: float | None = None

    def __post_init__(self):
        _check_int("N", self.N)
        _check_int("L", self.L)
        _check_dims(self.n, self.d)
        if self.l is not None and not self.l > 0:
            raise InputError("l must be positive")
        if not self.m_B > 0:
            raise InputError("m_B must be positive")
        if self.N_A is not None and not self.N_A >= 1:
            raise InputError("N_A must be >= 1")

    @property
    def radius(self) -> float:
        return math.sqrt(self.d) / 2 if self.l is None else float(self.l)

    @property
    def pieces(self) -> float:
        return affine_piece_bound(self.N, self.L, self.n) if self.N_A is None else float(self.N_A)


@dataclass(frozen=True)
class BoundReport:
    params: BoundParams
    tent_upper: float
    tent_upper_appendix: float
    piece_bound: float
    plane_lower: float
    gap_lower: float
    net_lower: float

    def as_row(self) -> dict:
        row = {k: v for k, v in asdict(self.params).items()}
        row.update({k: getattr(self, k) for k in ("tent_upper", "tent_upper_appendix", "piece_bound",
                                                  "plane_lower", "gap_lower", "net_lower")})
        return row

    def to_json(self) -> str:
        return json.dumps(self.as_row(), sort_keys=True)


def bound_report(params: BoundParams) -> BoundReport:
    """Evaluate every bound on ``params``; lower bounds are ``nan`` when ``n = d``."""
    p = params
    feasible = p.N > p.d * p.L
    up = tent_upper_bound(p.N, p.L, p.n, p.d) if feasible else math.nan
    up2 = tent_upper_bound_appendix(p.N, p.L, p.n, p.d) if feasible else math.nan
    pieces = affine_piece_bound(p.N, p.L, p.n)
    if p.n < p.d:
        plane = plane_distance_bound(p.n, p.d, p.radius, p.m_B)
        gap = dimension_gap_bound(p.n, p.d, p.radius, p.m_B, p.pieces)
        net = network_lower_bound(p.N, p.L, p.n, p.d)
    else:
        plane = gap = net = math.nan
    return BoundReport(p, up, up2, pieces, plane, gap, net)


def reports_to_csv(reports) -> str:
    """CSV text (header plus one row per report)."""
    rows = [r.as_row() for r in reports]
    if not rows:
        raise InputError("no reports to write")
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()
