import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pushforge import InputError
from pushforge.bounds import (BoundParams, affine_piece_bound, bound_report, dimension_gap_bound,
                              network_lower_bound, plane_distance_bound, reports_to_csv, tent_upper_bound,
                              tent_upper_bound_appendix)


def test_tent_upper_examples():
    assert tent_upper_bound(20, 2, 1, 2) == pytest.approx(math.sqrt(2) / 64, rel=1e-15)
    assert tent_upper_bound(20, 2, 2, 2) == 0.0
    assert tent_upper_bound_appendix(20, 2, 2, 2) == 0.0
    with pytest.raises(InputError):
        tent_upper_bound(4, 2, 1, 2)


def test_tent_upper_monotone_in_N():
    for L in (1, 2, 3):
        vals = [tent_upper_bound(N, L, 1, 2) for N in range(2 * L + L, 200)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_simplified_form():
    # floor(((d-n)/n)(N-dL+d)/(dL))^-floor(nL/d) for N=20, L=2, n=1, d=2: floor(18/4)=4, exponent 1
    assert tent_upper_bound_appendix(20, 2, 1, 2) == pytest.approx(math.sqrt(2) / 4)


def test_affine_piece_bound():
    assert affine_piece_bound(8, 2, 1) == pytest.approx((5 * math.e) ** 2)
    assert affine_piece_bound(8, 2, 1) == pytest.approx(184.726, abs=1e-3)
    assert affine_piece_bound(5, 0, 1) == 1.0


def test_plane_distance_examples():
    l = math.sqrt(2) / 2
    assert plane_distance_bound(1, 2, l, 1.0) == pytest.approx(0.5 * 0.25 * math.sqrt(2), rel=1e-14)
    assert plane_distance_bound(1, 2, l, 2.0) == pytest.approx(2 * plane_distance_bound(1, 2, l, 1.0))
    with pytest.raises(InputError):
        plane_distance_bound(2, 2, 1.0, 1.0)
    with pytest.raises(InputError):
        plane_distance_bound(1, 2, -1.0, 1.0)


def test_plane_bound_below_brute_force_disk():
    # B = unit disk, S = x-axis: mean distance to the axis is 4/(3 pi)
    rng = np.random.Generator(np.random.Philox(key=3))
    pts = rng.uniform(-1, 1, size=(1_000_000, 2))
    pts = pts[(pts ** 2).sum(axis=1) <= 1]
    brute = np.abs(pts[:, 1]).mean()
    assert brute == pytest.approx(4 / (3 * math.pi), rel=5e-3)
    assert plane_distance_bound(1, 2, 1.0, math.pi) <= brute


@given(st.floats(0, 2 * math.pi), st.floats(-3, 3), st.floats(-3, 3))
def test_plane_bound_invariant_under_rigid_motion(theta, tx, ty):
    # brute-force distance from a rotated/translated disk to the equally moved line
    rng = np.random.Generator(np.random.Philox(key=9))
    pts = rng.uniform(-1, 1, size=(20_000, 2))
    pts = pts[(pts ** 2).sum(axis=1) <= 1]
    R = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    moved = pts @ R.T + [tx, ty]
    normal = R @ [0.0, 1.0]
    dist = np.abs((moved - [tx, ty]) @ normal).mean()
    assert dist == pytest.approx(np.abs(pts[:, 1]).mean(), rel=1e-9)
    assert plane_distance_bound(1, 2, 1.0, math.pi) <= dist


def test_dimension_gap():
    l = math.sqrt(2) / 2
    assert dimension_gap_bound(1, 2, l, 1.0, 1) == plane_distance_bound(1, 2, l, 1.0)
    assert dimension_gap_bound(1, 2, l, 1.0, 100) == pytest.approx(0.0017678, abs=1e-7)
    vals = [dimension_gap_bound(1, 3, 1.0, 1.0, na) for na in (1, 10, 100, 1000)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(InputError):
        dimension_gap_bound(1, 2, l, 1.0, 0.5)


def test_network_lower_bound():
    vals = [network_lower_bound(N, 2, 1, 2) for N in (12, 20, 36, 68)]
    assert all(v > 0 for v in vals)
    assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(InputError):
        network_lower_bound(20, 2, 2, 2)


@given(st.integers(1, 200), st.integers(1, 6), st.integers(1, 3), st.integers(0, 3))
def test_lower_bound_below_upper(N, L, n, extra):
    d = n + 1 + extra
    if N <= d * L:
        return
    up = tent_upper_bound(N, L, n, d)
    assert network_lower_bound(N, L, n, d) <= up


@given(st.integers(3, 300), st.integers(1, 5))
def test_bounds_are_deterministic(N, L):
    if N <= 2 * L:
        return
    assert tent_upper_bound(N, L, 1, 2) == tent_upper_bound(N, L, 1, 2)
    assert network_lower_bound(N, L, 1, 2) == network_lower_bound(N, L, 1, 2)


def test_gamma_half_integers():
    # Gamma(1/2) = sqrt(pi), Gamma(n+1) = n!
    assert math.gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    for n in range(1, 15):
        assert math.gamma(n + 1) == pytest.approx(math.factorial(n), rel=1e-14)
    assert math.gamma(1.5) ** 2 / math.pi == pytest.approx(0.25, rel=1e-15)


def test_bound_report_and_csv():
    rep = bound_report(BoundParams(20, 2, 1, 2))
    assert rep.tent_upper == pytest.approx(0.0220971, abs=1e-7)
    assert rep.net_lower <= rep.tent_upper
    assert rep.plane_lower == pytest.approx(0.1767767, abs=1e-7)
    text = reports_to_csv([rep, bound_report(BoundParams(36, 3, 1, 2))])
    lines = text.strip().splitlines()
    assert lines[0].startswith("N,L,n,d") and len(lines) == 3
    assert '"tent_upper"' in rep.to_json()
    with pytest.raises(InputError):
        BoundParams(20, 2, 3, 2)
    same = bound_report(BoundParams(2, 2, 2, 2))
    assert math.isnan(same.net_lower)
