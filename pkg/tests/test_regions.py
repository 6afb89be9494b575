import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pushforge import AffineLayer, Network, RegionBudgetError, breakpoints_1d, compose, enumerate_regions
from pushforge.bounds import affine_piece_bound
from pushforge.builders import tent_map_net
from pushforge.network import linear_net


def quadrant_net():
    return Network([AffineLayer(np.eye(2), np.zeros(2), "relu"), AffineLayer(np.eye(2), np.zeros(2), "identity")])


def random_relu_net(rng, n0, hidden):
    widths = [n0] + hidden + [1]
    layers = [AffineLayer(rng.normal(size=(o, i)), rng.normal(size=o), "relu")
              for i, o in zip(widths[:-2], widths[1:-1])]
    layers.append(AffineLayer(rng.normal(size=(1, widths[-2])), rng.normal(size=1), "identity"))
    return Network(layers)


def test_tent_regions_and_breakpoints():
    regs = enumerate_regions(tent_map_net(4), [0.0], [1.0])
    assert len(regs) == 4
    np.testing.assert_allclose(breakpoints_1d(tent_map_net(2), 0.0, 1.0), [0, 0.5, 1], atol=1e-12)
    t4 = compose(tent_map_net(2), tent_map_net(2))
    np.testing.assert_allclose(breakpoints_1d(t4, 0.0, 1.0), [0, 0.25, 0.5, 0.75, 1], atol=1e-12)


def test_affine_net_single_region():
    net = linear_net([[2.0, -1.0]], [0.5])
    assert len(enumerate_regions(net, [-1, -1], [1, 1])) == 1
    np.testing.assert_allclose(breakpoints_1d(linear_net([[3.0]]), -2.0, 5.0), [-2.0, 5.0])


def test_quadrants():
    regs = enumerate_regions(quadrant_net(), [-1, -1], [1, 1])
    assert len(regs) == 4
    assert sum(r.measure for r in regs) == pytest.approx(4.0)


@pytest.mark.parametrize("method", ["polygon", "lp"])
def test_methods_agree_on_quadrants(method):
    regs = enumerate_regions(quadrant_net(), [-1, -1], [1, 1], method=method)
    assert len(regs) == 4


def test_lp_route_three_inputs():
    net = Network([AffineLayer(np.eye(3), np.zeros(3), "relu"), AffineLayer(np.ones((1, 3)), [0.0], "identity")])
    assert len(enumerate_regions(net, [-1] * 3, [1] * 3)) == 8


def check_regions(net, lo, hi, rng):
    regs = enumerate_regions(net, lo, hi)
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    for r in regs:
        assert r.contains(r.witness)
        pts = [r.witness]
        # extra interior points: shrink random box points toward the witness
        for _ in range(4):
            p = r.witness + 1e-3 * (rng.uniform(lo, hi) - r.witness)
            if r.contains(p, tol=-1e-12):
                pts.append(p)
        pts = np.array(pts)
        np.testing.assert_allclose(net(pts), pts @ r.map_matrix.T + r.map_offset, atol=1e-9)
    # every sample point of the box lies in some region
    for p in rng.uniform(lo, hi, size=(50, len(lo))):
        assert any(r.contains(p, tol=1e-9) for r in regs)
    return regs


def test_region_maps_match_eval(rng):
    for _ in range(10):
        net = random_relu_net(rng, 2, [4, 3])
        regs = check_regions(net, [-2, -2], [2, 2], rng)
        assert len(regs) <= affine_piece_bound(net.node_count, net.hidden_layers, 2)
    total = sum(r.measure for r in check_regions(random_relu_net(rng, 2, [5]), [-1, -1], [1, 1], rng))
    assert total == pytest.approx(4.0, rel=1e-9)


@given(st.integers(0, 2 ** 32), st.integers(1, 2), st.integers(1, 4), st.integers(1, 6))
def test_region_count_bound(seed, n0, depth, width):
    rng = np.random.Generator(np.random.Philox(key=seed))
    net = random_relu_net(rng, n0, [width] * depth)
    regs = enumerate_regions(net, [-3.0] * n0, [3.0] * n0)
    assert 1 <= len(regs) <= affine_piece_bound(net.node_count, net.hidden_layers, n0)


@given(st.integers(0, 2 ** 32))
def test_piecewise_affinity_jacobian(seed):
    rng = np.random.Generator(np.random.Philox(key=seed))
    net = random_relu_net(rng, 2, [4, 4])
    h = 1e-6
    for r in enumerate_regions(net, [-2, -2], [2, 2]):
        if r.measure < 1e-3:
            continue
        a = r.witness
        b = a + 1e-4 * (rng.uniform(-2, 2, 2) - a)
        if not r.contains(b, tol=-1e-9):
            continue
        jac = [np.array([(net(p + h * e) - net(p - h * e))[0] / (2 * h) for e in np.eye(2)]) for p in (a, b)]
        np.testing.assert_allclose(jac[0], jac[1], atol=1e-7)


def test_tent_compositions_exact_count():
    for k, e in [(2, 3), (3, 2), (4, 4), (2, 8)]:
        net = tent_map_net(k)
        for _ in range(e - 1):
            net = compose(tent_map_net(k), net)
        assert len(enumerate_regions(net, [0.0], [1.0])) == k ** e


def test_budget_error(monkeypatch):
    net = compose(tent_map_net(4), tent_map_net(4))
    with pytest.raises(RegionBudgetError):
        enumerate_regions(net, [0.0], [1.0], budget=3)
    monkeypatch.setenv("PUSHFORGE_BUDGET", "2")
    with pytest.raises(RegionBudgetError):
        enumerate_regions(net, [0.0], [1.0])


def test_bad_box():
    with pytest.raises(ValueError):
        enumerate_regions(tent_map_net(2), [1.0], [0.0])
