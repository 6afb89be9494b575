import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pushforge import Flavor, InputError
from pushforge.builders import analytic_gadget, box_muller_net
from pushforge.builders.gadgets import box_muller_truncation, ln_stages, parse_kind

REFS = {"exp": np.exp, "ln": np.log, "cos": np.cos, "sin": np.sin}


def grid_error(net, ref, lo, hi, points=4001):
    xs = np.linspace(lo, hi, points)
    return float(np.abs(net(xs[:, None])[:, 0] - ref(xs)).max())


@pytest.mark.parametrize("kind, lo, hi", [("exp", -1.0, 1.0), ("cos", 0.0, 2 * math.pi),
                                          ("sin", 0.0, 2 * math.pi), ("ln", 0.1, 10.0)])
def test_gadget_sup_error(kind, lo, hi):
    eps = 1e-3
    net, cert = analytic_gadget(kind, [lo, hi], eps)
    assert cert.claimed_sup_error <= eps and cert.zeta == 0.0
    assert grid_error(net, REFS[kind], lo, hi) <= eps


def test_gadget_anchor_values():
    eps = 1e-3
    assert analytic_gadget("exp", [-1, 1], eps)[0]([0.0])[0] == pytest.approx(1.0, abs=eps)
    assert analytic_gadget("cos", [-1, 1], eps)[0]([0.0])[0] == pytest.approx(1.0, abs=eps)


def test_pow_half():
    eps = 1e-3
    net, cert = analytic_gadget("pow(0.5)", [0.5, 8.0], eps)
    assert net([4.0])[0] == pytest.approx(2.0, abs=eps)
    assert grid_error(net, np.sqrt, 0.5, 8.0) <= eps
    same, _ = analytic_gadget("pow", [0.5, 8.0], eps, alpha=0.5)
    assert same([4.0])[0] == net([4.0])[0]


def test_ln_range_reduction():
    assert ln_stages(0.1, 10.0) == math.ceil(math.log2(10.0))
    assert ln_stages(0.5, 1.5) >= 1
    net, _ = analytic_gadget("ln", [0.1, 10.0], 1e-3)
    assert net.flavor is Flavor.RELU_STEP


@settings(max_examples=8)
@given(st.floats(-2.0, 1.0), st.floats(0.2, 2.0), st.sampled_from([1e-2, 1e-3, 1e-4]))
def test_exp_on_random_domains(lo, width, eps):
    net, _ = analytic_gadget("exp", [lo, lo + width], eps)
    assert grid_error(net, np.exp, lo, lo + width, 801) <= eps


@settings(max_examples=6)
@given(st.floats(0.05, 1.0), st.floats(1.5, 20.0))
def test_ln_on_random_domains(lo, hi):
    net, _ = analytic_gadget("ln", [lo, hi], 1e-3)
    assert grid_error(net, np.log, lo, hi, 1201) <= 1e-3


def test_gadget_invalid_inputs():
    with pytest.raises(InputError):
        analytic_gadget("ln", [0.0, 1.0], 1e-3)
    with pytest.raises(InputError):
        analytic_gadget("pow(0.5)", [-1.0, 1.0], 1e-3)
    with pytest.raises(InputError):
        analytic_gadget("tan", [0.0, 1.0], 1e-3)
    with pytest.raises(InputError):
        analytic_gadget("exp", [1.0, 0.0], 1e-3)
    with pytest.raises(InputError):
        parse_kind("pow")


@pytest.fixture(scope="module")
def box_muller():
    return box_muller_net(0.1)


def test_box_muller_anchors(box_muller):
    net, cert = box_muller
    x1 = math.exp(-0.5)
    np.testing.assert_allclose(net([x1, 0.0]), [1.0, 0.0], atol=0.1)
    np.testing.assert_allclose(net([x1, 0.25]), [0.0, 1.0], atol=0.1)
    np.testing.assert_allclose(net([x1, 0.5]), [-1.0, 0.0], atol=0.1)
    assert cert.zeta == box_muller_truncation(0.1) > 0
    assert cert.claimed_sup_error <= 0.1


def test_box_muller_sup_error_off_exception_set(box_muller):
    net, cert = box_muller
    rng = np.random.default_rng(5)
    x = np.column_stack([rng.uniform(cert.zeta, 1.0, 20_000), rng.random(20_000)])
    r = np.sqrt(-2.0 * np.log(x[:, 0]))
    ref = np.column_stack([r * np.cos(2 * np.pi * x[:, 1]), r * np.sin(2 * np.pi * x[:, 1])])
    assert np.abs(net(x) - ref).max() <= 0.1


def test_box_muller_truncation_budget():
    for eps in (0.2, 0.1, 0.01):
        e = box_muller_truncation(eps)
        # mass below e maps beyond radius sqrt(2 ln 1/e); its contribution stays under eps/10
        assert 2 * e * (math.sqrt(2 * math.log(1 / e)) + 1) < eps / 10
    with pytest.raises(InputError):
        box_muller_net(0.3)
