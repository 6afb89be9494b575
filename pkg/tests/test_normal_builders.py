import math

import numpy as np
import pytest

from pushforge import Flavor, InputError
from pushforge.builders import (binary_search_inverter, inverse_normal_cdf_net, normal_cdf_net,
                                uniform_to_normal_net)
from pushforge.builders.normal import generator_pieces, uniform_to_normal_build, uniform_to_normal_core
from pushforge.network import linear_net, replace_steps
from pushforge.piecewise import PL
from pushforge.regions import affine_pieces_1d
from pushforge.transport.cdf import cdf_from_pieces, pushforward_cdf_1d, wasserstein_1d
from pushforge.transport.checks import sup_error
from pushforge.transport.oracles import normal_cdf_ref, normal_quantile_ref

# standard normal table value at 1, 16 significant digits
PHI_1 = 0.8413447460685429


@pytest.fixture(scope="module")
def generator():
    return uniform_to_normal_build(0.05)


@pytest.mark.parametrize("eps", [1e-1, 1e-2, 1e-3])
def test_normal_cdf_net_accuracy(eps):
    net, cert = normal_cdf_net(eps)
    grid = np.round(np.arange(-600, 601) * 0.01, 10)
    err, _ = sup_error(net, normal_cdf_ref, grid)
    assert err <= eps
    assert cert.claimed_sup_error <= cert.target_eps == eps and cert.zeta == 0.0
    assert net.flavor is Flavor.RELU_ONLY
    assert net([0.0])[0] == pytest.approx(0.5, abs=eps)
    assert net([10.0])[0] == pytest.approx(1.0, abs=eps)
    assert net([-10.0])[0] == pytest.approx(0.0, abs=eps)
    out = net(np.linspace(-50, 50, 1001)[:, None])
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_normal_cdf_net_range_check():
    for bad in (0.0, 0.5, 2.0):
        with pytest.raises(InputError):
            normal_cdf_net(bad)


def test_inverter_hand_trace():
    ident = linear_net(np.eye(1))
    inv, cert = binary_search_inverter(ident, 0.0, 1.0, 3, 1.0)
    assert inv.flavor is Flavor.RELU_STEP
    assert inv([0.3])[0] == 0.3125
    # bisection on "f(mid) >= y -> high": y = 0.5 settles on the bracket just below 0.5
    for t in (1, 3, 8, 20):
        inv, _ = binary_search_inverter(ident, 0.0, 1.0, t, 1.0)
        assert inv([0.5])[0] == 0.5 - 2.0 ** (-t - 1)
    relu = replace_steps(binary_search_inverter(ident, 0.0, 1.0, 3, 1.0)[0], 1e-9)
    assert relu([0.3])[0] == pytest.approx(0.3125, abs=1e-6)


def test_inverter_errors_and_size():
    ident = linear_net(np.eye(1))
    with pytest.raises(InputError):
        binary_search_inverter(ident, 1.0, 0.0, 3, 1.0)
    with pytest.raises(InputError):
        binary_search_inverter(ident, 0.0, 1.0, 0, 1.0)
    sizes = [binary_search_inverter(ident, 0.0, 1.0, t, 1.0)[0].node_count for t in (4, 8, 16)]
    assert sizes[2] - sizes[1] == 2 * (sizes[1] - sizes[0])


@pytest.mark.parametrize("t", [4, 8, 12])
def test_inverter_sandwich(t):
    # Phi(inverter(y)) stays within eps_f + slope * bracket width of y
    f_net, f_cert = normal_cdf_net(1e-4)
    inv, _ = binary_search_inverter(f_net, -2.0, 2.0, t, 1.0, f_cert.claimed_sup_error)
    ys = np.linspace(normal_cdf_ref(-1.9), normal_cdf_ref(1.9), 300)
    x = inv(ys[:, None])[:, 0]
    slope = 1.0 / math.sqrt(2.0 * math.pi)
    width = 4.0 * 2.0 ** (-t)
    assert np.all(np.abs(normal_cdf_ref(x) - ys) <= f_cert.claimed_sup_error + slope * width)


def test_inverse_normal_examples():
    net, cert = inverse_normal_cdf_net(1e-2)
    eps = 1e-2
    assert net([0.5])[0] == pytest.approx(0.0, abs=eps)
    assert net([PHI_1])[0] == pytest.approx(1.0, abs=eps)
    zeta = cert.zeta
    ps = np.linspace(zeta / 2, 1 - zeta / 2, 401)
    out = net(ps[:, None])[:, 0]
    assert np.abs(out + out[::-1]).max() <= 2 * eps
    assert np.abs(out - normal_quantile_ref(ps)).max() <= eps
    with pytest.raises(InputError):
        inverse_normal_cdf_net(0.3)


def test_uniform_to_normal_certificate(generator):
    net, cert, cdf = generator
    eps = 0.05
    assert net.flavor is Flavor.RELU_ONLY
    assert cert.claimed_sup_error <= eps
    assert cert.extra["replacement_gap"] < eps / 10
    assert cert.extra["delta"] > 0 and cert.zeta >= 0
    assert wasserstein_1d(cdf, "normal") == pytest.approx(cert.claimed_sup_error, rel=1e-12)
    A = 2 * math.log(1 / eps)
    lo, hi = cdf.support
    assert -A - 1e-12 <= lo and hi <= A + 1e-12
    assert abs(net([0.5])[0]) <= eps


@pytest.fixture(scope="module")
def replica():
    step_net, params, f_net = uniform_to_normal_core(0.05)
    A = params["A"]
    f_pl = PL.from_pieces(affine_pieces_1d(f_net, -A - 1.0, A + 1.0))
    return step_net, params, f_pl


def test_replica_matches_step_network(replica):
    # Step units evaluate exactly in floating point, so the match is to rounding level
    step_net, params, f_pl = replica
    xs = np.random.default_rng(1).random(20_000)
    np.testing.assert_allclose(generator_pieces(params, f_pl, 0.0)(xs), step_net(xs[:, None])[:, 0],
                               atol=1e-12, rtol=0)


def test_replica_matches_relu_network(generator, replica):
    # each ramp is relu(z/delta) - relu(z/delta - 1) with delta ~ 1e-10; for |z| ~ 1 the two
    # terms cancel in floating point and leave ~ulp(z)/delta ~ 1e-6 of rounding in the output
    net, cert, _ = generator
    _, params, f_pl = replica
    xs = np.random.default_rng(1).random(20_000)
    np.testing.assert_allclose(generator_pieces(params, f_pl, cert.extra["delta"])(xs),
                               net(xs[:, None])[:, 0], atol=1e-5, rtol=0)


def test_uniform_to_normal_output_range(generator):
    net, _, _ = generator
    out = net(np.linspace(0, 1, 20_001)[:, None])[:, 0]
    A = 2 * math.log(1 / 0.05)
    assert out.min() >= -A - 1e-9 and out.max() <= A + 1e-9


def test_uniform_to_normal_range_check():
    with pytest.raises(InputError):
        uniform_to_normal_net(0.25)
