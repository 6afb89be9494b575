import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from pushforge import InputError
from pushforge.builders import clamp_net, sum_of_uniforms_net, tent_map_net
from pushforge.network import linear_net
from pushforge.transport import (EmpiricalDistribution, PiecewiseLinearCdf, SourceDistribution, empirical_cdf,
                                 empirical_wasserstein, pushforward_cdf_1d, sample_pushforward, wasserstein_1d)
from pushforge.transport.cdf import mixture_cdf, point_mass_cdf, uniform_cdf
from pushforge.transport.oracles import erfc_cdf, normal_cdf_ref, normal_quantile_ref

PHI_1 = 0.8413447460685429


def mp_phi(x):
    return float(mpmath.ncdf(mpmath.mpf(x)))


def test_phi_reference_values():
    assert normal_cdf_ref(0.0) == 0.5
    assert normal_cdf_ref(1.0) == pytest.approx(PHI_1, abs=1e-15)
    for x in np.linspace(-8, 8, 81):
        assert normal_cdf_ref(x) == pytest.approx(mp_phi(x), abs=1e-14)
        assert erfc_cdf(float(x)) == pytest.approx(mp_phi(x), abs=1e-14)
    # deep tail, relative accuracy
    assert normal_cdf_ref(-30.0) == pytest.approx(mp_phi(-30.0), rel=1e-12)


def test_quantile_roundtrip():
    for x in range(-3, 4):
        assert normal_quantile_ref(normal_cdf_ref(x)) == pytest.approx(x, abs=1e-10)
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(InputError):
            normal_quantile_ref(bad)


def test_pushforward_examples():
    F = pushforward_cdf_1d(linear_net(np.eye(1)))
    ys = np.linspace(-0.5, 1.5, 201)
    np.testing.assert_allclose(F(ys), np.clip(ys, 0, 1), atol=1e-15)
    np.testing.assert_allclose(pushforward_cdf_1d(tent_map_net(2))(ys), np.clip(ys, 0, 1), atol=1e-12)
    const = pushforward_cdf_1d(linear_net([[0.0]], [0.7]))
    assert const(0.7) == 1.0 and const.left_limit(0.7) == 0.0


@pytest.mark.parametrize("k", range(1, 9))
def test_tent_preserves_uniform(k):
    F = pushforward_cdf_1d(tent_map_net(k))
    np.testing.assert_allclose(F(F.xs), np.clip(F.xs, 0, 1), atol=1e-12)
    assert wasserstein_1d(F, uniform_cdf()) <= 1e-12


def test_clamped_net_has_atoms():
    # clamp(0,1)(3x - 1) on [0,1]: mass 1/3 at 0, 1/3 at 1, uniform in between
    net = clamp_net(0.0, 1.0)
    from pushforge.network import compose

    F = pushforward_cdf_1d(compose(net, linear_net([[3.0]], [-1.0])))
    assert F(0.0) == pytest.approx(2 / 3 - 1 / 3, abs=1e-12)
    assert F.left_limit(1.0) == pytest.approx(2 / 3, abs=1e-12)
    assert F(1.0) == 1.0


def test_wasserstein_examples():
    assert wasserstein_1d(uniform_cdf(0, 1), uniform_cdf(0.5, 1.5)) == pytest.approx(0.5, abs=1e-15)
    F = uniform_cdf(-1, 2)
    assert wasserstein_1d(F, F) == 0.0
    assert wasserstein_1d(point_mass_cdf(0.0), point_mass_cdf(2.5)) == pytest.approx(2.5)


def mp_w1_normal(F):
    """High-precision oracle: integrate |F - Phi| on pieces split at breakpoints and sign changes."""
    mpmath.mp.dps = 30
    g = lambda x: float(F(float(x))) - mpmath.ncdf(x)  # noqa: E731
    cuts = [float(v) for v in np.unique(F.xs)]
    pts = []
    for a, b in zip(cuts, cuts[1:]):
        grid = np.linspace(a, b, 2001)
        vals = [g(mpmath.mpf(x)) for x in grid]
        pts.append(a)
        for x0, x1, v0, v1 in zip(grid, grid[1:], vals, vals[1:]):
            if v1 == 0:
                pts.append(mpmath.mpf(x1))
            elif v0 * v1 < 0:
                lo, hi = mpmath.mpf(x0), mpmath.mpf(x1)
                for _ in range(80):
                    mid = (lo + hi) / 2
                    lo, hi = (mid, hi) if g(mid) * v0 > 0 else (lo, mid)
                pts.append(lo)
    pts.append(cuts[-1])
    total = mpmath.quad(mpmath.ncdf, [-mpmath.inf, cuts[0]])
    total += mpmath.quad(lambda x: 1 - mpmath.ncdf(x), [cuts[-1], mpmath.inf])
    for a, b in zip(pts, pts[1:]):
        if b > a:
            total += mpmath.quad(lambda x: abs(g(x)), [a, b])
    return float(total)


def test_wasserstein_to_normal_matches_quadrature():
    for F in (uniform_cdf(-1, 1), uniform_cdf(0, 3), point_mass_cdf(0.3),
              mixture_cdf([0.0], [0.2], [-2.0], [1.0], [0.8])):
        assert wasserstein_1d(F, "normal") == pytest.approx(mp_w1_normal(F), abs=1e-10)


cdf_strategy = st.lists(st.floats(-5, 5), min_size=1, max_size=30).map(empirical_cdf)


@given(cdf_strategy, cdf_strategy)
def test_wasserstein_symmetric_nonnegative(F, G):
    a, b = wasserstein_1d(F, G), wasserstein_1d(G, F)
    assert a >= 0 and a == pytest.approx(b, abs=1e-12)
    assert wasserstein_1d(F, F) == 0.0


@given(cdf_strategy, cdf_strategy, cdf_strategy)
def test_wasserstein_triangle(F, G, H):
    assert wasserstein_1d(F, H) <= wasserstein_1d(F, G) + wasserstein_1d(G, H) + 1e-12


def test_cdf_validation():
    with pytest.raises(InputError):
        PiecewiseLinearCdf([0.0, 1.0], [0.0, 0.5])
    with pytest.raises(InputError):
        PiecewiseLinearCdf([1.0, 0.0], [0.0, 1.0])
    with pytest.raises(InputError):
        pushforward_cdf_1d(linear_net(np.eye(2)))


def test_emd_examples():
    pts = np.random.default_rng(0).random((50, 2))
    A = EmpiricalDistribution.uniform(pts)
    assert empirical_wasserstein(A, EmpiricalDistribution.uniform(pts[::-1])) == pytest.approx(0.0, abs=1e-15)
    o = EmpiricalDistribution.uniform([[0.0, 0.0]])
    e = EmpiricalDistribution.uniform([[1.0, 0.0]])
    assert empirical_wasserstein(o, e) == 1.0
    with pytest.raises(InputError):
        empirical_wasserstein(A, EmpiricalDistribution.uniform(pts[:10]))
    with pytest.raises(InputError):
        empirical_wasserstein(A, A, max_points=10)


@given(st.integers(0, 2 ** 32), st.integers(1, 40))
def test_emd_1d_equals_sorted_matching(seed, m):
    rng = np.random.Generator(np.random.Philox(key=seed))
    a, b = rng.normal(size=m), rng.uniform(-1, 2, size=m)
    emd = empirical_wasserstein(EmpiricalDistribution.uniform(a[:, None]), EmpiricalDistribution.uniform(b[:, None]))
    assert emd == pytest.approx(wasserstein_1d(empirical_cdf(a), empirical_cdf(b)), abs=1e-9)


@given(st.integers(0, 2 ** 32))
def test_emd_symmetry_and_triangle(seed):
    rng = np.random.Generator(np.random.Philox(key=seed))
    A, B, C = (EmpiricalDistribution.uniform(rng.normal(size=(12, 2))) for _ in range(3))
    ab, ba = empirical_wasserstein(A, B), empirical_wasserstein(B, A)
    assert ab == pytest.approx(ba, abs=1e-12)
    assert empirical_wasserstein(A, C) <= ab + empirical_wasserstein(B, C) + 1e-12


def test_empirical_distribution_validation():
    with pytest.raises(InputError):
        EmpiricalDistribution(np.zeros((2, 1)), np.array([0.7, 0.7]))
    with pytest.raises(InputError):
        EmpiricalDistribution.uniform([[np.inf]])


def test_sampling_determinism_and_range():
    src = SourceDistribution("uniform_box", 3, seed=99)
    s1 = sample_pushforward(linear_net(np.eye(3)), src, 500)
    s2 = sample_pushforward(linear_net(np.eye(3)), src, 500)
    np.testing.assert_array_equal(s1.points, s2.points)
    assert s1.points.min() >= 0 and s1.points.max() <= 1
    with pytest.raises(InputError):
        sample_pushforward(linear_net(np.eye(2)), src, 10)
    with pytest.raises(InputError):
        SourceDistribution("cauchy", 1)


def test_tent_samples_close_to_exact_cdf():
    s = sample_pushforward(tent_map_net(2), SourceDistribution("uniform_box", 1, seed=4), 100_000)
    ys = np.sort(s.points[:, 0])
    F = pushforward_cdf_1d(tent_map_net(2))
    emp = np.arange(1, len(ys) + 1) / len(ys)
    assert np.abs(emp - F(ys)).max() <= 0.01


def test_empirical_vs_exact_1d_consistency():
    net = clamp_net(0.0, 1.0)
    from pushforge.network import compose

    net = compose(net, linear_net([[2.0]], [-0.5]))
    m = 2000
    gen = sample_pushforward(net, SourceDistribution("uniform_box", 1, seed=10), m)
    exact = pushforward_cdf_1d(net)
    ref_pts = SourceDistribution("uniform_box", 1, seed=11).sample(m)
    emd = empirical_wasserstein(gen, EmpiricalDistribution.uniform(ref_pts))
    fluct = 1.0 / math.sqrt(m)
    assert abs(emd - wasserstein_1d(exact, uniform_cdf())) <= 3 * fluct


def test_sum_of_uniforms_monte_carlo_cdf():
    src = SourceDistribution("uniform_box", 12, seed=2)
    s = sample_pushforward(sum_of_uniforms_net(12), src, 200_000)
    assert wasserstein_1d(empirical_cdf(s.points[:, 0]), "normal") <= 0.05 / math.sqrt(12) * 10
