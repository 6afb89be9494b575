import numpy as np
import pytest
from scipy import integrate
from scipy.special import ndtr

from pushforge import InputError
from pushforge.pwl_fit import fit_power_law, pwl_l1_error, pwl_phi_best_fit, pwl_phi_best_l1

# best single affine fit to Phi on [-2, 2] in L1, frozen from the optimizer
ONE_PIECE = 0.15570


def quad_l1(knots, values):
    total = 0.0
    for t0, t1, v0, v1 in zip(knots, knots[1:], values, values[1:]):
        f = lambda x: abs(ndtr(x) - (v0 + (v1 - v0) * (x - t0) / (t1 - t0)))  # noqa: E731
        total += integrate.quad(f, t0, t1, limit=200, epsabs=1e-13)[0]
    return total


def test_exact_l1_matches_quadrature():
    rng = np.random.default_rng(2)
    for _ in range(5):
        knots = np.sort(np.concatenate([[-2, 2], rng.uniform(-2, 2, 4)]))
        values = ndtr(knots) + rng.normal(0, 0.05, len(knots))
        assert pwl_l1_error(knots, values) == pytest.approx(quad_l1(knots, values), abs=1e-9)


def test_one_piece_value():
    err, knots, values = pwl_phi_best_fit(1)
    assert err == pytest.approx(ONE_PIECE, abs=5e-5)
    assert err == pytest.approx(quad_l1(knots, values), abs=1e-9)
    # no line does better: compare with a brute-force scan of slopes and offsets
    best = min(pwl_l1_error([-2, 2], [0.5 - h, 0.5 + h]) for h in np.linspace(0.3, 0.6, 301))
    assert err <= best + 1e-9


def test_fine_fit_on_unit_interval():
    assert pwl_phi_best_l1(256, (-1.0, 1.0)) < 1e-6


def test_errors_decrease_and_scale():
    ns = [2, 4, 8, 16]
    errs = [pwl_phi_best_l1(n) for n in ns]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    slope, C = fit_power_law(ns, errs)
    assert slope <= -2.0 and C > 0


def test_invalid():
    with pytest.raises(InputError):
        pwl_phi_best_l1(0)
    with pytest.raises(InputError):
        pwl_phi_best_l1(4, (1.0, -1.0))
