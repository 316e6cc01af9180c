import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ahardy import hardy, orbit_series as osr
from ahardy.group import Character, GroupPresentation, cyclic_presentation, enumerate_words
from ahardy.moebius import MoebiusMap
from ahardy.quadrature import BoundaryGrid

from conftest import T0, disk_points


def test_h2_norm_examples():
    assert hardy.h2_norm(hardy.HardyFunction([1])) == 1
    assert hardy.h2_norm(hardy.HardyFunction([0, 1, 1])) == pytest.approx(np.sqrt(2))
    h = hardy.HardyFunction([1, 2, 3])
    assert h(0.5) == pytest.approx(1 + 1 + 0.75)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10), min_size=1, max_size=40))
def test_h2_norm_parseval(coeffs):
    h = hardy.HardyFunction(coeffs)
    g = BoundaryGrid(128, 0.1)
    grid = hardy.grid_h2_norm(h(g.points), g.weights)
    assert grid == pytest.approx(hardy.h2_norm(h), rel=1e-8, abs=1e-12)


def test_outer_examples():
    g = BoundaryGrid(1024, 0.01)
    t = g.points
    z = disk_points(np.random.default_rng(0), 20, 0.9)
    assert np.allclose(hardy.outer_from_log_modulus(np.full(1024, np.log(3.0)), z, g), 3.0)
    out = hardy.outer_from_log_modulus(np.log(np.abs(t - T0) ** 2), 0.0, g, log_poles=[(T0, 1.0)])
    assert out == pytest.approx(1.0, abs=1e-12)
    phi = hardy.outer_from_log_modulus(np.log(np.abs(t - T0) ** 2), z, g, log_poles=[(T0, 1.0)])
    assert np.allclose(phi, np.conj(T0) ** 2 * (z - T0) ** 2, atol=1e-12)
    # a smooth modulus: outer of |t - 2|^2 is (2 - z)^2
    smooth = hardy.outer_from_log_modulus(np.log(np.abs(t - 2) ** 2), z, g)
    assert np.allclose(smooth, (2 - z) ** 2, rtol=1e-10)
    lm1, lm2 = np.log(np.abs(t - 2) ** 2), np.log(np.abs(t + 3j))
    prod = hardy.outer_from_log_modulus(lm1 + lm2, z, g)
    assert np.allclose(prod, hardy.outer_from_log_modulus(lm1, z, g) *
                       hardy.outer_from_log_modulus(lm2, z, g), rtol=1e-12)
    with pytest.raises(hardy.NonFiniteSample):
        hardy.outer_from_log_modulus(np.full(8, np.inf), 0.0)


def test_trivial_factorization(trivial):
    tr, od, f = trivial
    z = disk_points(np.random.default_rng(1), 30)
    assert np.allclose(f.delta(z), 1j * np.conj(T0), atol=1e-14)
    assert f.residual_inner <= 1e-6 and f.residual_bound4 == 0
    g = BoundaryGrid.avoiding(1024, [T0])
    assert np.allclose(np.abs(f.phi(g.points)), np.abs(g.points - T0) ** 2, rtol=1e-12)
    assert f.phi(0.0).real > 0 and abs(f.phi(0.0).imag) < 1e-15
    lim = hardy.phi_limit_check(f, T0, [0.9, 0.99, 0.999])
    assert np.allclose(lim.partial_sums, 1, atol=1e-12)


def test_cyclic_factorization_frozen(cyclic):
    pres, tr, od, f = cyclic
    assert len(f.zeros) == len(od.images) - 1 == 32
    assert np.all(np.abs(f.zeros) < 1)
    assert f.residual_inner <= 1e-8
    assert f.sandwich_margin >= 0
    assert f.outer_crosscheck <= 0.05
    z = disk_points(np.random.default_rng(2), 50)
    assert np.max(np.abs(f.delta(z))) <= 1
    assert f.delta_log_derivative_t0() == pytest.approx(4.431404164582, rel=1e-9)
    widom = osr.widom_log_integral(od).value
    assert widom == pytest.approx(-np.log(f.phi(0.0).real), abs=1e-10)
    lim = hardy.phi_limit_check(f, T0, 1 - 2.0 ** -np.arange(3, 17))
    assert lim.converged and abs(lim.value - 1) <= 1e-2


def test_delta_character(cyclic, trivial):
    pres, tr, od, f = cyclic
    samples = 0.5 * disk_points(np.random.default_rng(3), 40)
    chi, disp = hardy.delta_character(f, pres, samples)
    assert chi.values[0] == pytest.approx(0.33217288 + 0.94321852j, abs=1e-6)
    assert max(disp) <= 1e-3
    # dispersion shrinks with word length
    tr14 = enumerate_words(pres, 14)
    f14 = hardy.factor_martin_derivative(osr.orbit_data(tr14, T0), tr14)
    assert hardy.delta_character(f14, pres, samples)[1][0] > disp[0]
    assert hardy.delta_character(trivial[2], GroupPresentation(()), samples)[0] == Character(())
    one_gen = GroupPresentation((MoebiusMap.hyperbolic(0.3),))
    assert hardy.delta_character(trivial[2], one_gen, samples)[0].values[0] == pytest.approx(1)
    with pytest.raises(hardy.DispersionTooLarge):
        tr4 = enumerate_words(pres, 4)
        f4 = hardy.factor_martin_derivative(osr.orbit_data(tr4, T0), tr4)
        hardy.delta_character(f4, pres, samples, tol_char=1e-9)


def test_automorphy_moduli_shrink():
    pres = cyclic_presentation(0.5)
    samples = 0.5 * disk_points(np.random.default_rng(4), 20)
    res = []
    for L in (10, 12):
        tr = enumerate_words(pres, L)
        f = hardy.factor_martin_derivative(osr.orbit_data(tr, T0), tr)
        res.append(hardy.automorphy_moduli_residuals(f, pres, samples))
    for key in ("phi", "delta", "phi_mprime"):
        assert res[1][key] < res[0][key]


def test_subharmonic_mean_inequality(cyclic):
    _, _, od, _ = cyclic
    g = BoundaryGrid.avoiding(8192, np.append(od.images, T0))
    t, w = g.points, g.weights
    z = disk_points(np.random.default_rng(5), 50, 0.9)
    logb = np.log(osr.boundary_sum(od, t))
    poisson = (1 - np.abs(z[:, None]) ** 2) / np.abs(t[None, :] - z[:, None]) ** 2
    avg = poisson @ (w * logb)
    assert np.all(avg >= np.log(osr.boundary_sum(od, z)) - 1e-9)
