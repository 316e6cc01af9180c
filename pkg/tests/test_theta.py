import numpy as np
import pytest

from ahardy import hardy, orbit_series as osr, theta
from ahardy.group import Character, cyclic_presentation, enumerate_words, trivial_presentation
from ahardy.moebius import apply
from ahardy.quadrature import graded_rule

from conftest import T0, disk_points


def trivial_ctx(t0=T0):
    tr = enumerate_words(trivial_presentation(), 1)
    od = osr.orbit_data(tr, t0)
    return theta.ThetaContext(tr, od, Character(())), hardy.factor_martin_derivative(od, tr)


def test_trivial_theta_is_identity_map():
    ctx, _ = trivial_ctx()
    z = disk_points(np.random.default_rng(0), 30)
    f = lambda x: np.sin(x) + x ** 4
    assert np.allclose(theta.poincare_theta(ctx, f, z), f(z), rtol=1e-14, atol=0)


def test_identity_character_on_constant(cyclic):
    _, tr, od, _ = cyclic
    ctx = theta.ThetaContext(tr, od, Character((1 + 0j,)))
    z = disk_points(np.random.default_rng(1), 30, 0.9)
    assert np.allclose(theta.poincare_theta(ctx, lambda x: np.ones_like(x), z), 1, atol=1e-12)


def test_two_forms_agree(cyclic):
    _, tr, od, f = cyclic
    z = disk_points(np.random.default_rng(2), 50)
    for a in (Character((1 + 0j,)), Character((-1 + 0j,)), Character.from_angles([0.9])):
        ctx = theta.ThetaContext(tr, od, a)
        p1 = theta.poincare_theta(ctx, f.delta, z, "pushforward")
        p2 = theta.poincare_theta(ctx, f.delta, z, "pullback")
        assert np.max(np.abs(p1 - p2) / np.abs(p1)) <= 1e-8


def test_denominator_vanishes_at_mprime_zero(cyclic):
    _, tr, od, f = cyclic
    ctx = theta.ThetaContext(tr, od, Character((1 + 0j,)))
    with pytest.raises(theta.DenominatorVanishes):
        theta.poincare_theta(ctx, f.delta, f.zeros[:1])


def test_needs_inverse_closed(cyclic):
    _, _, od, _ = cyclic
    tr = enumerate_words(cyclic_presentation(), 4, inverse_closed=False)
    with pytest.raises(ValueError):
        theta.ThetaContext(tr, od, Character((1 + 0j,)))


def test_automorphy_residual_shrinks():
    pres = cyclic_presentation(0.5)
    g = pres.generators[0]
    z = 0.4 * disk_points(np.random.default_rng(3), 20)
    alpha = Character.from_angles([1.1])
    fn = lambda x: np.exp(x)
    res = []
    for L in (8, 12, 16):
        tr = enumerate_words(pres, L)
        ctx = theta.ThetaContext(tr, osr.orbit_data(tr, T0), alpha)
        P = lambda x: theta.poincare_theta(ctx, fn, x)
        res.append(np.max(np.abs(P(apply(g, z)) - alpha.values[0] * P(z))))
    assert res[0] > res[1] > res[2]


def test_delta_report_trivial_examples():
    ctx, f = trivial_ctx()
    rep = theta.theta_delta_report(ctx, f)
    assert rep["integral1"] == pytest.approx(0, abs=1e-12) and rep["integral2"] == pytest.approx(0, abs=1e-12)
    assert rep["identity_residual"] <= 1e-8
    for n in (1, 2):
        rep = theta.theta_delta_report(ctx, f, delta=lambda x, n=n: (np.conj(T0) * x) ** n)
        assert rep["integral1"] + rep["integral2"] == pytest.approx(n, abs=1e-8)
        if n == 1:
            assert rep["integral1"] == pytest.approx(1, abs=1e-8)
            assert rep["integral2"] == pytest.approx(0, abs=1e-12)


def test_delta_report_cyclic(cyclic):
    _, tr, od, f = cyclic
    ctx = theta.ThetaContext(tr, od, Character((-1 + 0j,)))
    rep = theta.theta_delta_report(ctx, f)
    assert rep["sup_pass"] and rep["limits_pass"] and rep["identity_pass"]
    # the measured character of P^alpha Delta is alpha; the character of Delta drops out
    assert rep["measured_character"][0] == pytest.approx(-1, abs=1e-6)


def test_divided_difference_grid_stable(cyclic):
    _, tr, od, f = cyclic
    ctx = theta.ThetaContext(tr, od, Character((1j,)))
    d0 = hardy.delta_at_t0(f)[0]
    norms = []
    for n in (32, 64):
        t, w = graded_rule(n, od.limit_angles)
        h = (theta.poincare_theta(ctx, f.delta, t) * np.conj(d0) - 1) / (t - T0)
        norms.append(np.sum(w * np.abs(h) ** 2))
    assert np.isfinite(norms[0]) and abs(norms[0] - norms[1]) <= 1e-6 * norms[1]


def test_boundary_datum_validation():
    d = theta.BoundaryDatum.from_ratio(T0, 1j, 2.5)
    assert d.ratio == pytest.approx(2.5)
    with pytest.raises(ValueError):
        theta.BoundaryDatum(T0, 2.0 + 0j, 0j)
    with pytest.raises(ValueError):
        theta.BoundaryDatum.from_ratio(T0, 1 + 0j, -1.0)


def test_interpolant_trivial_examples():
    ctx, f = trivial_ctx(1.0 + 0j)
    # here Delta is the constant i, so f0 = -i and w is the automorphism fixing +-1
    w = theta.construct_interpolant(ctx, f, theta.BoundaryDatum.from_ratio(1.0, 1.0, 1.0))
    assert w.report["pass"] and w.report["ratio_gap"] <= 1e-8
    z = disk_points(np.random.default_rng(5), 10)
    assert np.allclose(w(z), w.inner_times_f(z))
    w0 = theta.construct_interpolant(ctx, f, theta.BoundaryDatum.from_ratio(1.0, 1j, 0.0))
    assert np.allclose(w0(z), 1j, atol=1e-12)
    with pytest.raises(theta.InfeasibleDatum):
        ctx2, f2 = trivial_ctx(T0)
        syn = hardy.Factorization(f2.od, f2.trunc, np.array([0.5 * T0]), 1 + 0j)
        theta.construct_interpolant(ctx2, syn, theta.BoundaryDatum.from_ratio(T0, 1.0, 0.5))


def test_interpolant_cyclic(cyclic):
    _, tr, od, f = cyclic
    ctx = theta.ThetaContext(tr, od, Character((-1 + 0j,)))
    bound = f.delta_log_derivative_t0()
    w = theta.construct_interpolant(ctx, f, theta.BoundaryDatum.from_ratio(T0, 1.0, bound + 1))
    assert w.report["pass"] and w.report["sup_abs"] <= 1
