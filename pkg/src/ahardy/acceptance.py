"""Acceptance criteria, each returning a pass flag and the measured numbers."""
import time
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import caratheodory as cara
from . import hardy, kernels, orbit_series as osr, theta
from .group import Character, character_lattice, cyclic_presentation, enumerate_words, trivial_presentation
from .limits import NTSequence
from .moebius import (IDENTITY, MoebiusMap, apply, compose, derivative, inverse, maps_equal,
                      transport_residual)
from .quadrature import BoundaryGrid


@dataclass
class SuiteConfig:
    t0: complex = complex(np.exp(1.3j))
    s: float = 0.5
    word_length: int = 16
    grid_size: int = 4096
    coeff_count: int = 32
    lattice_size: int = 16
    seed: int = 20240601
    tolerances: dict = field(default_factory=dict)

    def tol(self, key, default):
        return float(self.tolerances.get(key, default))

    @property
    def kernel_settings(self):
        return kernels.KernelSettings(n_panels=max(self.grid_size // 64, 4),
                                      coeff_count=self.coeff_count)


class CyclicSetup:
    """Shared cyclic-group products, built lazily once per suite run."""

    def __init__(self, cfg):
        self.cfg = cfg

    @cached_property
    def presentation(self):
        return cyclic_presentation(self.cfg.s)

    @cached_property
    def trunc(self):
        return enumerate_words(self.presentation, self.cfg.word_length)

    @cached_property
    def od(self):
        return osr.orbit_data(self.trunc, self.cfg.t0)

    @cached_property
    def fact(self):
        return hardy.factor_martin_derivative(self.od, self.trunc)

    @cached_property
    def bank(self):
        return kernels.KernelBank(self.fact, self.cfg.kernel_settings, self.cfg.lattice_size)

    @cached_property
    def delta_char(self):
        return hardy.delta_character(self.fact, self.presentation, 0.5 * theta.interior_samples(40))[0]


def _result(num, title, passed, **details):
    return {"id": num, "title": title, "passed": bool(passed), "details": details}


def random_maps(rng, n):
    z = np.sqrt(rng.uniform(0, 0.81, n)) * np.exp(2j * np.pi * rng.uniform(size=n))
    th = rng.uniform(0, 2 * np.pi, n)
    return [MoebiusMap.from_pair(np.exp(0.5j * a), np.exp(0.5j * a) * b) for a, b in zip(th, z)]


def criterion_1(cfg, _):
    rng = np.random.default_rng(cfg.seed)
    start = time.perf_counter()
    n = 500
    m1, m2, m3 = random_maps(rng, n), random_maps(rng, n), random_maps(rng, n)
    z = np.sqrt(rng.uniform(0, 0.9, n)) * np.exp(2j * np.pi * rng.uniform(size=n))
    t = np.exp(2j * np.pi * rng.uniform(size=n))
    assoc = inv = chain = transport = 0.0
    for i in range(n):
        left = compose(compose(m1[i], m2[i]), m3[i])
        right = compose(m1[i], compose(m2[i], m3[i]))
        assoc = max(assoc, 0.0 if maps_equal(left, right, 1e-9) else 1.0,
                    abs(apply(left, z[i]) - apply(right, z[i])) / abs(apply(left, z[i])))
        for e in (compose(m1[i], inverse(m1[i])), compose(inverse(m1[i]), m1[i])):
            inv = max(inv, 0.0 if maps_equal(e, IDENTITY, 1e-12) else 1.0)
        c = compose(m1[i], m2[i])
        lhs = derivative(c, z[i])
        rhs = derivative(m1[i], apply(m2[i], z[i])) * derivative(m2[i], z[i])
        chain = max(chain, abs(lhs - rhs) / abs(lhs))
        transport = max(transport, float(transport_residual(m1[i], z[i], t[i])))
    elapsed = time.perf_counter() - start
    ok = assoc <= 1e-9 and inv == 0 and chain <= 1e-9 and transport <= 1e-9 and elapsed < 1.0
    return _result(1, "Moebius algebra", ok, associativity=assoc, inverse=inv, chain_rule=chain,
                   transport=transport, runtime_ok=elapsed < 1.0)


def criterion_2(cfg, _):
    rng = np.random.default_rng(cfg.seed + 2)
    p = np.exp(rng.uniform(0, np.log(10), 500)) * np.exp(2j * np.pi * rng.uniform(size=500))
    r = rng.uniform(0, 1, 500)
    ratios = osr.chord_ratio(p, r)
    violations = int(np.sum(ratios > 2))
    extreme = float(osr.chord_ratio(-1 + 0j, 0.0))
    near = [float(osr.chord_ratio(-1 - e, e)) for e in (1e-2, 1e-4, 1e-6)]
    ok = violations == 0 and abs(extreme - 2) <= 1e-12 and np.all(np.diff(near) > 0)
    return _result(2, "Chord inequality |p-1| <= 2|p-r|", ok, violations=violations,
                   max_ratio=float(ratios.max()), ratio_at_extreme=extreme, approach=near)


def criterion_3(cfg, _):
    start = time.perf_counter()
    pres = cyclic_presentation(cfg.s)
    tr = enumerate_words(pres, 10)
    od = osr.orbit_data(tr, cfg.t0)
    z = theta.interior_samples(50, 0.95, cfg.seed + 3)
    a = osr.martin_derivative(od, tr, z, "at_t0")
    b = osr.martin_derivative(od, tr, z, "at_zeta")
    rel = float(np.max(np.abs(a - b) / np.abs(a)))
    elapsed = time.perf_counter() - start
    return _result(3, "Martin derivative two-form agreement", rel <= 1e-8 and elapsed < 5,
                   max_rel_error=rel, runtime_ok=elapsed < 5)


def criterion_4(cfg, _):
    t0 = cfg.t0
    tr = enumerate_words(trivial_presentation(), 3)
    od = osr.orbit_data(tr, t0)
    m0 = complex(osr.martin(od, 0.0))
    mp0 = complex(osr.martin_derivative(od, tr, 0.0))
    f = hardy.factor_martin_derivative(od, tr)
    z = theta.interior_samples(100)
    dz = f.delta(z)
    grid = BoundaryGrid.avoiding(cfg.grid_size, [t0])
    t = grid.points
    phi_res = float(np.max(np.abs(np.abs(f.phi(t)) - np.abs(t - t0) ** 2)))
    res = {"m0": abs(m0 - 0.5j), "mprime0": abs(mp0 - 1j * np.conj(t0)),
           "delta_constant": float(np.max(np.abs(dz - dz[0]))),
           "delta_unimodular": float(np.max(np.abs(np.abs(dz) - 1))),
           "delta_value": abs(dz[0] - 1j * np.conj(t0)), "phi_modulus": phi_res}
    return _result(4, "Trivial-group closed forms", max(res.values()) <= 1e-6, **res)


def criterion_5(cfg, _):
    seq = NTSequence(1.0 + 0j)
    targets = {"{0}": ([0j], 1.0), "{0.5}": ([0.5], 3.0), "{0.5,-0.5}": ([0.5, -0.5], 10 / 3)}
    gaps = {}
    for k, (zs, want) in targets.items():
        zz = np.array(zs, dtype=complex)
        lim = cara.angular_limits(lambda x: osr.blaschke(zz, x), seq)
        gaps[k] = abs(abs(lim["derivative"]) - want)
    geo = [1 - 2.0 ** -k for k in range(1, 46)]
    mono = cara.frostman_monotone_check([[0j], [0j, 0.5]], 1.0)
    nested = cara.frostman_monotone_check([[-r for r in geo[:n]] for n in range(1, 41)], 1.0,
                                          full_zeros=[-r for r in geo])
    ok = max(gaps.values()) <= 1e-4 and mono["monotone"] and nested["monotone"] \
        and nested["limit_gap"] <= 1e-8
    return _result(5, "Frostman sums", ok, gaps=gaps, monotone=mono["monotone"],
                   nested_monotone=nested["monotone"], nested_limit_gap=nested["limit_gap"])


def criterion_6(cfg, _):
    grid = BoundaryGrid.avoiding(cfg.grid_size, [1.0])
    out = {}
    for n in (1, 2, 5):
        first, second = cara.boundary_integrals(lambda x: x ** n, 1.0, 1.0, grid.points, grid.weights)
        out[str(n)] = abs(first + second - n)
    return _result(6, "Boundary integral identity for z^n", max(out.values()) <= 1e-6, gaps=out)


def blaschke_family():
    return {"{0}": [0j], "{0.5}": [0.5], "{0.5,-0.5}": [0.5, -0.5],
            "{0.3+0.4i,-0.2i,0.7}": [0.3 + 0.4j, -0.2j, 0.7]}


def criterion_7(cfg, _):
    seq = NTSequence(1.0 + 0j)
    devs = {}
    for k, zs in blaschke_family().items():
        zz = np.array(zs, dtype=complex)
        devs[k] = cara.cj_quantities(lambda x: osr.blaschke(zz, x), seq).mutual_max_dev
    consts = []
    for c in (1.0, np.exp(0.7j), -1j):
        r = cara.cj_quantities(lambda x, c=c: c + 0 * x, seq)
        consts.append(max(abs(r.d1), abs(r.d2), abs(r.d3), abs(r.d4)))
    ok = max(devs.values()) <= 1e-4 and max(consts) <= 1e-12
    return _result(7, "Julia-Caratheodory d1..d4", ok, deviations=devs, constant_max=max(consts))


def criterion_8(cfg, cyc):
    forms = 0.0
    z = theta.interior_samples(50, 0.95, cfg.seed + 8)
    K, lat = character_lattice(1, 4)
    for L in (10, cfg.word_length):
        tr = enumerate_words(cyc.presentation, L)
        od = osr.orbit_data(tr, cfg.t0)
        f = cyc.fact if L == cfg.word_length else hardy.factor_martin_derivative(od, tr)
        for _, a in lat:
            ctx = theta.ThetaContext(tr, od, a)
            p1 = theta.poincare_theta(ctx, f.delta, z, "pushforward")
            p2 = theta.poincare_theta(ctx, f.delta, z, "pullback")
            forms = max(forms, float(np.max(np.abs(p1 - p2) / np.abs(p1))))
    trt = enumerate_words(trivial_presentation(), 2)
    odt = osr.orbit_data(trt, cfg.t0)
    ctx = theta.ThetaContext(trt, odt, Character(()))
    fn = lambda x: np.exp(x) * (1 + x ** 3) / 3
    trivial = float(np.max(np.abs(theta.poincare_theta(ctx, fn, z) - fn(z)) / np.abs(fn(z))))
    sup = 0.0
    zs = theta.interior_samples(200)
    for _, a in lat:
        ctx = theta.ThetaContext(cyc.trunc, cyc.od, a)
        sup = max(sup, float(np.max(np.abs(theta.poincare_theta(ctx, cyc.fact.delta, zs)))))
    ok = forms <= 1e-8 and trivial <= 1e-14 and sup <= 1 + 1e-3
    return _result(8, "Theta operator", ok, form_gap=forms, trivial_gap=trivial, sup_abs=sup)


def criterion_9(cfg, _):
    t0 = cfg.t0
    trt = enumerate_words(trivial_presentation(), 2)
    odt = osr.orbit_data(trt, t0)
    f = hardy.factor_martin_derivative(odt, trt)
    ctx = theta.ThetaContext(trt, odt, Character(()))
    gaps = {}
    for n in (1, 2):
        rep = theta.theta_delta_report(ctx, f, delta=lambda x, n=n: (np.conj(t0) * x) ** n)
        gaps[str(n)] = abs(rep["integral1"] + rep["integral2"] - n)
    return _result(9, "Theta integral identity on synthetic inner functions", max(gaps.values()) <= 1e-4,
                   gaps=gaps)


def criterion_10(cfg, cyc):
    fact = cyc.fact
    base = cfg.kernel_settings
    minus = Character((-1 + 0j,))
    ident = kernels.solve_boundary_kernel(kernels.KernelProblem(fact, Character((1 + 0j,)), base))
    s1 = kernels.solve_boundary_kernel(kernels.KernelProblem(fact, minus, base))
    s2 = kernels.solve_boundary_kernel(kernels.KernelProblem(
        fact, minus, kernels.KernelSettings(**{**base.__dict__, "constraint_seed": 1})))
    w = s1._cache["rule"][1]
    unique = float(np.sqrt(np.sum(w * np.abs(s1._cache["h"] - s2._cache["h"]) ** 2)))
    objs = []
    for n in (16, 32, 64, 128):
        st = kernels.KernelSettings(**{**base.__dict__, "constraint_count": n})
        objs.append(kernels.solve_boundary_kernel(kernels.KernelProblem(fact, minus, st)).objective)
    monotone = bool(np.all(np.diff(objs) >= -1e-10))
    fine = kernels.KernelSettings(**{**base.__dict__, "n_panels": 2 * base.n_panels,
                                     "coeff_count": 2 * base.coeff_count})
    s_fine = kernels.solve_boundary_kernel(kernels.KernelProblem(fact, minus, fine))
    stability = abs(s_fine.objective - s1.objective)
    start = time.perf_counter()
    bank = kernels.KernelBank(fact, base, cfg.lattice_size)
    bank.solve_all(bank.characters())
    elapsed = time.perf_counter() - start
    ok = (ident.objective == 0.0 and unique <= 1e-8 and s1.orthogonality_residual <= 1e-6
          and monotone and stability <= 1e-3 and elapsed < 60)
    return _result(10, "Boundary kernel solver", ok, identity_objective=ident.objective,
                   objective=s1.objective, uniqueness=unique,
                   orthogonality=s1.orthogonality_residual, refinement_objectives=objs,
                   monotone=monotone, doubling_gap=stability, runtime_ok=elapsed < 60)


def criterion_11(cfg, cyc):
    trt = enumerate_words(trivial_presentation(), 2)
    ft = hardy.factor_martin_derivative(osr.orbit_data(trt, cfg.t0), trt)
    st = kernels.KernelSettings(coeff_count=64)
    gaps = {str(z): abs(kernels.interior_kernel_value(ft, Character(()), z, st) - 1 / (1 - z * z))
            for z in (0.0, 0.3, 0.6)}
    nb = kernels.np_bound(cyc.bank, Character((1 + 0j,)), 0.3)
    return _result(11, "Interior kernel and NP bound", max(gaps.values()) <= 1e-6 and nb == 1.0,
                   gaps=gaps, np_bound_identity=nb)


def criterion_12(cfg, cyc):
    beta = Character((-1 + 0j,))
    ctx = theta.ThetaContext(cyc.trunc, cyc.od, beta)
    d0, d1, _, _ = hardy.delta_at_t0(cyc.fact)
    bound = float((cfg.t0 * d1 / d0).real)
    datum = theta.BoundaryDatum.from_ratio(cfg.t0, 1.0 + 0j, bound + 1)
    w = theta.construct_interpolant(ctx, cyc.fact, datum)
    rep = cara.main_inequality_check(w, beta, cyc.bank)
    # trivial group with w(z) = z at t0 = 1
    trt = enumerate_words(trivial_presentation(), 1)
    ft = hardy.factor_martin_derivative(osr.orbit_data(trt, 1.0), trt)
    bt = kernels.KernelBank(ft, cfg.kernel_settings, cfg.lattice_size)
    rt = cara.main_inequality_check(lambda x: np.asarray(x, dtype=complex), Character(()), bt,
                                    tol_slack=1e-6)
    ok = rep["min_slack"] >= -1e-2 and rt["min_slack"] == 1.0 and w.report["pass"]
    return _result(12, "Automorphic Caratheodory-Julia inequality", ok, min_slack=rep["min_slack"],
                   min_form=rep["min_form"], interpolant_ratio=rep["ratio"],
                   interpolant_check=w.report["pass"], trivial_slack=rt["min_slack"])


def criterion_13(cfg, cyc):
    rep = kernels.kernel_upper_bound_check(cyc.bank, tol_id=1e-2)
    worst_left = max(r["objective"] - r["candidate"] for r in rep["rows"])
    worst_right = max(r["candidate"] - r["bound"] for r in rep["rows"])
    return _result(13, "Kernel bound chain", rep["pass"], bound=rep["bound"],
                   max_objective_minus_candidate=worst_left,
                   max_candidate_minus_bound=worst_right)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12,
            criterion_13]


def run_suite(cfg=None, only=None):
    cfg = cfg or SuiteConfig()
    cyc = CyclicSetup(cfg)
    results = []
    for fn in CRITERIA:
        num = int(fn.__name__.split("_")[1])
        if only and num not in only:
            continue
        try:
            results.append(fn(cfg, cyc))
        except Exception as exc:  # a crash is a failed criterion, reported as such
            results.append(_result(num, fn.__name__, False, error=f"{type(exc).__name__}: {exc}"))
    return results
