from dataclasses import replace

import numpy as np
import pytest

from ahardy import hardy, kernels
from ahardy.group import Character

MINUS = Character((-1 + 0j,))
ONE = Character((1 + 0j,))
SETTINGS = kernels.KernelSettings()


def solve(fact, alpha, **kw):
    return kernels.solve_boundary_kernel(kernels.KernelProblem(fact, alpha, replace(SETTINGS, **kw)))


def test_identity_character_is_exactly_zero(cyclic, trivial):
    sol = solve(cyclic[3], ONE)
    assert sol.objective == 0.0 and sol.identity
    z = np.array([0.1, 0.5j])
    assert np.array_equal(sol.g(z), np.ones(2)) and kernels.verify_orthogonality(sol, sol.problem) == 0
    assert solve(trivial[2], Character(())).objective == 0.0


def test_cyclic_minus_one_frozen(bank):
    sol = bank.solution(MINUS)
    assert sol.objective == pytest.approx(2.7977014, rel=1e-6)
    assert sol.orthogonality_residual <= 1e-6
    assert sol.automorphy_residual <= kernels.TOL_AUTO
    assert np.isclose(sol.g(bank.fact.od.t0 * 0.999999), 1, atol=1e-3)


def test_uniqueness_under_constraint_permutation(cyclic, bank):
    s1 = bank.solution(MINUS)
    s2 = solve(cyclic[3], MINUS, constraint_seed=7)
    w = s1._cache["rule"][1]
    assert np.sqrt(np.sum(w * np.abs(s1.h_on_rule() - s2.h_on_rule()) ** 2)) <= 1e-8


def test_minimality_and_first_order_growth(bank):
    sol = bank.solution(MINUS)
    assert kernels.minimality_check(sol) >= -1e-10
    r1 = kernels.perturbed_orthogonality(sol, 1e-3)
    r2 = kernels.perturbed_orthogonality(sol, 1e-2)
    assert r1 > 10 * sol.orthogonality_residual
    assert r2 / r1 == pytest.approx(10, rel=0.05)


def test_monotone_under_constraint_refinement(cyclic):
    objs = [solve(cyclic[3], MINUS, constraint_count=n).objective for n in (16, 32, 64)]
    assert np.all(np.diff(objs) >= -1e-10)


def test_refinement_stability(cyclic, bank):
    fine = solve(cyclic[3], MINUS, n_panels=128, coeff_count=64)
    assert abs(fine.objective - bank.objective(MINUS)) <= 1e-3


def test_interior_kernel_trivial(trivial):
    f = trivial[2]
    st = replace(SETTINGS, coeff_count=64)
    for z0 in (0.0, 0.3, 0.6):
        val = kernels.interior_kernel_value(f, Character(()), z0, st)
        assert val == pytest.approx(1 / (1 - z0 ** 2), abs=1e-6)


def test_interior_identity_dominates(bank):
    top = bank.interior(ONE, 0.3)
    assert all(bank.interior(a, 0.3) <= top + 1e-9 for a in bank.characters())


def test_np_bound(bank, trivial_bank, cyclic):
    assert kernels.np_bound(bank, ONE, 0.3) == 1.0
    assert kernels.np_bound(trivial_bank, Character(()), 0.3) == 1.0
    v16 = kernels.np_bound(bank, MINUS, 0.3)
    v32 = kernels.np_bound(kernels.KernelBank(cyclic[3], SETTINGS, 32), MINUS, 0.3)
    assert 0 < v16 < 1 and abs(v16 - v32) <= 1e-2


def test_cj_lower_bound(bank, trivial_bank):
    assert kernels.cj_lower_bound(bank, ONE)["lower_bound"] == 0.0
    assert kernels.cj_lower_bound(trivial_bank, Character(()))["lower_bound"] == 0.0
    rep = kernels.cj_lower_bound(bank, MINUS)
    assert rep["lower_bound"] >= bank.objective(MINUS)
    # the double sup over beta and alpha recovers sup objective on a lattice containing 1
    double = max(kernels.cj_lower_bound(bank, b)["lower_bound"] for b in bank.characters())
    assert double == pytest.approx(rep["sup_objective"], abs=1e-12)


def test_upper_bound_chain(bank, trivial_bank):
    rep = kernels.kernel_upper_bound_check(bank, tol_id=1e-2)
    assert rep["pass"] and rep["bound"] == pytest.approx(4.4314041646, rel=1e-8)
    first = rep["rows"][0]
    assert first["objective"] == 0 and first["candidate"] <= first["bound"]
    triv = kernels.kernel_upper_bound_check(trivial_bank)
    assert triv["rows"][0]["objective"] == 0 and triv["bound"] == pytest.approx(0, abs=1e-12)
    assert triv["rows"][0]["candidate"] == pytest.approx(0, abs=1e-12)


def test_bound_violation_raises(bank):
    with pytest.raises(kernels.BoundViolated):
        kernels.kernel_upper_bound_check(bank, tol_id=-1.0, raise_on_fail=True)


def test_dct(bank, trivial_bank, cyclic):
    pres, _, _, f = cyclic
    chi = hardy.delta_character(f, pres, 0.5 * np.exp(1j * np.linspace(0, 6, 40)) * 0.8)[0]
    rep = kernels.dct_test(bank, chi)
    assert rep["pass"] and rep["objective_gap"] <= 1e-3
    triv = kernels.dct_test(trivial_bank, Character(()))
    assert triv["orthogonality_residual"] == 0 and triv["objective_gap"] == pytest.approx(0, abs=1e-12)
    assert kernels.orthogonality_of(np.ones(4), np.zeros((4, 1)), np.full(4, 0.25)) == 0


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("AHARDY_THREADS", "3")
    assert kernels.thread_count() == 3
    assert kernels.map_ordered(lambda x: x * x, range(5)) == [0, 1, 4, 9, 16]
    monkeypatch.setenv("AHARDY_THREADS", "bogus")
    assert kernels.thread_count() == 1
