"""Extremal boundary kernels, interior kernels and the bounds built from them.

Automorphic functions are represented as g = Theta^alpha(F) / Theta^1(1), where
Theta^alpha(F)(z) = sum alpha(g) F(g^-1 z) g'(t0)/(g(t0)-z)^2 over the truncation.
For the boundary kernel F ranges over Delta_n + (z-t0) sum_k (c_k Delta_n + d_k) z^k with
Delta_n = Delta conj(Delta(t0)), so g(t0) = 1 is automatic. Poles of g at the zeros of
Theta^1(1) (the zeros of m') are removed by hard constraints at one zero per orbit.
Sampled generator automorphy rows and a small Tikhonov term keep the coefficients
from exploiting the finite truncation.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla

from .group import Character, character_lattice, character_on_truncation
from .hardy import delta_at_t0
from .moebius import apply
from .quadrature import graded_rule

TOL_AUTO = 1e-4
TOL_ORTH = 1e-6
TOL_DCT = 1e-3
TOL_ID = 1e-2


class RankDeficient(np.linalg.LinAlgError):
    pass


class NoConvergence(RuntimeError):
    pass


class BoundViolated(AssertionError):
    pass


def thread_count():
    try:
        return max(1, int(os.environ.get("AHARDY_THREADS", "1")))
    except ValueError:
        return 1


def map_ordered(fn, items):
    """Map preserving input order; parallel up to AHARDY_THREADS workers."""
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class KernelSettings:
    n_panels: int = 64           # base panels of the boundary rule (N/64 for a grid of size N)
    coeff_count: int = 32        # M
    constraint_count: int = 64   # circle samples for the generator automorphy rows
    constraint_weight: float = 1.0
    regularization: float = 3e-4
    core_tau: float = 1e-6
    rcond: float = 1e-10
    constraint_seed: int = -1    # >= 0 permutes the constraint rows


@dataclass
class KernelProblem:
    fact: object
    alpha: Character
    settings: KernelSettings = KernelSettings()

    @property
    def t0(self):
        return self.fact.od.t0

    @property
    def presentation(self):
        return self.fact.trunc.presentation


def pole_representatives(fact, tol=1e-6):
    """One zero of m' per orbit, the smallest in modulus, for as many orbits as generators."""
    p = fact.trunc.presentation
    rank = p.rank if p is not None else 0
    zeros = fact.zeros[np.argsort(np.abs(fact.zeros), kind="stable")]
    if rank == 0 or zeros.size == 0:
        return np.array([], dtype=complex)
    gens = list(p.generators)
    from .moebius import inverse
    moves = gens + [inverse(g) for g in gens]
    used = np.zeros(zeros.size, bool)
    reps = []
    for i, a in enumerate(zeros):
        if used[i]:
            continue
        reps.append(a)
        used[i] = True
        frontier = [a]
        for _ in range(fact.trunc.max_word_length + 1):
            nxt = []
            for z in frontier:
                for g in moves:
                    gz = complex(apply(g, z))
                    hit = np.where(~used & (np.abs(zeros - gz) < tol * max(1, abs(gz))))[0]
                    used[hit] = True
                    nxt.extend(zeros[hit])
            frontier = nxt
            if not frontier:
                break
        if len(reps) == rank:
            break
    return np.array(reps, dtype=complex)


def core_samples(fact, count, tau):
    """Circle points where the outermost word-length shell carries relative weight < tau."""
    od = fact.od
    t = np.exp(1j * (2 * np.pi * np.arange(count) / count + 0.1))
    dist2 = np.abs(od.images[:, None] - t[None, :]) ** 2
    terms = od.absderivs[:, None] / dist2
    last = od.lengths == od.lengths.max()
    rel = terms[last].sum(0) / terms.sum(0) if od.lengths.max() > 0 else np.zeros(count)
    keep = (rel < tau) & (np.sqrt(dist2.min(0)) > 1e-6)
    return t[keep]


class _ThetaBasis:
    """Columns Theta^alpha(basis function) evaluated at a fixed set of points."""

    def __init__(self, fact, alpha_values, d0, kind, coeff_count):
        self.fact, self.alpha_values, self.kind, self.M = fact, alpha_values, kind, coeff_count
        self.conj_d0 = np.conj(d0)

    def delta_n(self, u):
        return self.fact.delta(u) * self.conj_d0

    def evaluate(self, pts):
        fact, t0, M = self.fact, self.fact.od.t0, self.M
        od, trunc = fact.od, fact.trunc
        a, b = trunc.coefficients()
        ncol = 2 * M if self.kind == "boundary" else M
        cols = np.zeros((pts.size, ncol), dtype=complex)
        base = np.zeros(pts.size, dtype=complex)
        den = np.zeros(pts.size, dtype=complex)
        k = np.arange(M)
        for e in range(len(trunc)):
            ai, bi = np.conj(a[e]), -b[e]
            u = (ai * pts + bi) / (np.conj(bi) * pts + np.conj(ai))
            w = od.derivs[e] / (od.images[e] - pts) ** 2
            den += w
            aw = self.alpha_values[e] * w
            V = u[:, None] ** k[None, :]
            if self.kind == "boundary":
                dn = self.delta_n(u)
                base += aw * dn
                V = V * (u - t0)[:, None]
                cols[:, :M] += (aw * dn)[:, None] * V
                cols[:, M:] += aw[:, None] * V
            else:
                cols += aw[:, None] * V
        return base, cols, den


def _row_scale(rows):
    if rows.shape[0] == 0:
        return np.ones(0)
    return np.maximum(np.abs(rows).max(axis=1), 1e-300)


def _nullspace_lstsq(A, rhs, C, d, rcond):
    """min ||A y - rhs|| subject to C y = d, by QR of C^H and a least-squares solve."""
    n = A.shape[1]
    if C.shape[0] == 0:
        Z = np.eye(n, dtype=complex)
        cp = np.zeros(n, dtype=complex)
    else:
        Q, R = sla.qr(C.conj().T)
        r = C.shape[0]
        diag = np.abs(np.diag(R[:r, :r]))
        if diag.min() <= rcond * max(diag.max(), 1e-300):
            raise RankDeficient(f"constraint rows are rank deficient, |R_ii| = {diag}")
        cp = Q[:, :r] @ sla.solve_triangular(R[:r, :r], d, trans="C", lower=False)
        Z = Q[:, r:]
    y, *_ , sv = np.linalg.lstsq(A @ Z, rhs - A @ cp, rcond=rcond)
    return cp + Z @ y, Z, cp, sv


@dataclass
class KernelSolution:
    problem: KernelProblem
    coeffs: np.ndarray
    objective: float
    candidate_objective: float = 0.0
    automorphy_residual: float = 0.0
    orthogonality_residual: float = 0.0
    singular_values: np.ndarray = None
    identity: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    def g(self, z):
        z = np.asarray(z, dtype=complex)
        if self.identity:
            return np.ones_like(z)
        basis = self._cache["basis"]
        base, cols, den = basis.evaluate(z.ravel())
        return ((base + cols @ self.coeffs) / den).reshape(z.shape)

    def h(self, z):
        z = np.asarray(z, dtype=complex)
        return (self.g(z) - 1) / (z - self.problem.t0)

    def h_on_rule(self):
        return self._cache.get("h", np.zeros(0))


def _alpha_values(fact, alpha):
    return character_on_truncation(alpha, fact.trunc)


def solve_boundary_kernel(prob, probes=8):
    """Extremal alpha-automorphic g in 1 + (t-t0)H^2 minimising ||(g-1)/(t-t0)||^2."""
    fact, s = prob.fact, prob.settings
    t0 = prob.t0
    rule_t, rule_w = graded_rule(s.n_panels, fact.od.limit_angles)
    if prob.alpha.is_identity():
        sol = KernelSolution(prob, np.zeros(0), 0.0, identity=True)
        sol._cache["h"] = np.zeros(rule_t.size, dtype=complex)
        sol._cache["rule"] = (rule_t, rule_w)
        return sol
    d0 = delta_at_t0(fact)[0]
    basis = _ThetaBasis(fact, _alpha_values(fact, prob.alpha), d0, "boundary", s.coeff_count)
    reps = pole_representatives(fact)
    ts = core_samples(fact, s.constraint_count, s.core_tau)
    gens = prob.presentation.generators
    pairs = [(j, i) for i in range(len(gens)) for j in range(ts.size)]
    if s.constraint_seed >= 0:
        perm = np.random.default_rng(s.constraint_seed).permutation(len(pairs))
        pairs = [pairs[k] for k in perm]
    moved = np.array([complex(apply(gens[i], ts[j])) for j, i in pairs], dtype=complex)
    src = np.array([ts[j] for j, _ in pairs], dtype=complex)
    av = np.array([prob.alpha.values[i] for _, i in pairs], dtype=complex)

    pts = np.concatenate([rule_t, reps, src, moved])
    base, cols, den = basis.evaluate(pts)
    nq, nr, nc = rule_t.size, reps.size, src.size
    G, G0 = cols / den[:, None], base / den
    sl_q = slice(0, nq)
    sl_r = slice(nq, nq + nr)
    sl_s = slice(nq + nr, nq + nr + nc)
    sl_m = slice(nq + nr + nc, None)
    H = G[sl_q] / (rule_t - t0)[:, None]
    h0 = (G0[sl_q] - 1) / (rule_t - t0)
    sw = np.sqrt(rule_w)
    # pole removal: the numerator must vanish at the representative zeros
    scale = _row_scale(cols[sl_r])
    C = cols[sl_r] / scale[:, None]
    d = -base[sl_r] / scale
    Arow = G[sl_m] - av[:, None] * G[sl_s]
    a0 = G0[sl_m] - av * G0[sl_s]
    sm = np.sqrt(s.constraint_weight / max(nc, 1))
    lam = s.regularization if len(fact.trunc) > 1 else 0.0
    ncol = cols.shape[1]
    A = np.vstack([sw[:, None] * H, sm * Arow, lam * np.eye(ncol)])
    rhs = -np.concatenate([sw * h0, sm * a0, np.zeros(ncol)])
    c, Z, cp, sv = _nullspace_lstsq(A, rhs, C, d, s.rcond)
    h = h0 + H @ c
    sol = KernelSolution(prob, c, float(np.sum(rule_w * np.abs(h) ** 2)),
                         candidate_objective=float(np.sum(rule_w * np.abs(h0) ** 2)),
                         automorphy_residual=float(np.max(np.abs(a0 + Arow @ c), initial=0.0)),
                         singular_values=sv)
    sol._cache.update(basis=basis, h=h, H=H, Z=Z, rule=(rule_t, rule_w))
    sol.orthogonality_residual = verify_orthogonality(sol, prob, probes)
    return sol


def _probe_matrix(sol, probes, seed=5):
    Z, H = sol._cache["Z"], sol._cache["H"]
    rng = np.random.default_rng(seed)
    mix = rng.standard_normal((Z.shape[1], probes)) + 1j * rng.standard_normal((Z.shape[1], probes))
    return H @ (Z @ mix)


def orthogonality_of(h, P, w):
    """max over probe columns of |<h, P>| / ||P|| in the weighted boundary inner product."""
    if P.size == 0:
        return 0.0
    inner = np.abs((np.conj(P) * (w * h)[:, None]).sum(0))
    norms = np.sqrt((w[:, None] * np.abs(P) ** 2).sum(0))
    # a zero probe has zero pairing
    return float(np.max(np.where(norms > 0, inner / np.where(norms > 0, norms, 1), 0.0)))


def verify_orthogonality(sol, prob, probes=8):
    """First-order optimality: h is orthogonal to admissible directions (t-t0)^-1 P^alpha((t-t0)q)."""
    if sol.identity:
        return 0.0
    P = _probe_matrix(sol, probes)
    return orthogonality_of(sol._cache["h"], P, sol._cache["rule"][1])


def perturbed_orthogonality(sol, eps, probes=8):
    """Orthogonality residual of h + eps * (first probe direction); grows linearly in eps."""
    P = _probe_matrix(sol, probes)
    w = sol._cache["rule"][1]
    d = P[:, 0] / np.sqrt(np.sum(w * np.abs(P[:, 0]) ** 2))
    return orthogonality_of(sol._cache["h"] + eps * d, P, w)


def minimality_check(sol, trials=20, scale=1e-3, seed=3):
    """Smallest objective change over random admissible perturbations (should be >= 0)."""
    if sol.identity:
        return 0.0
    Z, H = sol._cache["Z"], sol._cache["H"]
    w = sol._cache["rule"][1]
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(trials):
        y = rng.standard_normal(Z.shape[1]) + 1j * rng.standard_normal(Z.shape[1])
        dh = H @ (Z @ y)
        dh *= scale / np.sqrt(np.sum(w * np.abs(dh) ** 2))
        worst = min(worst, float(np.sum(w * np.abs(sol._cache["h"] + dh) ** 2)) - sol.objective)
    return worst


def interior_kernel_value(fact, alpha, z0, settings=KernelSettings()):
    """k^alpha_{z0}(z0): 1 / min ||g||^2 over alpha-automorphic g in H^2 with g(z0) = 1."""
    s = settings
    basis = _ThetaBasis(fact, _alpha_values(fact, alpha), 1.0, "interior", s.coeff_count)
    rule_t, rule_w = graded_rule(s.n_panels, fact.od.limit_angles)
    reps = pole_representatives(fact)
    gens = fact.trunc.presentation.generators if fact.trunc.presentation else ()
    ts = core_samples(fact, s.constraint_count, s.core_tau) if gens else np.zeros(0, complex)
    src = np.concatenate([ts] * len(gens)) if gens else np.zeros(0, complex)
    moved = np.concatenate([apply(g, ts) for g in gens]) if gens else np.zeros(0, complex)
    av = np.concatenate([np.full(ts.size, v) for v in alpha.values]) if gens else np.zeros(0)
    pts = np.concatenate([rule_t, reps, [complex(z0)], src, moved])
    _, cols, den = basis.evaluate(pts)
    nq, nr, nc = rule_t.size, reps.size, src.size
    G = cols / den[:, None]
    C = np.vstack([cols[nq:nq + nr] / _row_scale(cols[nq:nq + nr])[:, None],
                   G[nq + nr:nq + nr + 1]])
    d = np.concatenate([np.zeros(nr), [1.0]]).astype(complex)
    Arow = G[nq + nr + 1 + nc:] - av[:, None] * G[nq + nr + 1:nq + nr + 1 + nc]
    sm = np.sqrt(s.constraint_weight / max(nc, 1))
    lam = s.regularization if len(fact.trunc) > 1 else 0.0
    n = cols.shape[1]
    A = np.vstack([np.sqrt(rule_w)[:, None] * G[:nq], sm * Arow, lam * np.eye(n)])
    c, *_ = _nullspace_lstsq(A, np.zeros(A.shape[0], dtype=complex), C, d, s.rcond)
    norm2 = float(np.sum(rule_w * np.abs(G[:nq] @ c) ** 2))
    return 1.0 / norm2


class KernelBank:
    """Caches boundary-kernel and interior-kernel values per character."""

    def __init__(self, fact, settings=KernelSettings(), K=16):
        self.fact, self.settings = fact, settings
        rank = fact.trunc.presentation.rank if fact.trunc.presentation else 0
        self.K, self.lattice = character_lattice(rank, K)
        self._obj, self._sol, self._interior = {}, {}, {}

    @staticmethod
    def key(alpha):
        return tuple(np.round(np.array(alpha.values), 12).tolist())

    def solution(self, alpha):
        k = self.key(alpha)
        if k not in self._sol:
            self._sol[k] = solve_boundary_kernel(KernelProblem(self.fact, alpha, self.settings))
        return self._sol[k]

    def objective(self, alpha):
        return self.solution(alpha).objective

    def solve_all(self, chars):
        todo = [a for a in chars if self.key(a) not in self._sol]
        sols = map_ordered(lambda a: solve_boundary_kernel(KernelProblem(self.fact, a, self.settings)), todo)
        for a, sol in zip(todo, sols):
            self._sol[self.key(a)] = sol
        return [self.solution(a) for a in chars]

    def interior(self, alpha, z0):
        k = (self.key(alpha), complex(z0))
        if k not in self._interior:
            self._interior[k] = interior_kernel_value(self.fact, alpha, z0, self.settings)
        return self._interior[k]

    def characters(self):
        return [c for _, c in self.lattice]


def np_bound(bank, beta, z0):
    """inf over the character lattice of k^{beta alpha}_{z0}(z0) / k^alpha_{z0}(z0)."""
    ratios = [bank.interior(beta * a, z0) / bank.interior(a, z0) for a in bank.characters()]
    return float(min(ratios))


def cj_lower_bound(bank, beta):
    """sup over lattice alpha of objective(alpha beta) - objective(alpha), and sup objective."""
    chars = bank.characters()
    bank.solve_all(chars + [beta * a for a in chars])
    diffs = [bank.objective(beta * a) - bank.objective(a) for a in chars]
    objs = [bank.objective(a) for a in chars]
    return {"lower_bound": float(max(diffs)), "sup_objective": float(max(objs)),
            "differences": diffs, "objectives": objs}


def kernel_upper_bound_check(bank, tol_id=TOL_ID, raise_on_fail=False):
    """objective(alpha) <= theta candidate objective <= t0 Delta'(t0)/Delta(t0) on the lattice."""
    fact = bank.fact
    d0, d1, _, _ = delta_at_t0(fact)
    bound = float((fact.od.t0 * d1 / d0).real)
    rows = []
    for a, sol in zip(bank.characters(), bank.solve_all(bank.characters())):
        cand = sol.candidate_objective if not sol.identity else _candidate_objective(bank, a)
        ok = sol.objective <= cand + tol_id and cand <= bound + tol_id
        rows.append({"alpha": list(a.values), "objective": sol.objective,
                     "candidate": cand, "bound": bound, "pass": bool(ok)})
        if raise_on_fail and not ok:
            raise BoundViolated(f"bound chain fails for alpha={a.values}")
    return {"bound": bound, "rows": rows, "pass": all(r["pass"] for r in rows)}


def _candidate_objective(bank, alpha):
    """||(P^alpha(Delta_n) - 1)/(t-t0)||^2 on the boundary rule (theta candidate)."""
    fact, s = bank.fact, bank.settings
    rule_t, rule_w = graded_rule(s.n_panels, fact.od.limit_angles)
    d0 = delta_at_t0(fact)[0]
    basis = _ThetaBasis(fact, _alpha_values(fact, alpha), d0, "boundary", 1)
    base, _, den = basis.evaluate(rule_t)
    h0 = (base / den - 1) / (rule_t - fact.od.t0)
    return float(np.sum(rule_w * np.abs(h0) ** 2))


def dct_test(bank, delta_char, probes=8, tol_dct=TOL_DCT):
    """Orthogonality of Delta_n - 1 to delta-automorphic directions, and kernel-candidate gap."""
    fact = bank.fact
    t0 = fact.od.t0
    sol = bank.solution(delta_char)
    rule_t, rule_w = sol._cache["rule"]
    d0 = delta_at_t0(fact)[0]
    hd = (fact.delta(rule_t) * np.conj(d0) - 1) / (rule_t - t0)
    cand = float(np.sum(rule_w * np.abs(hd) ** 2))
    if sol.identity:
        resid = orthogonality_of(hd, np.zeros((rule_t.size, 0)), rule_w)
    else:
        resid = orthogonality_of(hd, _probe_matrix(sol, probes), rule_w)
    gap = abs(sol.objective - cand)
    return {"orthogonality_residual": resid, "objective": sol.objective, "candidate": cand,
            "objective_gap": gap, "pass": bool(resid <= tol_dct and gap <= tol_dct)}
