"""Julia-Caratheodory quantities, Frostman sums and the automorphic inequality."""
from dataclasses import dataclass, field

import numpy as np

from .limits import Divergent, NTSequence, radial_value_and_derivative, richardson
from .moebius import apply
from .orbit_series import blaschke, frostman_blaschke, herglotz_boundary, herglotz_eval
from .quadrature import BoundaryGrid

TOL_SLACK_EXACT = 1e-6
TOL_SLACK_GROUP = 1e-2
TOL_AUTO = 1e-4


class NotSchur(ValueError):
    pass


class NotAutomorphic(ValueError):
    pass


class CJFailed(ValueError):
    pass


def _growing(samples):
    steps = np.abs(np.diff(samples))
    return steps.size > 2 and steps[-1] > steps[0] and steps[-1] > 1e-8 * max(1.0, np.abs(samples).max())


def angular_limits(f, seq):
    z = seq.points
    fz = np.asarray(f(z), dtype=complex)
    if _growing(fz) or _growing(np.diff(fz) / np.diff(z)):
        raise Divergent("successive radial estimates grow")
    value, deriv, verr, derr = radial_value_and_derivative(f, seq)
    if not (np.isfinite(verr) and np.isfinite(derr)) or derr > 1e3 * max(1, abs(deriv)):
        raise Divergent("radial estimates do not settle")
    return {"value": value, "derivative": deriv, "error_bars": (verr, derr)}


@dataclass
class CJReport:
    d1: float
    d2: float
    d3: float
    d4: float
    w_t: complex
    wp_t: complex
    mutual_max_dev: float
    identity_residual: float
    integrals: tuple = (0.0, 0.0)
    julia_ok: bool = True
    extra: dict = field(default_factory=dict)


def _safe_ratio(num, den):
    num, den = np.asarray(num, float), np.asarray(den, float)
    out = np.zeros_like(num)
    ok = den > 0
    out[ok] = num[ok] / den[ok]
    return out


def _schwarz_pick_quotient(w, z):
    return _safe_ratio(np.maximum(1 - np.abs(w(z)) ** 2, 0), 1 - np.abs(z) ** 2)


def stolz_points(t, rho, half_angle=np.pi / 4, count=33):
    """Points t (1 - rho e^{i theta}) with |theta| <= half_angle, inside the disk."""
    th = np.linspace(-half_angle, half_angle, count)
    z = t * (1 - rho * np.exp(1j * th))
    return z[np.abs(z) < 1]


def cj_quantities(w, seq, grid=None, interior=None, tol_alg=1e-12):
    """d1..d4 of Julia-Caratheodory at seq.t, and the boundary integral identity."""
    t = seq.t
    zs = interior if interior is not None else _interior_grid()
    if np.max(np.abs(w(zs))) > 1 + tol_alg:
        raise NotSchur("sampled |w| exceeds 1")
    lim = angular_limits(w, seq)
    w_t, wp_t = lim["value"], lim["derivative"]
    ks = np.arange(seq.k_min, seq.k_max + 1)
    # d1: minima over Stolz-sector shells, extrapolated; never above the radial ray values
    shell_min = [float(np.min(_schwarz_pick_quotient(w, stolz_points(t, 2.0 ** -k)))) for k in ks]
    d1 = richardson(shell_min)[0].real
    radial = _schwarz_pick_quotient(w, seq.points)
    d2 = richardson(radial)[0].real
    q3 = (1 - w(seq.points) * np.conj(w_t)) / (1 - seq.points * np.conj(t))
    d3 = richardson(q3)[0]
    d3 = float(d3.real) if abs(d3.imag) <= 1e-6 * max(1, abs(d3)) else float(abs(d3))
    # d4: smallest d in |(w - w_t)/(z - t)|^2 <= d (1-|w|^2)/(1-|z|^2)
    def julia_ratio(z):
        lhs = np.abs((w(z) - w_t) / (z - t)) ** 2
        return _safe_ratio(lhs, _schwarz_pick_quotient(w, z) * (lhs > 0) + (lhs <= 0))
    d4 = max(float(np.max(julia_ratio(zs))), richardson(julia_ratio(seq.points))[0].real)
    ds = np.array([d1, d2, d3, d4])
    dev = float(np.max(np.abs(ds[:, None] - ds[None, :])))
    grid = grid or BoundaryGrid.avoiding(4096, [t])
    first, second = boundary_integrals(w, w_t, t, grid.points, grid.weights)
    lw = t * wp_t / w_t if abs(w_t) > 0 else 0j
    julia_ok = lw.real >= -1e-8 and abs(lw.imag) <= 1e-6
    return CJReport(d1, d2, d3, d4, w_t, wp_t, dev, abs(first + second - lw.real),
                    (first, second), julia_ok, {"log_derivative": lw})


def boundary_integrals(w, w_t, t, pts, wts):
    """int |w - w_t|^2/|tau-t|^2 (as the square of a divided difference) and int (1-|w|^2)/|tau-t|^2."""
    wv = w(pts)
    dd = (wv - w_t) / (pts - t)
    first = float(np.sum(wts * np.abs(dd) ** 2))
    second = float(np.sum(wts * np.maximum(1 - np.abs(wv) ** 2, 0) / np.abs(pts - t) ** 2))
    return first, second


def _interior_grid(nr=24, nt=96, rmax=0.99):
    r = np.linspace(0.05, rmax, nr)
    th = 2 * np.pi * np.arange(nt) / nt
    return (r[:, None] * np.exp(1j * th[None, :])).ravel()


def frostman_monotone_check(zero_lists, t, full_zeros=None, probe_derivative=3):
    """|w_n'(t)| for nested finite Blaschke products is nondecreasing; bounded case converges.

    The first few angular derivatives are also measured from the functions themselves.
    """
    sums = [frostman_blaschke(z, t)["sum"] for z in zero_lists]
    measured = []
    for z in zero_lists[:probe_derivative]:
        zz = np.asarray(z, dtype=complex)
        lim = angular_limits(lambda x: blaschke(zz, x), NTSequence(t))
        measured.append(abs(lim["derivative"]))
    monotone = bool(np.all(np.diff(sums) >= -1e-12))
    report = {"sums": sums, "measured": measured, "monotone": monotone,
              "measured_gap": float(max((abs(a - b) for a, b in zip(measured, sums)), default=0.0))}
    if full_zeros is not None:
        full = frostman_blaschke(full_zeros, t)["sum"]
        report["full_sum"] = full
        report["limit_gap"] = abs(sums[-1] - full)
    return report


def herglotz_angular_check(atoms, t, seq=None):
    """Radial limit of 4 Im u(z)/(1-|z|^2) against |2 t u'(t)|."""
    seq = seq or NTSequence(t)
    z = seq.points
    q = 4 * herglotz_eval(atoms, z).imag / (1 - np.abs(z) ** 2)
    est = richardson(q)[0].real
    target = abs(2 * t * herglotz_boundary(atoms, t)["derivative"])
    return {"estimate": est, "target": target, "gap": abs(est - target)}


def herglotz_monotone_check(atoms, t):
    derivs = [abs(herglotz_boundary(atoms[:n], t)["derivative"]) for n in range(1, len(atoms) + 1)]
    return {"derivatives": derivs, "monotone": bool(np.all(np.diff(derivs) >= -1e-12))}


def _automorphy_residual(w, beta, presentation, samples):
    worst = 0.0
    for g, b in zip(presentation.generators, beta.values):
        worst = max(worst, float(np.max(np.abs(w(apply(g, samples)) - b * w(samples)))))
    return worst


def main_inequality_check(w, beta, bank, tol_slack=TOL_SLACK_GROUP, tol_auto=TOL_AUTO, samples=None):
    """slack(alpha) = t0 w0'/w0 - (objective(alpha beta) - objective(alpha)) over the lattice.

    The quadratic form of the pairing between (k^{alpha beta}, -conj(w0) k^alpha) and the
    Pick matrix of w is evaluated through divided differences and compared with the slack.
    """
    fact = bank.fact
    t0 = fact.od.t0
    pres = fact.trunc.presentation
    if samples is None:
        rng = np.random.default_rng(17)
        samples = 0.6 * np.sqrt(rng.uniform(size=40)) * np.exp(2j * np.pi * rng.uniform(size=40))
    auto = _automorphy_residual(w, beta, pres, samples) if pres is not None and pres.rank else 0.0
    if auto > tol_auto:
        raise NotAutomorphic(f"automorphy residual {auto:.3g}")
    lim = angular_limits(w, NTSequence(t0))
    w0, w0p = lim["value"], lim["derivative"]
    if abs(abs(w0) - 1) > 1e-2:
        raise CJFailed(f"|w(t0)| = {abs(w0):.6g} is not 1")
    ratio = float((t0 * w0p / w0).real)
    chars = bank.characters()
    bank.solve_all(chars + [a * beta for a in chars])
    rows = []
    for a in chars:
        sa, sab = bank.solution(a), bank.solution(a * beta)
        rule_t, rule_w = sa._cache["rule"]
        ha, hab = sa._cache["h"], sab._cache["h"]
        ga = 1 + (rule_t - t0) * ha
        wv = w(rule_t)
        dw = (wv * np.conj(w0) - 1) / (rule_t - t0)
        q1 = float(np.sum(rule_w * np.abs(hab - ha - dw * ga) ** 2))
        q2 = float(np.sum(rule_w * np.maximum(1 - np.abs(wv) ** 2, 0) * np.abs(ga) ** 2
                          / np.abs(rule_t - t0) ** 2))
        slack = ratio - (sab.objective - sa.objective)
        rows.append({"alpha": list(a.values), "objective_ab": sab.objective,
                     "objective_a": sa.objective, "slack": slack, "form": q1 + q2,
                     "form_gap": abs(q1 + q2 - slack)})
    min_slack = min(r["slack"] for r in rows)
    min_form = min(r["form"] for r in rows)
    return {"ratio": ratio, "rows": rows, "min_slack": min_slack, "min_form": min_form,
            "automorphy_residual": auto,
            "pass": bool(min_slack >= -tol_slack and min_form >= -tol_slack)}


def bound_comparison(bank, delta_char, dct_report=None, tol_id=1e-2):
    """sup objective over the lattice (and at delta), the bound t0 Delta'/Delta, and the gap."""
    from .hardy import delta_at_t0
    fact = bank.fact
    d0, d1, _, _ = delta_at_t0(fact)
    bound = float((fact.od.t0 * d1 / d0).real)
    objs = [s.objective for s in bank.solve_all(bank.characters())]
    lattice_sup = max(objs) if objs else 0.0
    at_delta = bank.objective(delta_char)
    sup_all = max(lattice_sup, at_delta)
    gap = bound - sup_all
    active = bool(dct_report and dct_report.get("pass"))
    return {"lattice_sup": lattice_sup, "objective_at_delta": at_delta, "sup": sup_all,
            "bound": bound, "gap": gap, "assertion_active": active,
            "pass": bool((not active) or abs(gap) <= tol_id)}
