"""Scenario-driven command line: `ahardy <subcommand> --scenario FILE --out DIR`."""
import argparse
import copy
import csv
import hashlib
import json
import math
import sys
from importlib import resources
import warnings
from dataclasses import asdict, dataclass, is_dataclass
from pathlib import Path

import numpy as np

from . import caratheodory as cara
from . import hardy, kernels, orbit_series as osr, theta
from .acceptance import SuiteConfig, run_suite
from .group import (Character, CollisionWarning, GroupError, GroupPresentation,
                    character_lattice, enumerate_words)
from .limits import NTSequence
from .moebius import classify, fixed_points
from .quadrature import BoundaryGrid

SUBCOMMANDS = ("check-group", "orbit", "martin", "factor", "theta", "kernel", "np-bound",
               "cj", "verify-main", "dct", "acceptance")

DEFAULT_TOLERANCES = {
    "tol_char": hardy.TOL_CHAR, "tol_limit": theta.TOL_LIMIT, "tol_fact": theta.TOL_FACT,
    "tol_id": theta.TOL_ID, "tol_auto": kernels.TOL_AUTO, "tol_orth": kernels.TOL_ORTH,
    "tol_dct": kernels.TOL_DCT, "tol_slack": cara.TOL_SLACK_GROUP, "tol_cj": 1e-4,
    "tol_series": osr.TOL_SERIES,
}
SCENARIO_KEYS = {"presentation", "t0", "zeta0", "characters", "beta", "datum", "L", "N", "M",
                 "radii", "tolerances", "seed", "acceptance"}
ACCEPTANCE_KEYS = {"s", "word_length", "grid_size", "coeff_count", "lattice_size"}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- serialization

def _plain(x):
    if is_dataclass(x) and not isinstance(x, type):
        return _plain(asdict(x))
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (float, np.floating)):
        return float(x)
    if x is None or isinstance(x, str):
        return x
    return str(x)


def _num(x):
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = format(x, ".17g")
    return text if any(c in text for c in ".en") else text + ".0"


def dumps(obj, indent=0):
    """JSON with every float printed to 17 significant digits, keys in insertion order."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    return _num(obj)


def write_json(path, obj):
    path.write_text(dumps(_plain(obj)) + "\n")


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([_num(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


# ---------------------------------------------------------------- scenario

def _complex(value, name):
    if isinstance(value, dict) and set(value) == {"angle"}:
        return complex(np.exp(1j * float(value["angle"])))
    if isinstance(value, (list, tuple)) and len(value) == 2:
        try:
            return complex(float(value[0]), float(value[1]))
        except (TypeError, ValueError):
            pass
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    raise ConfigError(f"field {name}: expected [re, im] or {{\"angle\": x}}, got {value!r}")


def _int(d, key, default):
    v = d.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"field {key}: expected an integer, got {v!r}")
    return v


@dataclass
class Scenario:
    raw: dict
    presentation: GroupPresentation
    t0: complex
    zeta0: complex
    characters: list
    lattice_size: int
    beta: Character
    ratio_excess: float
    ratio: float
    w0: complex
    L: int
    N: int
    M: int
    sequence: NTSequence
    tolerances: dict
    seed: int

    def tol(self, key):
        return self.tolerances[key]

    def upstream_key(self):
        """Content hash of everything the orbit and factorization depend on."""
        src = {"presentation": self.presentation.to_json(), "t0": [self.t0.real, self.t0.imag],
               "L": self.L}
        return hashlib.sha256(dumps(_plain(src)).encode()).hexdigest()[:16]


def parse_scenario(raw):
    if not isinstance(raw, dict):
        raise ConfigError("scenario root must be a JSON object")
    unknown = sorted(set(raw) - SCENARIO_KEYS)
    if unknown:
        raise ConfigError(f"unknown scenario fields {unknown}")
    for key in ("presentation", "t0"):
        if key not in raw:
            raise ConfigError(f"field {key}: missing")
    gens = raw["presentation"].get("generators") if isinstance(raw["presentation"], dict) else None
    if not isinstance(gens, list):
        raise ConfigError("field presentation.generators: expected a list")
    for i, g in enumerate(gens):
        if not isinstance(g, dict) or "a" not in g or "b" not in g:
            raise ConfigError(f"field presentation.generators[{i}]: needs a and b")
        _complex(g["a"], f"presentation.generators[{i}].a")
        _complex(g["b"], f"presentation.generators[{i}].b")
    try:
        pres = GroupPresentation.from_json(raw["presentation"])
    except (GroupError, ValueError) as exc:
        raise ConfigError(f"field presentation: {exc}") from exc
    names = list(pres.names)

    t0 = _complex(raw["t0"], "t0")
    if abs(abs(t0) - 1) > 1e-12:
        raise ConfigError(f"field t0: |t0| = {abs(t0):.17g} is not 1")
    for g, name in zip(pres.generators, names):
        if np.min(np.abs(fixed_points(g) - t0), initial=np.inf) < 1e-9:
            raise ConfigError(f"field t0: fixed by generator {name}")
    zeta0 = _complex(raw.get("zeta0", [0.0, 0.0]), "zeta0")
    if abs(zeta0) >= 1:
        raise ConfigError("field zeta0: must lie in the open disk")

    L, N, M = _int(raw, "L", 16), _int(raw, "N", 4096), _int(raw, "M", 32)
    if L < 0:
        raise ConfigError("field L: must be >= 0")
    if N < 64 or N & (N - 1):
        raise ConfigError(f"field N: {N} is not a power of two >= 64")
    if not 0 < M < N // 2:
        raise ConfigError(f"field M: need 0 < M < N/2, got M={M}, N={N}")

    chars = raw.get("characters", {"lattice": 16})
    try:
        if isinstance(chars, dict) and set(chars) == {"lattice"}:
            K = chars["lattice"]
            if isinstance(K, bool) or not isinstance(K, int) or K < 1:
                raise ConfigError("field characters.lattice: expected a positive integer")
            K, lattice = character_lattice(pres.rank, K)
            characters = [c for _, c in lattice]
        elif isinstance(chars, list) and chars:
            characters = [Character.from_json(c, names) for c in chars]
            K = len(characters)
        else:
            raise ConfigError("field characters: expected {\"lattice\": K} or a non-empty list")
        beta = (Character.from_json(raw["beta"], names) if "beta" in raw
                else Character((-1 + 0j,) * pres.rank))
    except GroupError as exc:
        raise ConfigError(f"field characters/beta: {exc}") from exc

    datum = raw.get("datum", {})
    if not isinstance(datum, dict) or set(datum) - {"w0", "ratio", "ratio_excess"}:
        raise ConfigError("field datum: allowed keys are w0, ratio, ratio_excess")
    w0 = _complex(datum.get("w0", [1.0, 0.0]), "datum.w0")
    if abs(abs(w0) - 1) > 1e-9:
        raise ConfigError("field datum.w0: must be unimodular")
    ratio = datum.get("ratio")
    excess = float(datum.get("ratio_excess", 1.0))

    radii = raw.get("radii", {"k_min": 3, "k_max": 16})
    if not isinstance(radii, dict) or set(radii) - {"k_min", "k_max"}:
        raise ConfigError("field radii: expected {\"k_min\": a, \"k_max\": b}")
    kmin, kmax = _int(radii, "k_min", 3), _int(radii, "k_max", 16)
    if not (1 <= kmin and kmin + 4 <= kmax <= 45):
        raise ConfigError("field radii: need 1 <= k_min, k_min + 4 <= k_max <= 45")

    tols = dict(DEFAULT_TOLERANCES)
    over = raw.get("tolerances", {})
    if not isinstance(over, dict):
        raise ConfigError("field tolerances: expected an object")
    for k, v in over.items():
        if k not in tols:
            raise ConfigError(f"field tolerances.{k}: unknown tolerance")
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0:
            raise ConfigError(f"field tolerances.{k}: expected a positive number")
        tols[k] = float(v)
    acc = raw.get("acceptance", {})
    if not isinstance(acc, dict) or set(acc) - ACCEPTANCE_KEYS:
        raise ConfigError(f"field acceptance: allowed keys are {sorted(ACCEPTANCE_KEYS)}")
    return Scenario(raw, pres, t0, zeta0, characters, K, beta, excess,
                    None if ratio is None else float(ratio), w0, L, N, M,
                    NTSequence(t0, kmin, kmax), tols, _int(raw, "seed", 20240601))


def _set_path(d, dotted, value):
    keys = dotted.split(".")
    for k in keys[:-1]:
        if not isinstance(d.get(k, {}), dict):
            raise ConfigError(f"override {dotted}: {k} is not an object")
        d = d.setdefault(k, {})
    d[keys[-1]] = value


def apply_overrides(raw, overrides):
    raw = copy.deepcopy(raw)
    for item in overrides or ():
        key, sep, text = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"override {item!r}: expected key=value")
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        _set_path(raw, key, value)
    return raw


def bundled_scenario(name):
    """Path of a scenario shipped with the package (trivial, cyclic)."""
    return Path(str(resources.files("ahardy") / "scenarios" / f"{name}.json"))


def load_scenario(path, overrides=()):
    if not Path(path).exists() and bundled_scenario(path).exists():
        path = bundled_scenario(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_scenario(apply_overrides(raw, overrides))


# ---------------------------------------------------------------- stages

class Pipeline:
    """Upstream products for one scenario, with the factorization cached on disk."""

    def __init__(self, sc, out):
        self.sc, self.out = sc, out
        self._trunc = self._od = self._fact = self._bank = None

    @property
    def trunc(self):
        if self._trunc is None:
            self._trunc = enumerate_words(self.sc.presentation, self.sc.L)
        return self._trunc

    @property
    def od(self):
        if self._od is None:
            self._od = osr.orbit_data(self.trunc, self.sc.t0)
        return self._od

    @property
    def settings(self):
        return kernels.KernelSettings(n_panels=max(self.sc.N // 64, 4), coeff_count=self.sc.M)

    @property
    def fact(self):
        if self._fact is None:
            cache = self.out / "cache" / f"factor-{self.sc.upstream_key()}.json"
            fields = ("residual_inner", "residual_bound4", "sandwich_margin", "outer_crosscheck")
            if cache.exists():
                d = json.loads(cache.read_text())
                zeros = np.array([complex(*z) for z in d["zeros"]], dtype=complex)
                self._fact = hardy.Factorization(self.od, self.trunc, zeros, complex(*d["const"]),
                                                 zero_count_expected=len(self.od.images) - 1,
                                                 **{k: d[k] for k in fields})
            else:
                grid = BoundaryGrid.avoiding(self.sc.N, np.append(self.od.images, self.sc.t0))
                self._fact = hardy.factor_martin_derivative(self.od, self.trunc, grid)
                cache.parent.mkdir(parents=True, exist_ok=True)
                d = {"zeros": self._fact.zeros, "const": self._fact.const,
                     **{k: getattr(self._fact, k) for k in fields}}
                write_json(cache, d)
        return self._fact

    @property
    def bank(self):
        if self._bank is None:
            self._bank = kernels.KernelBank(self.fact, self.settings, self.sc.lattice_size)
            self._bank.lattice = [(i, c) for i, c in enumerate(self.sc.characters)]
        return self._bank

    def theta_context(self, alpha):
        return theta.ThetaContext(self.trunc, self.od, alpha)

    def delta_char(self):
        if not self.sc.presentation.rank:
            return Character(())
        samples = 0.5 * theta.interior_samples(40, seed=self.sc.seed)
        return hardy.delta_character(self.fact, self.sc.presentation, samples,
                                     self.sc.tol("tol_char"))[0]

    def interpolant(self):
        sc = self.sc
        d0, d1, _, _ = hardy.delta_at_t0(self.fact, sc.sequence)
        bound = float((sc.t0 * d1 / d0).real)
        ratio = sc.ratio if sc.ratio is not None else bound + sc.ratio_excess
        datum = theta.BoundaryDatum.from_ratio(sc.t0, sc.w0, ratio)
        return theta.construct_interpolant(self.theta_context(sc.beta), self.fact, datum,
                                           sc.tol("tol_limit"), sc.tol("tol_fact"))


def _char_params(alpha):
    return [float(np.angle(v)) for v in alpha.values]


def stage_check_group(p, out):
    sc = p.sc
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", CollisionWarning)
        trunc = p.trunc
    collisions = [str(w.message) for w in caught if issubclass(w.category, CollisionWarning)]
    lengths = trunc.word_lengths()
    gens = [{"name": n, "kind": classify(g).kind, "trace_abs": classify(g).trace_abs,
             "fixed_points": list(fixed_points(g))}
            for n, g in zip(sc.presentation.names, sc.presentation.generators)]
    write_csv(out / "words.csv", ["word", "length", "a_re", "a_im", "b_re", "b_im"],
              [[" ".join(map(str, e.word)), len(e.word), e.map.a.real, e.map.a.imag,
                e.map.b.real, e.map.b.imag] for e in trunc.elements])
    return {"generators": gens, "rank": sc.presentation.rank, "element_count": len(trunc),
            "count_by_length": np.bincount(lengths, minlength=sc.L + 1).tolist(),
            "collisions": collisions, "pass": not collisions}


def _series_report(od, tol):
    partial = od.partial_sums()
    return {"value": float(partial[-1]), "tail_estimate": od.tail_estimate,
            "converged": bool(od.tail_estimate <= tol * max(1.0, partial[-1])),
            "partial_sums": partial}


def stage_orbit(p, out):
    od = p.od
    write_csv(out / "orbit.csv", ["word", "length", "p_re", "p_im", "abs_derivative"],
              [[" ".join(map(str, e.word)), len(e.word), z.real, z.imag, c]
               for e, z, c in zip(p.trunc.elements, od.images, od.absderivs)])
    rep = _series_report(od, p.sc.tol("tol_series"))
    rep["widom_log_integral"] = osr.widom_log_integral(od, p.sc.N)
    rep["pass"] = rep["converged"] and rep["widom_log_integral"].converged
    return rep


def stage_martin(p, out):
    sc, od = p.sc, p.od
    z = sc.sequence.points
    m = osr.martin(od, z)
    m1 = osr.martin_derivative(od, p.trunc, z, "at_t0")
    m2 = osr.martin_derivative(od, p.trunc, z, "at_zeta")
    write_csv(out / "martin_ray.csv", ["r", "m_re", "m_im", "mprime_re", "mprime_im"],
              [[float(abs(zz)), a.real, a.imag, b.real, b.imag] for zz, a, b in zip(z, m, m1)])
    zs = theta.interior_samples(50, 0.95, sc.seed)
    a = osr.martin_derivative(od, p.trunc, zs, "at_t0")
    b = osr.martin_derivative(od, p.trunc, zs, "at_zeta")
    gap = float(np.max(np.abs(a - b) / np.abs(a)))
    ray_gap = float(np.max(np.abs(m1 - m2) / np.abs(m1)))
    rep = _series_report(od, sc.tol("tol_series"))
    return {"tail_estimate": rep["tail_estimate"], "converged": rep["converged"],
            "martin_at_zero": complex(osr.martin(od, 0.0)),
            "two_form_gap": gap, "two_form_gap_ray": ray_gap,
            "pass": bool(gap <= 1e-8)}


def stage_factor(p, out):
    sc, f = p.sc, p.fact
    grid = BoundaryGrid.avoiding(sc.N, np.append(p.od.images, sc.t0))
    t = grid.points
    write_csv(out / "factor_grid.csv", ["t_re", "t_im", "abs_mprime", "abs_phi", "abs_delta"],
              [[x.real, x.imag, a, b, c] for x, a, b, c in
               zip(t, np.abs(f.mprime(t)), np.abs(f.phi(t)), np.abs(f.delta(t)))])
    phi0 = complex(f.phi(0.0))
    widom = osr.widom_log_integral(p.od, sc.N).value
    lim = hardy.phi_limit_check(f, sc.t0, sc.sequence.radii, sc.tol("tol_limit"))
    rep = {"zero_count": len(f.zeros), "zero_count_expected": f.zero_count_expected,
           "residual_inner": f.residual_inner, "residual_bound4": f.residual_bound4,
           "sandwich_margin": f.sandwich_margin, "outer_crosscheck": f.outer_crosscheck,
           "phi_at_zero": phi0, "widom_log_integral": widom,
           "widom_gap": abs(widom + math.log(phi0.real)),
           "delta_log_derivative_t0": f.delta_log_derivative_t0(),
           "phi_limit": lim.value, "phi_limit_pass": lim.converged}
    if sc.presentation.rank:
        samples = 0.5 * theta.interior_samples(40, seed=sc.seed)
        chi, disp = hardy.delta_character(f, sc.presentation, samples, sc.tol("tol_char"), strict=False)
        rep["delta_character"] = chi.to_json(list(sc.presentation.names))
        rep["delta_character_dispersion"] = disp
        rep["automorphy_moduli"] = hardy.automorphy_moduli_residuals(f, sc.presentation, samples)
    rep["pass"] = bool(f.residual_inner <= 1e-8 and f.sandwich_margin >= -1e-12
                       and len(f.zeros) == f.zero_count_expected and lim.converged)
    return rep


def stage_theta(p, out):
    sc = p.sc
    rows, reports = [], []
    for alpha in sc.characters:
        r = theta.theta_delta_report(p.theta_context(alpha), p.fact, n_panels=p.settings.n_panels,
                                     tol_fact=sc.tol("tol_fact"), tol_limit=sc.tol("tol_limit"),
                                     tol_id=sc.tol("tol_id"))
        reports.append({"alpha": alpha.to_json(list(sc.presentation.names)), **r})
        rows.append(_char_params(alpha) + [r["sup_abs"], r["integral1"], r["integral2"],
                                           r["identity_residual"]])
    names = [f"angle_{n}" for n in sc.presentation.names]
    write_csv(out / "theta.csv", names + ["sup_abs", "integral1", "integral2", "identity_residual"], rows)
    return {"reports": reports, "pass": all(r["sup_pass"] for r in reports)}


def stage_kernel(p, out):
    sc = p.sc
    sols = p.bank.solve_all(sc.characters)
    chain = kernels.kernel_upper_bound_check(p.bank, sc.tol("tol_id"))
    names = [f"angle_{n}" for n in sc.presentation.names]
    write_csv(out / "kernels.csv", names + ["objective", "candidate", "automorphy_residual",
                                            "orthogonality_residual"],
              [_char_params(a) + [s.objective, r["candidate"], s.automorphy_residual,
                                  s.orthogonality_residual]
               for a, s, r in zip(sc.characters, sols, chain["rows"])])
    ortho = max(s.orthogonality_residual for s in sols)
    auto = max(s.automorphy_residual for s in sols)
    return {"objectives": [s.objective for s in sols], "bound": chain["bound"],
            "chain_pass": chain["pass"], "max_orthogonality_residual": ortho,
            "max_automorphy_residual": auto,
            "pass": bool(chain["pass"] and ortho <= sc.tol("tol_orth") and auto <= sc.tol("tol_auto"))}


def stage_np_bound(p, out):
    sc = p.sc
    chars = sc.characters
    vals = [(p.bank.interior(a, sc.zeta0), p.bank.interior(sc.beta * a, sc.zeta0)) for a in chars]
    names = [f"angle_{n}" for n in sc.presentation.names]
    write_csv(out / "interior_kernels.csv", names + ["k_alpha", "k_alpha_beta", "ratio"],
              [_char_params(a) + [x, y, y / x] for a, (x, y) in zip(chars, vals)])
    bound = kernels.np_bound(p.bank, sc.beta, sc.zeta0)
    ok = bool(np.isfinite(bound) and bound > 0 and all(x > 0 and y > 0 for x, y in vals))
    return {"zeta0": sc.zeta0, "beta": sc.beta.to_json(list(sc.presentation.names)),
            "np_bound": bound, "pass": ok}


def stage_cj(p, out):
    sc = p.sc
    w = p.interpolant()
    grid = BoundaryGrid.avoiding(sc.N, [sc.t0])
    rep = cara.cj_quantities(w, sc.sequence, grid, tol_alg=sc.tol("tol_fact"))
    d = {"d1": rep.d1, "d2": rep.d2, "d3": rep.d3, "d4": rep.d4, "w_t": rep.w_t, "wp_t": rep.wp_t,
         "mutual_max_dev": rep.mutual_max_dev, "identity_residual": rep.identity_residual,
         "integrals": rep.integrals, "julia_ok": rep.julia_ok, "interpolant": w.report}
    d["pass"] = bool(w.report["pass"] and rep.julia_ok and rep.mutual_max_dev <= sc.tol("tol_cj"))
    return d


def stage_verify_main(p, out):
    sc = p.sc
    w = p.interpolant()
    rep = cara.main_inequality_check(w, sc.beta, p.bank, sc.tol("tol_slack"), sc.tol("tol_auto"))
    names = [f"angle_{n}" for n in sc.presentation.names]
    write_csv(out / "slack.csv", names + ["objective_ab", "objective_a", "slack", "form"],
              [[float(np.angle(v)) for v in r["alpha"]] +
               [r["objective_ab"], r["objective_a"], r["slack"], r["form"]] for r in rep["rows"]])
    return {k: rep[k] for k in ("ratio", "min_slack", "min_form", "automorphy_residual", "pass")} | \
        {"interpolant": w.report}


def stage_dct(p, out):
    sc = p.sc
    chi = p.delta_char()
    rep = kernels.dct_test(p.bank, chi, tol_dct=sc.tol("tol_dct"))
    cmp_ = cara.bound_comparison(p.bank, chi, rep, sc.tol("tol_id"))
    return {"delta_character": chi.to_json(list(sc.presentation.names)), "dct": rep,
            "comparison": cmp_, "pass": cmp_["pass"]}


def stage_acceptance(p, out):
    sc = p.sc
    cfg = SuiteConfig(t0=sc.t0, seed=sc.seed, **sc.raw.get("acceptance", {}))
    results = run_suite(cfg)
    write_csv(out / "acceptance.csv", ["id", "title", "passed"],
              [[r["id"], r["title"], r["passed"]] for r in results])
    return {"criteria": results, "pass": all(r["passed"] for r in results)}


STAGES = {"check-group": stage_check_group, "orbit": stage_orbit, "martin": stage_martin,
          "factor": stage_factor, "theta": stage_theta, "kernel": stage_kernel,
          "np-bound": stage_np_bound, "cj": stage_cj, "verify-main": stage_verify_main,
          "dct": stage_dct, "acceptance": stage_acceptance}


# ---------------------------------------------------------------- entry point

def run(subcommand, scenario, out_dir, overrides=()):
    """Run one stage; returns the exit code (0 pass, 1 failed check, 2 config error)."""
    try:
        sc = load_scenario(scenario, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = subcommand.replace("-", "_")
    try:
        report = STAGES[subcommand](Pipeline(sc, out), out)
    except (ArithmeticError, ValueError, RuntimeError, AssertionError, np.linalg.LinAlgError) as exc:
        report = {"pass": False, "error": f"{type(exc).__name__}: {exc}"}
    report = {"subcommand": subcommand, **report}
    write_json(out / f"{name}.json", report)
    print(f"{subcommand}: {'pass' if report['pass'] else 'FAIL'} -> {out / (name + '.json')}")
    return 0 if report["pass"] else 1


def build_parser():
    ap = argparse.ArgumentParser(prog="ahardy", description=__doc__)
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--scenario", required=True, help="scenario JSON file or a bundled name (trivial, cyclic)")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                    help="dotted scenario key with a JSON value, repeatable")
    return ap


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return run(args.subcommand, args.scenario, args.out, args.override)


if __name__ == "__main__":
    sys.exit(main())
