"""Character-weighted theta series built on the Martin-derivative weights."""
from dataclasses import dataclass, field

import numpy as np

from .group import Character, character_on_truncation
from .limits import NTSequence, radial_value_and_derivative
from .moebius import apply
from .quadrature import graded_rule

TOL_ID = 1e-2
TOL_FACT = 1e-3
TOL_LIMIT = 1e-2


class DenominatorVanishes(ZeroDivisionError):
    pass


class AssumptionFailed(RuntimeError):
    pass


class InfeasibleDatum(ValueError):
    pass


@dataclass
class ThetaContext:
    trunc: object
    od: object
    alpha: Character
    alpha_values: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if not self.trunc.inverse_closed:
            raise ValueError("theta series need an inverse-closed truncation")
        if self.alpha_values is None:
            self.alpha_values = character_on_truncation(self.alpha, self.trunc)

    @property
    def t0(self):
        return self.od.t0

    def with_character(self, alpha):
        return ThetaContext(self.trunc, self.od, alpha)

    def weights(self, z):
        """gamma'(t0)/(gamma(t0)-z)^2 per element, shape (n_elements,) + z.shape."""
        z = np.asarray(z, dtype=complex)
        sh = (-1,) + (1,) * z.ndim
        return self.od.derivs.reshape(sh) / (self.od.images.reshape(sh) - z) ** 2

    def denominator(self, z):
        return np.sum(self.weights(z), axis=0)

    def numerator(self, f, z):
        z = np.asarray(z, dtype=complex)
        u = self.trunc.apply_all(z, inverse_maps=True)
        sh = (-1,) + (1,) * z.ndim
        return np.sum(self.alpha_values.reshape(sh) * f(u) * self.weights(z), axis=0)


def _check_denominator(ctx, z, den):
    scale = np.sum(np.abs(ctx.weights(z)), axis=0)
    if np.any(np.abs(den) < 1e-12 * scale):
        bad = np.asarray(z)[np.abs(den) < 1e-12 * scale]
        raise DenominatorVanishes(f"theta denominator vanishes at {bad.ravel()[:3]}")


def poincare_theta(ctx, f, z, form="pushforward"):
    """(P^alpha f)(z) in either of its two equivalent forms.

    pushforward: sum alpha(g) f(g^-1 z) g'(t0)/(g(t0)-z)^2 / sum g'(t0)/(g(t0)-z)^2
    pullback:    sum conj(alpha(g)) f(g z) g'(z)/(g(z)-t0)^2 / sum g'(z)/(g(z)-t0)^2
    """
    z = np.asarray(z, dtype=complex)
    if form == "pushforward":
        den = ctx.denominator(z)
        _check_denominator(ctx, z, den)
        return ctx.numerator(f, z) / den
    if form == "pullback":
        gz = ctx.trunc.apply_all(z)
        w = ctx.trunc.derivative_all(z) / (gz - ctx.t0) ** 2
        sh = (-1,) + (1,) * z.ndim
        num = np.sum(np.conj(ctx.alpha_values).reshape(sh) * f(gz) * w, axis=0)
        return num / np.sum(w, axis=0)
    raise ValueError(f"unknown form {form!r}")


def interior_samples(n, rmax=0.97, seed=11):
    rng = np.random.default_rng(seed)
    return np.sqrt(rng.uniform(0, rmax ** 2, n)) * np.exp(2j * np.pi * rng.uniform(size=n))


def boundary_rule(od, n_panels=64):
    return graded_rule(n_panels, od.limit_angles)


def cj_integrals(w, w0, t0, rule):
    """int |w - w0|^2/|t-t0|^2 and int (1-|w|^2)/|t-t0|^2, both over boundary points of rule."""
    t, q = rule
    wt = w(t)
    dd = (wt - w0) / (t - t0)
    first = float(np.sum(q * np.abs(dd) ** 2))
    second = float(np.sum(q * np.maximum(1 - np.abs(wt) ** 2, 0) / np.abs(t - t0) ** 2))
    return first, second


def measured_character(fn, presentation, samples):
    samples = np.asarray(samples, dtype=complex)
    vals, disp = [], []
    for g in presentation.generators:
        ratio = fn(apply(g, samples)) / fn(samples)
        med = complex(np.median(ratio.real), np.median(ratio.imag))
        vals.append(med)
        disp.append(float(np.max(np.abs(ratio - med))))
    return vals, disp


def theta_delta_report(ctx, fact, n_samples=200, n_panels=64, tol_fact=TOL_FACT,
                       tol_limit=TOL_LIMIT, tol_id=TOL_ID, smalloh=None, delta=None):
    """Checks on P^alpha Delta: sup bound, boundary behaviour at t0 and the integral identity.

    delta: optional replacement for the inner function (used for synthetic checks).
    """
    if smalloh is not None and not smalloh.converged:
        raise AssumptionFailed("small-oh diagnostic did not converge")
    dfun = delta or fact.delta
    t0 = ctx.t0
    P = lambda z: poincare_theta(ctx, dfun, z)
    zs = interior_samples(n_samples)
    sup_abs = float(np.max(np.abs(P(zs))))
    seq = NTSequence(t0)
    d0, d1, e0, e1 = radial_value_and_derivative(dfun, seq)
    p0, p1, _, _ = radial_value_and_derivative(P, seq)
    bound = t0 * d1 / d0
    rule = boundary_rule(ctx.od, n_panels)
    first, second = cj_integrals(P, d0, t0, rule)
    report = {
        "sup_abs": sup_abs,
        "sup_pass": sup_abs <= 1 + tol_fact,
        "delta_t0": d0, "delta_prime": d1,
        "theta_t0": p0, "theta_prime": p1,
        "limits_pass": abs(p0 - d0) <= tol_limit and abs(p1 - d1) <= tol_limit * max(1, abs(d1)),
        "integral1": first, "integral2": second,
        "log_derivative": bound,
        "identity_residual": abs(first + second - bound),
    }
    report["identity_pass"] = report["identity_residual"] <= tol_id
    if ctx.trunc.presentation is not None and ctx.trunc.presentation.rank:
        vals, disp = measured_character(P, ctx.trunc.presentation, 0.5 * zs[:40])
        report["measured_character"] = vals
        report["measured_dispersion"] = disp
    return report


@dataclass(frozen=True)
class BoundaryDatum:
    """Boundary value w0 (unimodular) and angular derivative w0p prescribed at t0."""
    t0: complex
    w0: complex
    w0p: complex

    def __post_init__(self):
        if abs(abs(self.w0) - 1) > 1e-9:
            raise ValueError("w0 must be unimodular")
        q = self.t0 * self.w0p / self.w0
        if q.real < -1e-12 or abs(q.imag) > 1e-9 * max(1, abs(q)):
            raise ValueError("t0 w0p/w0 must be a nonnegative real number")

    @property
    def ratio(self):
        return float((self.t0 * self.w0p / self.w0).real)

    @classmethod
    def from_ratio(cls, t0, w0, ratio):
        return cls(complex(t0), complex(w0), complex(ratio * w0 / t0))


def hyperbolic_pair_map(t0, d):
    """Disk automorphism fixing +-t0 with t0 mu'(t0)/mu(t0) = d >= 0."""
    s = (1 - d) / (1 + d)
    return lambda z: (z + s * t0) / (1 + s * np.conj(t0) * z)


@dataclass
class Interpolant:
    ctx: ThetaContext
    fact: object
    f: object
    w0: complex
    ratio: float
    bound: float

    def inner_times_f(self, z):
        return self.fact.delta(z) * self.f(z)

    def __call__(self, z):
        return poincare_theta(self.ctx, self.inner_times_f, z)


def construct_interpolant(ctx, fact, datum, tol_limit=TOL_LIMIT, tol_fact=TOL_FACT):
    """alpha-automorphic Schur function with w(t0) = w0 and t0 w'(t0)/w(t0) = ratio.

    w = P^alpha(Delta f) with f = f0 conj(t0) mu, mu the automorphism fixing +-t0 whose
    angular log-derivative at t0 supplies the part of the ratio not carried by Delta.
    """
    t0 = ctx.t0
    d0, d1, _, _ = radial_value_and_derivative(fact.delta, NTSequence(t0))
    bound = float((t0 * d1 / d0).real)
    ratio = datum.ratio
    extra = ratio - bound
    if extra < -tol_limit:
        raise InfeasibleDatum(f"ratio {ratio:.6g} below the bound {bound:.6g}")
    extra = max(extra, 0.0)
    f0 = datum.w0 / d0
    mu = hyperbolic_pair_map(t0, extra)
    f = lambda z: f0 * np.conj(t0) * mu(z)
    w = Interpolant(ctx, fact, f, datum.w0, ratio, bound)
    v, dv, _, _ = radial_value_and_derivative(w, NTSequence(t0))
    zs = interior_samples(200)
    w.report = {
        "value": v, "derivative": dv,
        "value_gap": abs(v - datum.w0),
        "ratio_gap": abs(t0 * dv / v - ratio),
        "sup_abs": float(np.max(np.abs(w(zs)))),
        "extra": extra,
    }
    w.report["pass"] = (w.report["value_gap"] <= tol_limit and
                        w.report["ratio_gap"] <= tol_limit * max(1, ratio) and
                        w.report["sup_abs"] <= 1 + tol_fact)
    return w
