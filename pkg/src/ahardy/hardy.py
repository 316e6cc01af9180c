"""Hardy-space plumbing and the inner-outer factorisation of the Martin derivative."""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .group import Character
from .limits import NTSequence, radial_value_and_derivative
from .moebius import apply
from .orbit_series import SeriesReport, blaschke, boundary_sum, martin_derivative
from .quadrature import BoundaryGrid

TOL_FACT = 1e-3
TOL_CHAR = 1e-3
TOL_LIMIT = 1e-2


class NonFiniteSample(ValueError):
    pass


class DispersionTooLarge(ValueError):
    pass


@dataclass
class HardyFunction:
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), self.coeffs)


def h2_norm(h):
    return float(np.sqrt(np.sum(np.abs(h.coeffs) ** 2)))


def grid_h2_norm(values, weights):
    """sqrt(sum w |f|^2) for boundary samples with quadrature weights."""
    return float(np.sqrt(np.sum(weights * np.abs(values) ** 2)))


def herglotz_coefficients(logmod):
    """Analytic coefficients G with Re G(t_j) = logmod_j on a uniform grid (offset included).

    The grid offset is carried by passing logmod sampled at t_j; coefficients are for
    powers of z * exp(-i offset) and must be paired with the grid via outer_from_log_modulus.
    """
    u = np.asarray(logmod, dtype=float)
    if not np.all(np.isfinite(u)):
        raise NonFiniteSample("log-modulus samples must be finite")
    n = u.size
    c = np.fft.fft(u) / n
    g = np.zeros(n // 2 + 1, dtype=complex)
    g[0] = c[0].real
    g[1:n // 2] = 2 * c[1:n // 2]
    g[n // 2] = c[n // 2]
    return g


def outer_from_log_modulus(logmod, z, grid=None, log_poles=()):
    """Outer function with boundary log-modulus sampled on a uniform grid, positive at 0.

    log_poles: pairs (p, w) with |p| = 1 whose contributions w*log|t-p|^2 are included in
    logmod and are handled in closed form through (1 - conj(p) z)^(2w).
    """
    z = np.asarray(z, dtype=complex)
    u = np.asarray(logmod, dtype=float).copy()
    grid = grid or BoundaryGrid(u.size)
    t = grid.points
    closed = np.ones_like(z)
    for p, w in log_poles:
        u -= w * np.log(np.abs(t - p) ** 2)
        closed = closed * (1 - np.conj(p) * z) ** (2 * w)
    g = herglotz_coefficients(u)
    rot = np.exp(-1j * grid.offset)
    return np.exp(np.polynomial.polynomial.polyval(z * rot, g)) * closed


def martin_derivative_zeros(od):
    """Zeros in the open disk of the truncated m'(z) = i sum w_j/(p_j - z)^2.

    With u_j = 1/(z - p_j) and v_j = u_j^2 the zero condition is linear in (1, u, v)
    except for the diagonal z, giving a generalised eigenproblem of size 2n+1.
    Roots are polished by Newton steps on F(z) = sum w_j/(z - p_j)^2.
    """
    p, w = od.images, od.weights
    n = p.size
    if n < 2:
        return np.array([], dtype=complex)
    A = np.zeros((2 * n + 1, 2 * n + 1), dtype=complex)
    B = np.zeros_like(A)
    A[0, 1 + n:] = w
    for k in range(n):
        # (z - p_k) u_k = 1 and (z - p_k) v_k = u_k
        A[1 + k, 1 + k] = p[k]
        A[1 + k, 0] = 1
        B[1 + k, 1 + k] = 1
        A[1 + n + k, 1 + n + k] = p[k]
        A[1 + n + k, 1 + k] = 1
        B[1 + n + k, 1 + n + k] = 1
    ev = sla.eig(A, B, right=False)
    ev = ev[np.isfinite(ev) & (np.abs(ev) < 1e8)]
    roots = []
    for z in ev:
        for _ in range(40):
            d = z - p
            f = np.sum(w / d ** 2)
            f1 = np.sum(-2 * w / d ** 3)
            step = f / f1
            z = z - step
            if abs(step) < 1e-15 * max(1, abs(z)):
                break
        roots.append(z)
    roots = np.array(roots)
    roots = roots[np.abs(roots) < 1 - 1e-14]
    # merge duplicates produced by the polishing
    out = []
    for r in roots[np.argsort(np.abs(roots), kind="stable")]:
        if all(abs(r - q) > 1e-10 for q in out):
            out.append(r)
    return np.array(out, dtype=complex)


@dataclass
class Factorization:
    od: object
    trunc: object
    zeros: np.ndarray
    const: complex
    residual_inner: float = 0.0
    residual_bound4: float = 0.0
    sandwich_margin: float = 0.0
    outer_crosscheck: float = 0.0
    zero_count_expected: int = 0
    diagnostics: dict = field(default_factory=dict)

    def delta(self, z):
        return self.const * _plain_blaschke(self.zeros, z)

    def mprime(self, z):
        return martin_derivative(self.od, self.trunc, z)

    def phi(self, z):
        return self.delta(z) / self.mprime(z)

    def delta_log_derivative_t0(self):
        """t0 Delta'(t0)/Delta(t0) as the Frostman sum of the zeros (exact for the truncation)."""
        t0 = self.od.t0
        return float(np.sum((1 - np.abs(self.zeros) ** 2) / np.abs(t0 - self.zeros) ** 2))


def _plain_blaschke(zeros, z):
    z = np.asarray(z, dtype=complex)
    q = np.asarray(zeros, dtype=complex).reshape((-1,) + (1,) * z.ndim)
    return np.prod((z - q) / (1 - np.conj(q) * z), axis=0)


def factor_martin_derivative(od, trunc, grid=None, samples=None):
    """Split m' = Delta/phi with Delta inner and phi outer, phi(0) > 0.

    The truncated m' is rational with double poles on the circle at the orbit images
    and n-1 zeros in the disk; Delta is the Blaschke product over those zeros and
    phi = Delta/m' is zero free. The grid Herglotz construction of phi from the
    boundary sum is kept as an independent cross-check.
    """
    zeros = martin_derivative_zeros(od)
    mp0 = martin_derivative(od, trunc, 0.0)
    b0 = _plain_blaschke(zeros, 0.0)
    const = complex(mp0 / b0)
    const /= abs(const)
    fact = Factorization(od, trunc, zeros, const, zero_count_expected=len(od.images) - 1)

    grid = grid or BoundaryGrid.avoiding(4096, np.append(od.images, od.t0))
    t = grid.points
    fact.residual_inner = float(np.max(np.abs(np.abs(fact.delta(t)) - 1)))
    phi_t = np.abs(fact.delta(t) / fact.mprime(t))
    fact.residual_bound4 = float(max(0.0, np.max(phi_t) - 4))

    if samples is None:
        rng = np.random.default_rng(7)
        samples = np.sqrt(rng.uniform(0, 0.98, 200)) * np.exp(2j * np.pi * rng.uniform(size=200))
    # sandwich |m'|/|Delta| >= sum |gamma'|/|gamma(t0)-z|^2 >= |m'|
    upper = np.abs(fact.mprime(samples)) / np.abs(fact.delta(samples))
    mid = boundary_sum(od, samples)
    lower = np.abs(fact.mprime(samples))
    fact.sandwich_margin = float(min(np.min((upper - mid) / upper), np.min((mid - lower) / mid)))

    # independent outer built from the boundary modulus -log(boundary sum)
    logmod = -np.log(boundary_sum(od, t))
    probe = samples[np.abs(samples) < 0.5]
    outer = outer_from_log_modulus(logmod, probe, grid,
                                   log_poles=[(p, 1.0) for p in od.images])
    fact.outer_crosscheck = float(np.max(np.abs(outer - fact.phi(probe)) / np.abs(fact.phi(probe))))
    return fact


def delta_character(fact, presentation, samples, tol_char=TOL_CHAR, strict=True):
    """Character of Delta measured as the median ratio Delta(g z)/Delta(z) per generator."""
    samples = np.asarray(samples, dtype=complex)
    vals, disp = [], []
    for g in presentation.generators:
        ratio = fact.delta(apply(g, samples)) / fact.delta(samples)
        med = complex(np.median(ratio.real), np.median(ratio.imag))
        med /= abs(med)
        vals.append(med)
        disp.append(float(np.max(np.abs(ratio - med))))
    if strict and disp and max(disp) > tol_char:
        raise DispersionTooLarge(f"ratio dispersion {max(disp):.3g} exceeds {tol_char}")
    return Character(tuple(vals)), disp


def automorphy_moduli_residuals(fact, presentation, samples):
    """Residuals of |phi(g z)| = |phi(z)||g'(z)|, |Delta(g z)| = |Delta(z)| and |phi m'| invariance."""
    from .moebius import derivative
    samples = np.asarray(samples, dtype=complex)
    out = {"phi": 0.0, "delta": 0.0, "phi_mprime": 0.0}
    for g in presentation.generators:
        gz, dg = apply(g, samples), np.abs(derivative(g, samples))
        r1 = np.abs(np.abs(fact.phi(gz)) - np.abs(fact.phi(samples)) * dg) / (np.abs(fact.phi(samples)) * dg)
        r2 = np.abs(np.abs(fact.delta(gz)) - np.abs(fact.delta(samples))) / np.abs(fact.delta(samples))
        pm = lambda z: np.abs(fact.phi(z) * fact.mprime(z))
        r3 = np.abs(pm(gz) - pm(samples)) / pm(samples)
        out["phi"] = max(out["phi"], float(r1.max()))
        out["delta"] = max(out["delta"], float(r2.max()))
        out["phi_mprime"] = max(out["phi_mprime"], float(r3.max()))
    return out


def delta_at_t0(fact, seq=None):
    """Radial estimates of Delta(t0) and Delta'(t0) with error bars."""
    seq = seq or NTSequence(fact.od.t0)
    return radial_value_and_derivative(fact.delta, seq)


def phi_limit_check(fact, t0, radii, tol_limit=TOL_LIMIT):
    """phi(z) i t0 conj(Delta(t0)) / (z - t0)^2 along z = r t0; the limit should be 1."""
    d0, d1, _, _ = delta_at_t0(fact)
    radii = np.asarray(radii, dtype=float)
    z = radii * t0
    ratio = fact.phi(z) * 1j * t0 * np.conj(d0) / (z - t0) ** 2
    first = (ratio - 1) / (z - t0)
    target = d1 * np.conj(d0)
    ok = abs(ratio[-1] - 1) <= tol_limit
    return SeriesReport(complex(ratio[-1]), ratio.tolist(), bool(ok), float(abs(ratio[-1] - 1)),
                        {"first_order": first.tolist(), "first_order_target": target,
                         "first_order_gap": float(abs(first[-1] - target))})
