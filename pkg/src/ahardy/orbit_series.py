"""Orbit sums attached to a boundary point t0: Martin function, boundary sums, Blaschke products."""
from dataclasses import dataclass, field

import numpy as np

from .moebius import TOL_ALG, TOL_MAP, fixed_points
from .quadrature import graded_rule

TOL_SERIES = 1e-8
TOL_SMALLOH = 1e-3


class BoundaryFixedPoint(ValueError):
    pass


class NotInverseClosed(ValueError):
    pass


class OrbitPointCollision(ValueError):
    pass


class ZeroOnBoundary(ValueError):
    pass


class AtomCollision(ValueError):
    pass


@dataclass
class SeriesReport:
    value: object
    partial_sums: list = field(default_factory=list)
    converged: bool = False
    tail_estimate: float = 0.0
    extra: dict = field(default_factory=dict)


@dataclass
class OrbitData:
    t0: complex
    images: np.ndarray      # gamma(t0)
    derivs: np.ndarray      # gamma'(t0)
    absderivs: np.ndarray   # |gamma'(t0)|
    lengths: np.ndarray     # word length per row
    tail_estimate: float = 0.0
    shell_sums: np.ndarray = None
    limit_angles: tuple = ()

    @property
    def weights(self):
        """gamma'(t0)/conj(t0) rescaled: |gamma'(t0)| gamma(t0), the residue weights of m'."""
        return self.absderivs * self.images

    def partial_sums(self):
        return np.cumsum(self.shell_sums)


def _shell_tail(shells):
    if len(shells) < 3 or shells[-2] <= 0:
        return 0.0 if len(shells) <= 1 else float(shells[-1])
    q = shells[-1] / shells[-2]
    return float(shells[-1] * q / (1 - q)) if q < 1 else float("inf")


def orbit_data(trunc, t0, tol_map=TOL_MAP):
    t0 = complex(t0)
    if abs(abs(t0) - 1) > TOL_ALG:
        raise ValueError("t0 must be unimodular")
    p = trunc.apply_all(t0)
    d = trunc.derivative_all(t0)
    lengths = trunc.word_lengths()
    moved = np.abs(p - t0)
    if np.any((lengths > 0) & (moved < tol_map)):
        raise BoundaryFixedPoint("t0 is fixed by an element of the truncation")
    c = np.abs(d)
    shells = np.array([c[lengths == k].sum() for k in range(lengths.max() + 1)])
    limit = []
    if trunc.presentation is not None:
        for e in trunc.elements:
            if 0 < len(e.word) <= 2:
                limit.extend(float(np.angle(z)) for z in fixed_points(e.map))
    return OrbitData(t0, p, d, c, lengths, _shell_tail(shells), shells, tuple(sorted(set(limit))))


def synthetic_orbit(t0, images, absderivs):
    """Orbit data from explicit (image, weight) rows; the first row plays the identity."""
    images = np.asarray(images, dtype=complex)
    c = np.asarray(absderivs, dtype=float)
    d = c * images * np.conj(t0)
    lengths = np.arange(len(c))
    return OrbitData(complex(t0), images, d, c, lengths, 0.0, c.copy())


def martin(od, z):
    """Truncated Martin function (i/2) sum (p+z)/(p-z) |gamma'(t0)|."""
    z = np.asarray(z, dtype=complex)
    p = od.images.reshape((-1,) + (1,) * z.ndim)
    c = od.absderivs.reshape(p.shape)
    return 0.5j * np.sum((p + z) / (p - z) * c, axis=0)


def martin_derivative(od, trunc, z, form="at_t0"):
    """Derivative of the Martin function.

    at_t0:   i sum p |gamma'(t0)| / (p - z)^2
    at_zeta: i t0 sum gamma'(z) / (gamma(z) - t0)^2   (needs an inverse-closed truncation)
    """
    z = np.asarray(z, dtype=complex)
    if form == "at_t0":
        p = od.images.reshape((-1,) + (1,) * z.ndim)
        w = od.weights.reshape(p.shape)
        return 1j * np.sum(w / (p - z) ** 2, axis=0)
    if form == "at_zeta":
        if not trunc.inverse_closed:
            raise NotInverseClosed("the at_zeta form pairs each element with its inverse")
        gz = trunc.apply_all(z)
        dz = trunc.derivative_all(z)
        return 1j * od.t0 * np.sum(dz / (gz - od.t0) ** 2, axis=0)
    raise ValueError(f"unknown form {form!r}")


def boundary_sum(od, t, tol_map=TOL_MAP):
    """sum |gamma'(t0)| / |gamma(t0) - t|^2 for boundary (or interior) points t."""
    t = np.asarray(t, dtype=complex)
    p = od.images.reshape((-1,) + (1,) * t.ndim)
    dist = np.abs(p - t)
    if np.any(dist < tol_map):
        raise OrbitPointCollision("evaluation point coincides with an orbit image")
    return np.sum(od.absderivs.reshape(p.shape) / dist ** 2, axis=0)


def green_blaschke(trunc, z0, z):
    """Blaschke product over the orbit of z0, each factor positive at the origin."""
    z = np.asarray(z, dtype=complex)
    q = trunc.apply_all(complex(z0)).ravel()
    return blaschke(q, z)


def blaschke(zeros, z):
    """Finite Blaschke product with factors (z-q)/(1-conj(q)z) * (-conj(q)/|q|)."""
    z = np.asarray(z, dtype=complex)
    q = np.asarray(zeros, dtype=complex).reshape((-1,) + (1,) * z.ndim)
    aq = np.abs(q)
    const = np.where(aq > 0, -np.exp(-1j * np.angle(q)), 1)
    return np.prod((z - q) / (1 - np.conj(q) * z) * const, axis=0)


def widom_log_integral(od, grid_size=4096, refine=True, tol=1e-6):
    """Mean over the circle of log(sum |gamma'(t0)|/|gamma(t0)-t|^2).

    Each orbit pole contributes -log|t-p|^2 whose circle mean is 0; those terms
    are subtracted so the quadrature sees a bounded integrand. Panels are refined
    geometrically toward the generator fixed points where orbit images cluster.
    """
    def one(n):
        t, w = graded_rule(max(n // 16, 4), od.limit_angles)
        p = od.images[:, None]
        dist2 = np.abs(p - t[None, :]) ** 2
        # log(sum c/d2) + sum log d2 = log(sum_j c_j prod_{k != j} d2_k), computed stably
        logd = np.log(dist2)
        lse = np.log(np.sum(od.absderivs[:, None] * np.exp(-(logd - logd.min(0))), axis=0)) - logd.min(0)
        integrand = lse + logd.sum(0)
        return float(np.sum(w * integrand)), float(np.min(lse))

    val, low = one(grid_size)
    delta = abs(one(2 * grid_size)[0] - val) if refine else 0.0
    return SeriesReport(val, [val], delta <= tol, delta, {"min_log_integrand": low})


def frostman_blaschke(zeros, t):
    zeros = np.asarray(zeros, dtype=complex)
    if np.any(np.abs(zeros) >= 1):
        raise ZeroOnBoundary("Blaschke zeros must lie inside the disk")
    s = float(np.sum((1 - np.abs(zeros) ** 2) / np.abs(t - zeros) ** 2))
    return {"sum": s, "boundary_value": complex(blaschke(zeros, t)), "angular_derivative_abs": s}


def herglotz_boundary(atoms, t, tol_map=TOL_MAP):
    """Boundary value and derivative of u(z) = i sum c_k (t_k+z)/(t_k-z) at a circle point."""
    tk = np.array([a[0] for a in atoms], dtype=complex)
    ck = np.array([a[1] for a in atoms], dtype=float)
    if np.any(np.abs(tk - t) < tol_map):
        raise AtomCollision("evaluation point coincides with an atom")
    value = 1j * np.sum((tk + t) / (tk - t) * ck)
    deriv = -2j * np.conj(t) * np.sum(ck / np.abs(tk - t) ** 2)
    return {"value": complex(value), "derivative": complex(deriv)}


def herglotz_eval(atoms, z):
    z = np.asarray(z, dtype=complex)
    tk = np.array([a[0] for a in atoms], dtype=complex).reshape((-1,) + (1,) * z.ndim)
    ck = np.array([a[1] for a in atoms], dtype=float).reshape(tk.shape)
    return 1j * np.sum((tk + z) / (tk - z) * ck, axis=0)


def assumption_smalloh_check(od, t0, radii, tol=TOL_SMALLOH):
    """q(r) = |t0 - r t0| * sum_{gamma != e} |gamma'(t0)|/|gamma(t0) - r t0|^2 along the radius."""
    radii = np.asarray(radii, dtype=float)
    z = radii * t0
    rest = od.lengths > 0
    p = od.images[rest][:, None]
    q = np.abs(t0 - z) * np.sum(od.absderivs[rest][:, None] / np.abs(p - z[None, :]) ** 2, axis=0)
    decreasing = bool(np.all(np.diff(q) <= 0))
    last = float(q[-1]) if q.size else 0.0
    return SeriesReport(last, q.tolist(), decreasing and last <= tol, last)


def chord_ratio(p, r):
    """|p - 1| / |p - r|; bounded by 2 whenever |p| >= 1 and 0 <= r <= 1."""
    return np.abs(p - 1) / np.abs(p - r)


def mprime_automorphy_residual(od, trunc, generators, samples):
    """max |m'(g(z)) g'(z) - m'(z)| / |m'(z)| over generators and sample points."""
    from .moebius import apply, derivative
    base = martin_derivative(od, trunc, samples)
    worst = 0.0
    for g in generators:
        lhs = martin_derivative(od, trunc, apply(g, samples)) * derivative(g, samples)
        worst = max(worst, float(np.max(np.abs(lhs - base) / np.abs(base))))
    return worst
