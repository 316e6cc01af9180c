"""Boundary quadrature rules on the unit circle, normalised to total mass 1."""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BoundaryGrid:
    """Uniform grid t_j = exp(i(2 pi j/N + offset))."""
    size: int
    offset: float = 0.0

    def __post_init__(self):
        if self.size < 2 or self.size & (self.size - 1):
            raise ValueError("grid size must be a power of two")

    @property
    def points(self):
        return np.exp(1j * (2 * np.pi * np.arange(self.size) / self.size + self.offset))

    @property
    def weights(self):
        return np.full(self.size, 1.0 / self.size)

    @classmethod
    def avoiding(cls, size, bad_points, tol=1e-9):
        """Half-spacing offset relative to the first bad point, nudged until clear of all."""
        bad = np.asarray(bad_points, dtype=complex).ravel()
        base = float(np.angle(bad[0])) if bad.size else 0.0
        h = 2 * np.pi / size
        for frac in (0.5, 0.25, 0.75, 0.125, 0.375, 0.625, 0.875):
            g = cls(size, (base + frac * h) % h)
            if not bad.size or np.abs(g.points[:, None] - bad[None, :]).min() > tol:
                return g
        return g


def graded_rule(n_panels, singular_angles=(), levels=24, order=16):
    """Composite Gauss-Legendre rule on [0, 2 pi) with geometric panels at given angles.

    Panels shrink by halves toward each singular angle so that integrands with
    rapidly varying behaviour near isolated boundary points are resolved.
    Returns (points on the circle, weights summing to 1).
    """
    h = 2 * np.pi / n_panels
    bps = set(np.round(np.linspace(0, 2 * np.pi, n_panels + 1)[:-1], 15).tolist())
    for s0 in singular_angles:
        bps.add(float(s0) % (2 * np.pi))
        for k in range(1, levels + 1):
            for sgn in (1, -1):
                bps.add(float(s0 + sgn * h * 2.0 ** (-k)) % (2 * np.pi))
    bps = np.sort(np.array(sorted(bps)))
    bps = bps[np.concatenate([[True], np.diff(bps) > 1e-15])]
    bps = np.append(bps, bps[0] + 2 * np.pi)
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = bps[:-1], bps[1:]
    th = (lo + hi)[:, None] / 2 + (hi - lo)[:, None] / 2 * x[None, :]
    ww = (hi - lo)[:, None] / 2 * w[None, :] / (2 * np.pi)
    return np.exp(1j * th.ravel()), ww.ravel()


def boundary_angles(points):
    return [float(np.angle(p)) for p in np.atleast_1d(points)]
