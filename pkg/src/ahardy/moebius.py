"""Disk automorphisms stored as SU(1,1) pairs (a, b).

The map is z -> (a z + b) / (conj(b) z + conj(a)) with |a|^2 - |b|^2 = 1.
All functions accept numpy arrays for the point argument.
"""
from dataclasses import dataclass

import numpy as np

TOL_ALG = 1e-12
TOL_MAP = 1e-9


class InvalidMap(ValueError):
    pass


class PoleAtInput(ValueError):
    pass


@dataclass(frozen=True)
class MoebiusMap:
    a: complex
    b: complex

    def __post_init__(self):
        det = abs(self.a) ** 2 - abs(self.b) ** 2
        # relative check so long words with |a| ~ 1e4 are still accepted
        if abs(det - 1.0) > TOL_ALG * max(1.0, abs(self.a) ** 2):
            raise InvalidMap(f"|a|^2-|b|^2 = {det!r}, expected 1")

    @classmethod
    def from_pair(cls, a, b):
        """Build from an arbitrary pair with positive determinant, renormalising."""
        a, b = complex(a), complex(b)
        det = abs(a) ** 2 - abs(b) ** 2
        if not det > 0:
            raise InvalidMap("pair does not preserve the disk")
        s = np.sqrt(det)
        return cls(a / s, b / s)

    @classmethod
    def hyperbolic(cls, s):
        """Real hyperbolic map z -> (z + s)/(s z + 1), fixed points +-1."""
        a = 1 / np.sqrt(1 - s * s)
        return cls(complex(a), complex(s * a))

    @classmethod
    def rotation(cls, theta):
        return cls(complex(np.exp(0.5j * theta)), 0j)

    def to_json(self):
        return {"a": [self.a.real, self.a.imag], "b": [self.b.real, self.b.imag]}

    @classmethod
    def from_json(cls, d):
        return cls.from_pair(complex(*d["a"]), complex(*d["b"]))

    def __call__(self, z):
        return apply(self, z)


IDENTITY = MoebiusMap(1 + 0j, 0j)


@dataclass(frozen=True)
class MapClass:
    kind: str
    trace_abs: float


def compose(m1, m2):
    """Map z -> m1(m2(z))."""
    a = m1.a * m2.a + m1.b * np.conj(m2.b)
    b = m1.a * m2.b + m1.b * np.conj(m2.a)
    return MoebiusMap.from_pair(a, b)


def inverse(m):
    return MoebiusMap(np.conj(m.a), -m.b)


def _denominator(m, z):
    den = np.conj(m.b) * z + np.conj(m.a)
    if np.any(np.abs(den) < TOL_ALG):
        raise PoleAtInput("pole of the map at the input point")
    return den


def apply(m, z):
    z = np.asarray(z, dtype=complex)
    return (m.a * z + m.b) / _denominator(m, z)


def derivative(m, z):
    z = np.asarray(z, dtype=complex)
    return 1.0 / _denominator(m, z) ** 2


def classify(m, tol=TOL_ALG):
    tr = abs(2 * m.a.real)
    if abs(m.b) <= tol and min(abs(m.a - 1), abs(m.a + 1)) <= tol:
        return MapClass("identity", tr)
    if abs(tr - 2) <= tol:
        kind = "parabolic"
    elif tr > 2:
        kind = "hyperbolic"
    else:
        kind = "elliptic"
    return MapClass(kind, tr)


def maps_equal(m1, m2, tol=TOL_MAP):
    """Equality up to the global sign of (a, b)."""
    plus = max(abs(m1.a - m2.a), abs(m1.b - m2.b))
    minus = max(abs(m1.a + m2.a), abs(m1.b + m2.b))
    return min(plus, minus) <= tol


def fixed_points(m):
    """Fixed points of m, from conj(b) z^2 + (conj(a) - a) z - b = 0."""
    if abs(m.b) < TOL_ALG:
        return np.array([0j]) if abs(m.a.imag) > TOL_ALG else np.array([], dtype=complex)
    return np.roots([np.conj(m.b), np.conj(m.a) - m.a, -m.b])


def transport_residual(m, z, t):
    """Relative mismatch of the Poisson kernel transport identity.

    (1-|m(z)|^2)/|t-m(z)|^2 = (1-|z|^2)/|m^{-1}(t)-z|^2 * |(m^{-1})'(t)|
    """
    mz = apply(m, z)
    mi = inverse(m)
    lhs = (1 - abs(mz) ** 2) / abs(t - mz) ** 2
    rhs = (1 - abs(z) ** 2) / abs(apply(mi, t) - z) ** 2 * abs(derivative(mi, t))
    return abs(lhs - rhs) / abs(lhs)
