"""Radial limits with Richardson extrapolation along z_k = (1 - 2^-k) t."""
from dataclasses import dataclass

import numpy as np


class Divergent(ArithmeticError):
    pass


@dataclass(frozen=True)
class NTSequence:
    t: complex
    k_min: int = 3
    k_max: int = 16

    @property
    def radii(self):
        return 1.0 - 2.0 ** -np.arange(self.k_min, self.k_max + 1)

    @property
    def points(self):
        return self.radii * self.t


def richardson(seq, depth=4):
    """Extrapolate a sequence whose error expands in powers of 2^-k.

    Returns (estimate, error bar) taken from the most stable entry of the last diagonal rows.
    """
    seq = np.asarray(seq, dtype=complex)
    table = [seq]
    for j in range(1, depth + 1):
        prev = table[-1]
        if len(prev) < 2:
            break
        f = 2.0 ** j
        table.append((f * prev[1:] - prev[:-1]) / (f - 1))
    best, err = seq[-1], abs(seq[-1] - seq[-2]) if len(seq) > 1 else np.inf
    for col in table:
        if len(col) < 2:
            continue
        e = np.abs(np.diff(col))
        i = int(np.argmin(e))
        if e[i] < err:
            best, err = col[i + 1], float(e[i])
    return complex(best), float(err)


def radial_value_and_derivative(f, seq, depth=4):
    """Boundary value and angular derivative of f at seq.t from radial samples."""
    z = seq.points
    fz = np.asarray(f(z), dtype=complex)
    value, verr = richardson(fz, depth)
    secants = np.diff(fz) / np.diff(z)
    deriv, derr = richardson(secants, depth)
    if not np.all(np.isfinite(fz)):
        raise Divergent("non-finite samples along the radius")
    return value, deriv, verr, derr
