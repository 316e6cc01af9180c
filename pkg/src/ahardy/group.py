"""Free (Schottky-type) groups of disk automorphisms: word enumeration and characters."""
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .moebius import (IDENTITY, TOL_ALG, TOL_MAP, MoebiusMap, classify, compose,
                      inverse)


class GroupError(ValueError):
    pass


class CollisionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class GroupPresentation:
    generators: tuple
    names: tuple = ()
    assume_free: bool = True

    def __post_init__(self):
        if not self.names:
            object.__setattr__(self, "names",
                               tuple(f"g{i + 1}" for i in range(len(self.generators))))
        if len(self.names) != len(self.generators):
            raise GroupError("one name per generator required")
        for name, g in zip(self.names, self.generators):
            kind = classify(g).kind
            if kind == "identity":
                raise GroupError(f"generator {name} is the identity")
            if kind == "elliptic":
                raise GroupError(f"generator {name} is elliptic")

    @property
    def rank(self):
        return len(self.generators)

    def to_json(self):
        return {"generators": [dict(name=n, **g.to_json())
                               for n, g in zip(self.names, self.generators)]}

    @classmethod
    def from_json(cls, d, assume_free=True):
        gens = d.get("generators", [])
        return cls(tuple(MoebiusMap.from_json(g) for g in gens),
                   tuple(g.get("name", f"g{i + 1}") for i, g in enumerate(gens)),
                   assume_free)


def trivial_presentation():
    return GroupPresentation(())


def cyclic_presentation(s=0.5):
    return GroupPresentation((MoebiusMap.hyperbolic(s),))


@dataclass(frozen=True)
class GroupElement:
    word: tuple
    map: MoebiusMap


@dataclass
class Truncation:
    elements: list
    max_word_length: int
    inverse_closed: bool
    presentation: GroupPresentation = None
    _arrays: tuple = field(default=None, repr=False)

    def __len__(self):
        return len(self.elements)

    @property
    def words(self):
        return [e.word for e in self.elements]

    def coefficients(self):
        """Arrays (a, b) of all element maps, in enumeration order."""
        if self._arrays is None:
            self._arrays = (np.array([e.map.a for e in self.elements]),
                            np.array([e.map.b for e in self.elements]))
        return self._arrays

    def word_lengths(self):
        return np.array([len(w) for w in self.words])

    def apply_all(self, z, inverse_maps=False):
        """Matrix of element images, shape (n_elements,) + z.shape."""
        a, b = self.coefficients()
        z = np.asarray(z, dtype=complex)
        if inverse_maps:
            a, b = np.conj(a), -b
        sh = (-1,) + (1,) * z.ndim
        a, b = a.reshape(sh), b.reshape(sh)
        return (a * z + b) / (np.conj(b) * z + np.conj(a))

    def derivative_all(self, z, inverse_maps=False):
        a, b = self.coefficients()
        z = np.asarray(z, dtype=complex)
        if inverse_maps:
            a, b = np.conj(a), -b
        sh = (-1,) + (1,) * z.ndim
        a, b = a.reshape(sh), b.reshape(sh)
        return 1.0 / (np.conj(b) * z + np.conj(a)) ** 2


def _letter_key(i):
    return (abs(i), i < 0)


def _word_key(w):
    return (len(w), [_letter_key(i) for i in w])


def invert_word(w):
    return tuple(-i for i in reversed(w))


def word_map(p, word):
    m = IDENTITY
    for i in word:
        g = p.generators[abs(i) - 1]
        m = compose(m, g if i > 0 else inverse(g))
    return m


def enumerate_words(p, max_word_length, inverse_closed=True, tol_map=TOL_MAP):
    """All freely reduced words up to the given length, ordered by length then letters.

    Without inverse_closed only words in positive letters are produced.
    Words with equal maps are merged, keeping the smallest word.
    """
    if max_word_length < 0:
        raise GroupError("max_word_length must be >= 0")
    n = p.rank
    letters = sorted([i for i in range(1, n + 1)] +
                     ([-i for i in range(1, n + 1)] if inverse_closed else []),
                     key=_letter_key)
    gen_maps = {i: (p.generators[abs(i) - 1] if i > 0 else inverse(p.generators[abs(i) - 1]))
                for i in letters}
    elements = [GroupElement((), IDENTITY)]
    shell = [elements[0]]
    for _ in range(max_word_length):
        nxt = []
        for e in shell:
            for i in letters:
                if e.word and e.word[-1] == -i:
                    continue
                nxt.append(GroupElement(e.word + (i,), compose(e.map, gen_maps[i])))
        nxt.sort(key=lambda e: _word_key(e.word))
        elements.extend(nxt)
        shell = nxt
    elements = _dedup(elements, p.assume_free, tol_map)
    return Truncation(elements, max_word_length, inverse_closed, p)


def _dedup(elements, assume_free, tol_map):
    if len(elements) < 2:
        return elements
    v = np.array([[e.map.a.real, e.map.a.imag, e.map.b.real, e.map.b.imag] for e in elements])
    tree = cKDTree(np.vstack([v, -v]))
    n = len(elements)
    drop = set()
    for i, j in sorted(tree.query_pairs(tol_map)):
        i, j = i % n, j % n
        if i == j:
            continue
        i, j = min(i, j), max(i, j)
        drop.add(j)
        if assume_free:
            warnings.warn(f"words {elements[i].word} and {elements[j].word} give equal maps",
                          CollisionWarning, stacklevel=3)
    return [e for k, e in enumerate(elements) if k not in drop]


@dataclass(frozen=True)
class Character:
    values: tuple

    def __post_init__(self):
        vals = tuple(complex(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        for v in vals:
            if abs(abs(v) - 1) > 1e-9:
                raise GroupError(f"character value {v} is not unimodular")

    @classmethod
    def identity(cls, rank):
        return cls((1 + 0j,) * rank)

    @classmethod
    def from_angles(cls, angles):
        return cls(tuple(np.exp(1j * np.asarray(angles, dtype=float))))

    def __mul__(self, other):
        return Character(tuple(x * y for x, y in zip(self.values, other.values)))

    def is_identity(self):
        return all(v == 1 for v in self.values)

    def to_json(self, names=None):
        names = names or [f"g{i + 1}" for i in range(len(self.values))]
        return {n: [v.real, v.imag] for n, v in zip(names, self.values)}

    @classmethod
    def from_json(cls, d, names):
        missing = [n for n in names if n not in d]
        if missing:
            raise GroupError(f"character misses generators {missing}")
        return cls(tuple(complex(*d[n]) for n in names))


def character_eval(chi, word):
    """Value of the character on a word of signed 1-based generator indices."""
    if isinstance(word, GroupElement):
        word = word.word
    val = 1 + 0j
    for i in word:
        k = abs(i) - 1
        if not 0 <= k < len(chi.values) or i == 0:
            raise IndexError(f"generator index {i} out of range")
        val *= chi.values[k] if i > 0 else np.conj(chi.values[k])
    return val


def character_on_truncation(chi, trunc):
    return np.array([character_eval(chi, w) for w in trunc.words])


def character_lattice(rank, K=16, cap=4096):
    """Deterministic product lattice of characters with values e^{2 pi i k/K}.

    Returns a list of (index tuple, Character). When K^rank exceeds cap, K is reduced.
    """
    while rank and K ** rank > cap:
        K -= 1
    grids = np.stack(np.meshgrid(*[np.arange(K)] * rank, indexing="ij"), -1).reshape(-1, rank) \
        if rank else np.zeros((1, 0), int)
    root = np.exp(2j * np.pi * np.arange(K) / K)
    return K, [(tuple(int(k) for k in row), Character(tuple(root[row]))) for row in grids]
