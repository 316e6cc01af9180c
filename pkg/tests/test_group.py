import numpy as np
import pytest

from ahardy.group import (Character, CollisionWarning, GroupError, GroupPresentation,
                          character_eval, character_lattice, character_on_truncation,
                          cyclic_presentation, enumerate_words, invert_word, trivial_presentation)
from ahardy.moebius import IDENTITY, MoebiusMap, maps_equal

TWO = GroupPresentation((MoebiusMap.hyperbolic(0.5),
                         MoebiusMap.from_pair(1.1547005383792517, 0.5773502691896258j)))


def test_trivial_truncation_is_identity():
    tr = enumerate_words(trivial_presentation(), 5)
    assert len(tr) == 1 and tr.words == [()]


def test_cyclic_word_count_and_order():
    tr = enumerate_words(cyclic_presentation(), 3)
    assert len(tr) == 7
    assert tr.words == [(), (1,), (-1,), (1, 1), (-1, -1), (1, 1, 1), (-1, -1, -1)]


def test_rank_two_count():
    assert len(enumerate_words(TWO, 2)) == 17


def test_positive_words_only():
    assert enumerate_words(cyclic_presentation(), 3, inverse_closed=False).words == \
        [(), (1,), (1, 1), (1, 1, 1)]


def test_inverse_closed_and_maps_match():
    tr = enumerate_words(TWO, 3)
    words = set(tr.words)
    assert all(invert_word(w) in words for w in words)
    for e in tr.elements:
        assert all(e.word[i] != -e.word[i + 1] for i in range(len(e.word) - 1))


def test_collision_warning_for_non_free_presentation():
    g = MoebiusMap.hyperbolic(0.5)
    pres = GroupPresentation((g, g))
    with pytest.warns(CollisionWarning):
        tr = enumerate_words(pres, 2)
    maps = [e.map for e in tr.elements]
    assert not any(maps_equal(a, b) for i, a in enumerate(maps) for b in maps[i + 1:])


def test_elliptic_and_identity_generators_rejected():
    with pytest.raises(GroupError):
        GroupPresentation((MoebiusMap.rotation(0.4),))
    with pytest.raises(GroupError):
        GroupPresentation((IDENTITY,))


def test_enumeration_deterministic():
    a, b = enumerate_words(TWO, 3), enumerate_words(TWO, 3)
    assert a.words == b.words
    assert all(x.map == y.map for x, y in zip(a.elements, b.elements))


def test_character_examples():
    assert character_eval(Character((1 + 0j,)), (1, -1, 1)) == 1
    assert character_eval(Character((1j,)), (1, 1)) == pytest.approx(-1)
    th = 0.37
    assert character_eval(Character.from_angles([th]), (-1,)) == pytest.approx(np.exp(-1j * th))
    with pytest.raises(IndexError):
        character_eval(Character((1j,)), (2,))
    with pytest.raises(GroupError):
        Character((1.5 + 0j,))


def test_character_homomorphism_on_random_words():
    rng = np.random.default_rng(4)
    chi = Character.from_angles(rng.uniform(0, 2 * np.pi, 2))
    for _ in range(100):
        w1 = tuple(rng.choice([1, -1, 2, -2], rng.integers(0, 6)))
        w2 = tuple(rng.choice([1, -1, 2, -2], rng.integers(0, 6)))
        assert character_eval(chi, w1 + w2) == pytest.approx(character_eval(chi, w1) * character_eval(chi, w2))


def test_character_on_truncation_and_json():
    tr = enumerate_words(cyclic_presentation(), 2)
    vals = character_on_truncation(Character((1j,)), tr)
    assert vals == pytest.approx([1, 1j, -1j, -1, -1])
    chi = Character((np.exp(0.3j),))
    assert Character.from_json(chi.to_json(["g1"]), ["g1"]) == chi


def test_character_lattice():
    K, lat = character_lattice(1, 16)
    assert K == 16 and len(lat) == 16 and lat[0][1].is_identity()
    assert lat[4][1].values[0] == pytest.approx(1j)
    K2, lat2 = character_lattice(3, 32, cap=4096)
    assert K2 == 16 and len(lat2) == 4096
    assert character_lattice(0)[1][0][1].values == ()


def test_presentation_json_round_trip():
    assert GroupPresentation.from_json(TWO.to_json()) == TWO
