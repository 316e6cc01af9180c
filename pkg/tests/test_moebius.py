import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ahardy.moebius import (IDENTITY, InvalidMap, MoebiusMap, apply, classify, compose,
                            derivative, fixed_points, inverse, maps_equal, transport_residual)

S_HALF = MoebiusMap.hyperbolic(0.5)


def unit_maps():
    angle = st.floats(0, 2 * np.pi)
    radius = st.floats(0, 0.9)
    return st.builds(lambda th, r, ph: MoebiusMap.from_pair(np.exp(0.5j * th),
                                                            np.exp(0.5j * th) * r * np.exp(1j * ph)),
                     angle, radius, angle)


def test_hyperbolic_coefficients():
    assert S_HALF.a == pytest.approx(1.1547005383792517)
    assert S_HALF.b == pytest.approx(0.5773502691896258)


def test_compose_examples():
    assert maps_equal(compose(IDENTITY, S_HALF), S_HALF)
    assert maps_equal(compose(S_HALF, inverse(S_HALF)), IDENTITY, 1e-12)
    assert apply(compose(S_HALF, S_HALF), 0) == pytest.approx(0.8, abs=1e-14)


def test_inverse_examples():
    assert maps_equal(inverse(IDENTITY), IDENTITY)
    m = MoebiusMap.from_pair(1.2 + 0.3j, 0.4 - 0.5j)
    assert inverse(m).a == np.conj(m.a) and inverse(m).b == -m.b
    assert apply(inverse(S_HALF), 0.5) == pytest.approx(0, abs=1e-15)


def test_apply_and_derivative_examples():
    assert apply(IDENTITY, 0.3 + 0.4j) == 0.3 + 0.4j
    assert apply(S_HALF, 0) == pytest.approx(0.5)
    assert apply(S_HALF, 1) == pytest.approx(1)
    assert derivative(IDENTITY, 0.7j) == 1
    assert derivative(S_HALF, 0) == pytest.approx(0.75)


def test_classify_examples():
    assert classify(IDENTITY).kind == "identity"
    c = classify(S_HALF)
    assert c.kind == "hyperbolic" and c.trace_abs == pytest.approx(2.309401076758503)
    assert classify(MoebiusMap.rotation(0.7)).kind == "elliptic"


def test_invalid_map_rejected():
    with pytest.raises(InvalidMap):
        MoebiusMap(1.0 + 0j, 0.5 + 0j)


def test_fixed_points_of_hyperbolic():
    assert sorted(fixed_points(S_HALF).real) == pytest.approx([-1, 1])


def test_json_round_trip():
    m = MoebiusMap.from_pair(1.2 + 0.3j, 0.4 - 0.5j)
    assert maps_equal(MoebiusMap.from_json(m.to_json()), m, 1e-15)


@settings(max_examples=60, deadline=None)
@given(unit_maps(), unit_maps(), unit_maps(), st.floats(0, 0.95), st.floats(0, 2 * np.pi))
def test_group_axioms_and_chain_rule(m1, m2, m3, r, th):
    z = r * np.exp(1j * th)
    assert maps_equal(compose(compose(m1, m2), m3), compose(m1, compose(m2, m3)))
    assert maps_equal(compose(m1, inverse(m1)), IDENTITY, 1e-12)
    lhs = derivative(compose(m1, m2), z)
    rhs = derivative(m1, apply(m2, z)) * derivative(m2, z)
    assert abs(lhs - rhs) <= 1e-9 * abs(lhs)
    assert abs(apply(m1, z)) <= 1 + 1e-12


@settings(max_examples=60, deadline=None)
@given(unit_maps(), st.floats(0, 0.95), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_transport_and_circle(m, r, th, phi):
    z, t = r * np.exp(1j * th), np.exp(1j * phi)
    assert transport_residual(m, z, t) <= 1e-9
    assert abs(abs(apply(m, t)) - 1) <= 1e-12
    h = 1e-6
    fd = (apply(m, z + h) - apply(m, z - h)) / (2 * h)
    assert abs(fd - derivative(m, z)) <= 1e-6 * abs(derivative(m, z))
