from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from modforge.geometry import (Transform, TwistAxis, matrix_to_rpy, rot_x, rot_y,
                               rot_z, rpy_to_matrix, twist_exp)

from conftest import series_expm, twist_hat

angles = st.floats(-math.pi, math.pi, allow_nan=False)


def test_identity_compose_inverse():
    t = Transform.from_rpy([0.1, -0.2, 0.3], [0.4, 0.5, -0.6])
    eye = t @ t.inverse()
    assert eye.almost_equal(Transform.identity(), 1e-12)


@given(angles, angles, angles)
def test_rpy_round_trip(r, p, y):
    rot = rpy_to_matrix((r, p, y))
    back = rpy_to_matrix(matrix_to_rpy(rot))
    assert np.max(np.abs(rot - back)) <= 1e-12


@pytest.mark.parametrize("pitch", [math.pi / 2, -math.pi / 2])
def test_rpy_round_trip_gimbal(pitch):
    rot = rot_z(0.3) @ rot_y(pitch) @ rot_x(-0.7)
    back = rpy_to_matrix(matrix_to_rpy(rot))
    assert np.max(np.abs(rot - back)) <= 1e-9


def test_twist_exp_revolute_zero_is_identity():
    assert twist_exp(TwistAxis("revolute"), 0.0).almost_equal(Transform.identity())


def test_twist_exp_prismatic_quarter_meter():
    t = twist_exp(TwistAxis("prismatic"), 0.25)
    assert np.allclose(t.translation, [0.0, 0.0, 0.25], atol=0)
    assert np.array_equal(t.rotation, np.eye(3))


@pytest.mark.parametrize("kind,q", [
    ("revolute", 1.234),
    ("revolute", -2.5),
    ("prismatic", 0.71),
])
def test_twist_exp_matches_series_oracle(kind, q):
    axis = TwistAxis(kind)
    oracle = series_expm(twist_hat(axis.coordinates) * q, terms=30)
    assert np.max(np.abs(twist_exp(axis, q).matrix - oracle)) <= 1e-12


@given(angles, angles)
def test_twist_exp_one_parameter_subgroup(q1, q2):
    axis = TwistAxis("revolute")
    lhs = (twist_exp(axis, q1) @ twist_exp(axis, q2)).matrix
    rhs = twist_exp(axis, q1 + q2).matrix
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_twist_coordinates_fixed_by_kind():
    assert list(TwistAxis("revolute").coordinates) == [0, 0, 0, 0, 0, 1]
    assert list(TwistAxis("prismatic").coordinates) == [0, 0, 1, 0, 0, 0]
    with pytest.raises(ValueError):
        TwistAxis("helical")


def test_orthonormality_defects_flag_bad_rotation():
    bad = Transform(rotation=np.eye(3) * 1.001)
    gram, det = bad.orthonormality_defects()
    assert gram > 1e-12 and det > 1e-12


def test_source_rpy_preserved_bit_exact():
    rpy = (-1.5707963267948966, 0.0, 0.0)
    t = Transform.from_rpy([0, 0, 0.125], rpy)
    assert t.to_json()["rpy"] == list(rpy)
