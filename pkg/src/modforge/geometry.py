"""Rigid transforms and joint twists.

Transforms are rotation-matrix + translation pairs. The JSON wire format is
``{"translation": [x, y, z], "rpy": [r, p, y]}`` with fixed-axis XYZ
roll-pitch-yaw, i.e. R = Rz(yaw) @ Ry(pitch) @ Rx(roll), matching URDF
``<origin>`` semantics. A transform parsed from JSON remembers its source
rpy triple so serialization is bit-exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ORTHONORMAL_TOL = 1e-12


def skew(v: np.ndarray) -> np.ndarray:
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rpy_to_matrix(rpy) -> np.ndarray:
    r, p, y = rpy
    return rot_z(y) @ rot_y(p) @ rot_x(r)


def matrix_to_rpy(rot: np.ndarray) -> tuple[float, float, float]:
    """Extract fixed-axis XYZ rpy; at pitch = +-pi/2 yaw is set to 0."""
    sy = math.hypot(rot[0, 0], rot[1, 0])
    if sy > 1e-9:
        r = math.atan2(rot[2, 1], rot[2, 2])
        p = math.atan2(-rot[2, 0], sy)
        y = math.atan2(rot[1, 0], rot[0, 0])
    else:
        r = math.atan2(-rot[1, 2], rot[1, 1])
        p = math.atan2(-rot[2, 0], sy)
        y = 0.0
    return (r, p, y)


class Transform:
    """SE(3) element: x -> rotation @ x + translation."""

    __slots__ = ("rotation", "translation", "_source_rpy")

    def __init__(self, rotation=None, translation=None, source_rpy=None):
        self.rotation = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
        self.translation = (
            np.zeros(3) if translation is None else np.asarray(translation, dtype=float)
        )
        self._source_rpy = tuple(source_rpy) if source_rpy is not None else None

    @classmethod
    def identity(cls) -> "Transform":
        return cls()

    @classmethod
    def from_rpy(cls, translation, rpy) -> "Transform":
        return cls(rpy_to_matrix(rpy), translation, source_rpy=rpy)

    @classmethod
    def from_matrix(cls, mat: np.ndarray) -> "Transform":
        mat = np.asarray(mat, dtype=float)
        return cls(mat[:3, :3], mat[:3, 3])

    @property
    def matrix(self) -> np.ndarray:
        mat = np.eye(4)
        mat[:3, :3] = self.rotation
        mat[:3, 3] = self.translation
        return mat

    def __matmul__(self, other: "Transform") -> "Transform":
        return Transform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "Transform":
        rt = self.rotation.T
        return Transform(rt, -rt @ self.translation)

    def rpy(self) -> tuple[float, float, float]:
        if self._source_rpy is not None:
            return self._source_rpy
        return matrix_to_rpy(self.rotation)

    def almost_equal(self, other: "Transform", tol: float = 1e-12) -> bool:
        return bool(
            np.all(np.abs(self.rotation - other.rotation) <= tol)
            and np.all(np.abs(self.translation - other.translation) <= tol)
        )

    def orthonormality_defects(self) -> tuple[float, float]:
        """Max |R^T R - I| entry and |det(R) - 1|."""
        gram = self.rotation.T @ self.rotation
        return (
            float(np.max(np.abs(gram - np.eye(3)))),
            abs(float(np.linalg.det(self.rotation)) - 1.0),
        )

    def to_json(self) -> dict:
        return {
            "translation": [float(v) for v in self.translation],
            "rpy": [float(v) for v in self.rpy()],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Transform":
        return cls.from_rpy(obj["translation"], obj["rpy"])

    def __repr__(self) -> str:
        t = ", ".join(f"{v:.6g}" for v in self.translation)
        r = ", ".join(f"{v:.6g}" for v in self.rpy())
        return f"Transform(t=[{t}], rpy=[{r}])"


@dataclass(frozen=True)
class TwistAxis:
    """Joint axis in twist coordinates [linear(3); angular(3)].

    Revolute joints rotate about the joint-frame Z axis, prismatic joints
    translate along it, so the coordinate vector is fixed by the kind.
    """

    kind: str  # "revolute" | "prismatic"

    REVOLUTE_COORDS = (0.0, 0.0, 0.0, 0.0, 0.0, 1.0)
    PRISMATIC_COORDS = (0.0, 0.0, 1.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind not in ("revolute", "prismatic"):
            raise ValueError(f"unknown joint kind {self.kind!r}")

    @property
    def coordinates(self) -> np.ndarray:
        if self.kind == "revolute":
            return np.array(self.REVOLUTE_COORDS)
        return np.array(self.PRISMATIC_COORDS)


def twist_exp(axis: TwistAxis, q: float) -> Transform:
    """Closed-form exponential of the joint twist scaled by displacement q."""
    if axis.kind == "revolute":
        return Transform(rot_z(q), np.zeros(3))
    return Transform(np.eye(3), np.array([0.0, 0.0, q]))
