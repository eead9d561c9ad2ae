"""Robot geometry, quaternion algebra and the constraint equations.

Everything here is a pure function of immutable values. Lengths are
normalized to a platform edge of 1 and a base circumradius of 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError

SQRT3 = math.sqrt(3.0)

CANONICAL_TOLERANCE = 1e-12
UNIT_NORM_REJECT = 1e-6

JOINT_NAMES = ("rho1y", "rho1z", "rho2y", "rho2z", "rho3y", "rho3z")
POSE_NAMES = ("x", "y", "z", "q1", "q2", "q3", "q4")


def canonicalize(q: np.ndarray) -> np.ndarray:
    """Pick the representative of {q, -q}.

    q1 > 0 wins; when |q1| is within 1e-12 of zero the first component of
    (q2, q3, q4) whose magnitude exceeds 1e-12 is made positive.
    """
    q = np.asarray(q, dtype=float)
    if abs(q[0]) > CANONICAL_TOLERANCE:
        return q if q[0] > 0 else -q
    for value in q[1:]:
        if abs(value) > CANONICAL_TOLERANCE:
            return q if value > 0 else -q
    return q


@dataclass(frozen=True)
class UnitQuaternion:
    """Orientation (q1, q2, q3, q4), scalar first, canonical sign."""

    q1: float
    q2: float
    q3: float
    q4: float

    def __post_init__(self) -> None:
        """Reject far-from-unit input, then normalize and canonicalize."""
        values = np.array([self.q1, self.q2, self.q3, self.q4], dtype=float)
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("quaternion components must be finite", components=values.tolist())
        norm = float(np.linalg.norm(values))
        if abs(norm - 1.0) > UNIT_NORM_REJECT:
            raise InvalidInputError("quaternion is not unit norm", norm=norm)
        values = canonicalize(values / norm)
        for name, value in zip(("q1", "q2", "q3", "q4"), values):
            object.__setattr__(self, name, float(value))

    @classmethod
    def identity(cls) -> "UnitQuaternion":
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_array(cls, values: Sequence[float], normalize: bool = False) -> "UnitQuaternion":
        """Build from four components.

        Args:
            values: (q1, q2, q3, q4)
            normalize: Scale arbitrary nonzero input onto the unit sphere first
        """
        arr = np.asarray(values, dtype=float).reshape(4)
        if normalize:
            norm = float(np.linalg.norm(arr))
            if not np.isfinite(norm) or norm == 0.0:
                raise InvalidInputError("cannot normalize quaternion", components=arr.tolist())
            arr = arr / norm
        return cls(*arr)

    @classmethod
    def from_axis_angle(cls, axis: Sequence[float], angle: float) -> "UnitQuaternion":
        """Rotation by ``angle`` radians about ``axis``."""
        axis = np.asarray(axis, dtype=float)
        norm = float(np.linalg.norm(axis))
        if norm == 0.0:
            raise InvalidInputError("rotation axis must be nonzero")
        half = 0.5 * angle
        return cls.from_array(np.concatenate([[math.cos(half)], math.sin(half) * axis / norm]))

    def as_array(self) -> np.ndarray:
        return np.array([self.q1, self.q2, self.q3, self.q4])

    def multiply(self, other: "UnitQuaternion") -> "UnitQuaternion":
        """Hamilton product ``self ⊗ other``."""
        return UnitQuaternion.from_array(quaternion_multiply(self.as_array(), other.as_array()), normalize=True)

    def geodesic(self, other: "UnitQuaternion") -> float:
        """Angle on the 3-sphere between this and the closer of ±other."""
        a = self.as_array()
        b = other.as_array()
        if float(a @ b) < 0.0:
            b = -b
        return 2.0 * math.atan2(float(np.linalg.norm(a - b)), float(np.linalg.norm(a + b)))


def quaternion_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product of two scalar-first quaternions."""
    aw, av = a[0], np.asarray(a[1:])
    bw, bv = b[0], np.asarray(b[1:])
    scalar = aw * bw - av @ bv
    vector = aw * bv + bw * av + np.cross(av, bv)
    return np.concatenate([[scalar], vector])


def _require_finite(values: Iterable[float], what: str) -> None:
    values = list(values)
    if not all(math.isfinite(v) for v in values):
        raise InvalidInputError(f"{what} must be finite", values=values)


@dataclass(frozen=True)
class Pose:
    """Platform reference point (x, y, z) plus orientation."""

    x: float
    y: float
    z: float
    orientation: UnitQuaternion

    def __post_init__(self) -> None:
        _require_finite((self.x, self.y, self.z), "pose coordinates")
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "Pose":
        """Build from (x, y, z, q1, q2, q3, q4)."""
        arr = np.asarray(values, dtype=float).reshape(7)
        return cls(arr[0], arr[1], arr[2], UnitQuaternion.from_array(arr[3:]))

    @classmethod
    def home(cls) -> "Pose":
        """Reference configuration with every actuated joint at zero."""
        return cls(1.0 / SQRT3, 0.0, 0.0, UnitQuaternion.identity())

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.position, self.orientation.as_array()])

    def to_dict(self) -> dict[str, float]:
        return dict(zip(POSE_NAMES, (float(v) for v in self.as_array())))


def pose_distance(a: Pose, b: Pose) -> float:
    """Euclidean position distance plus quaternion geodesic."""
    return float(np.linalg.norm(a.position - b.position)) + a.orientation.geodesic(b.orientation)


@dataclass(frozen=True)
class ActuatedJoints:
    """The six actuated prismatic displacements, in constraint-equation order."""

    rho1y: float
    rho1z: float
    rho2y: float
    rho2z: float
    rho3y: float
    rho3z: float

    def __post_init__(self) -> None:
        _require_finite(self.as_tuple(), "actuated joints")
        for name in JOINT_NAMES:
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "ActuatedJoints":
        arr = np.asarray(values, dtype=float).reshape(6)
        return cls(*arr)

    @classmethod
    def zeros(cls) -> "ActuatedJoints":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in JOINT_NAMES)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple())

    def to_dict(self) -> dict[str, float]:
        return dict(zip(JOINT_NAMES, self.as_tuple()))


@dataclass(frozen=True)
class RobotGeometry:
    """Fixed geometry of the delta-base 3-PPPS robot."""

    base_anchors: tuple[tuple[float, float, float], ...] = (
        (2.0, 0.0, 0.0),
        (-1.0, SQRT3, 0.0),
        (-1.0, -SQRT3, 0.0),
    )
    platform_vertices: tuple[tuple[float, float, float], ...] = (
        (0.0, 0.0, 0.0),
        (-SQRT3 / 2.0, 0.5, 0.0),
        (-SQRT3 / 2.0, -0.5, 0.0),
    )
    # (cos, sin) of the leg-frame rotations 0, 2π/3, −2π/3 about z
    leg_frames: tuple[tuple[float, float], ...] = (
        (1.0, 0.0),
        (-0.5, SQRT3 / 2.0),
        (-0.5, -SQRT3 / 2.0),
    )

    def anchor(self, leg: int) -> np.ndarray:
        return np.array(self.base_anchors[_leg_index(leg)])

    def vertex(self, leg: int) -> np.ndarray:
        return np.array(self.platform_vertices[_leg_index(leg)])

    def leg_rotation(self, leg: int) -> np.ndarray:
        """Planar rotation taking leg-local (x, y) to world (x, y)."""
        c, s = self.leg_frames[_leg_index(leg)]
        return np.array([[c, -s], [s, c]])

    def passive_axis(self, leg: int) -> np.ndarray:
        """World direction of the passive prismatic joint of a leg."""
        return np.concatenate([self.leg_rotation(leg)[:, 0], [0.0]])


GEOMETRY = RobotGeometry()


def _leg_index(leg: int) -> int:
    if leg not in (1, 2, 3):
        raise InvalidInputError("leg index must be 1, 2 or 3", leg=leg)
    return leg - 1


def rotation_matrix(q: UnitQuaternion) -> np.ndarray:
    """Rotation matrix of a unit quaternion."""
    q1, q2, q3, q4 = q.q1, q.q2, q.q3, q.q4
    return np.array(
        [
            [2 * q1 * q1 + 2 * q2 * q2 - 1, -2 * q1 * q4 + 2 * q2 * q3, 2 * q1 * q3 + 2 * q2 * q4],
            [2 * q1 * q4 + 2 * q2 * q3, 2 * q1 * q1 + 2 * q3 * q3 - 1, -2 * q1 * q2 + 2 * q3 * q4],
            [-2 * q1 * q3 + 2 * q2 * q4, 2 * q1 * q2 + 2 * q3 * q4, 2 * q1 * q1 + 2 * q4 * q4 - 1],
        ]
    )


def platform_points(p: Pose) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """World coordinates of the spherical-joint centres C1, C2, C3."""
    r = rotation_matrix(p.orientation)
    position = p.position
    c1, c2, c3 = (r @ GEOMETRY.vertex(leg) + position for leg in (1, 2, 3))
    return c1, c2, c3


def platform_distance_errors(points: Sequence[np.ndarray]) -> np.ndarray:
    """|‖Ci − Cj‖ − 1| for the pairs (1,2), (1,3), (2,3)."""
    c1, c2, c3 = points
    return np.abs(
        np.array(
            [
                np.linalg.norm(c1 - c2),
                np.linalg.norm(c1 - c3),
                np.linalg.norm(c2 - c3),
            ]
        )
        - 1.0
    )


def leg_local_coordinates(point: Sequence[float], leg: int) -> tuple[float, float, float]:
    """Express a world point in a leg frame as (rho_ix, rho_iy, rho_iz)."""
    point = np.asarray(point, dtype=float)
    local = GEOMETRY.leg_rotation(leg).T @ point[:2]
    return float(local[0]), float(local[1]), float(point[2])


def leg_forward_coordinates(rho: Sequence[float], leg: int) -> np.ndarray:
    """World point of a leg given its (rho_ix, rho_iy, rho_iz)."""
    rho = np.asarray(rho, dtype=float)
    planar = GEOMETRY.leg_rotation(leg) @ rho[:2]
    return np.array([planar[0], planar[1], rho[2]])


@dataclass(frozen=True)
class FullJointState:
    """Actuated joints plus the three passive prismatic displacements."""

    actuated: ActuatedJoints
    rho1x: float
    rho2x: float
    rho3x: float

    def __post_init__(self) -> None:
        _require_finite((self.rho1x, self.rho2x, self.rho3x), "passive joints")

    def leg_values(self, leg: int) -> tuple[float, float, float]:
        a = self.actuated
        return {
            1: (self.rho1x, a.rho1y, a.rho1z),
            2: (self.rho2x, a.rho2y, a.rho2z),
            3: (self.rho3x, a.rho3y, a.rho3z),
        }[leg]

    def attachment_points(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        c1, c2, c3 = (leg_forward_coordinates(self.leg_values(leg), leg) for leg in (1, 2, 3))
        return c1, c2, c3

    def is_consistent(self, tolerance: float = 1e-9) -> bool:
        """Check the unit pairwise distances of the attachment points."""
        return bool(np.all(platform_distance_errors(self.attachment_points()) <= tolerance))

    def to_dict(self) -> dict[str, float]:
        data = self.actuated.to_dict()
        data.update(rho1x=self.rho1x, rho2x=self.rho2x, rho3x=self.rho3x)
        return data


def constraint_residuals(p: Pose, j: ActuatedJoints) -> np.ndarray:
    """Left-minus-right residuals of the six constraint equations, in order."""
    return residuals_at(p.as_array(), j)


def residuals_at(values: Sequence[float], j: ActuatedJoints) -> np.ndarray:
    """Constraint residuals at raw (x, y, z, q1, q2, q3, q4).

    The quaternion is used as given, so solvers can evaluate off the unit
    sphere.
    """
    x, y, z, q1, q2, q3, q4 = (float(v) for v in values)
    return np.array(
        [
            j.rho1y - y,
            j.rho1z - z,
            (2 * q1 * q4 - x) * SQRT3 + 2 * q1 * q1 + 3 * q2 * q2 - q3 * q3 - y - 2 * j.rho2y - 1,
            -SQRT3 * q1 * q3 + SQRT3 * q2 * q4 - q1 * q2 - q3 * q4 + j.rho2z - z,
            (2 * q1 * q4 + x) * SQRT3 - 2 * q1 * q1 - 3 * q2 * q2 + q3 * q3 - y - 2 * j.rho3y + 1,
            -SQRT3 * q1 * q3 + SQRT3 * q2 * q4 + q1 * q2 + q3 * q4 + j.rho3z - z,
        ]
    )


def constraint_jacobian(p: Pose) -> np.ndarray:
    """Partial derivatives of the residuals with respect to (x, y, z, q1..q4)."""
    return jacobian_at(p.as_array())


def jacobian_at(values: Sequence[float]) -> np.ndarray:
    """Residual Jacobian at raw (x, y, z, q1, q2, q3, q4); independent of position."""
    q1, q2, q3, q4 = (float(v) for v in values[3:7])
    return np.array(
        [
            [0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0],
            [-SQRT3, -1.0, 0.0, 2 * SQRT3 * q4 + 4 * q1, 6 * q2, -2 * q3, 2 * SQRT3 * q1],
            [0.0, 0.0, -1.0, -SQRT3 * q3 - q2, SQRT3 * q4 - q1, -SQRT3 * q1 - q4, SQRT3 * q2 - q3],
            [SQRT3, -1.0, 0.0, 2 * SQRT3 * q4 - 4 * q1, -6 * q2, 2 * q3, 2 * SQRT3 * q1],
            [0.0, 0.0, -1.0, -SQRT3 * q3 + q2, SQRT3 * q4 + q1, -SQRT3 * q1 + q4, SQRT3 * q2 + q3],
        ]
    )


# d(residual)/d(rho), constant; rows follow the constraint order.
JOINT_COEFFICIENTS = np.diag([1.0, 1.0, -2.0, 1.0, -2.0, 1.0])
