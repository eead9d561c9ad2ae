"""Cardanic self-motion: joint-space detection and the induced pose family."""

from __future__ import annotations

import math
from dataclasses import dataclass
from logging import getLogger
from typing import Iterable

import numpy as np

from .errors import NotSelfMotionError
from .model import (
    GEOMETRY,
    SQRT3,
    ActuatedJoints,
    Pose,
    UnitQuaternion,
    constraint_residuals,
    platform_points,
)

logger = getLogger(__name__)

SELF_MOTION_TOLERANCE = 1e-10
AXES_TOLERANCE = 1e-8

FAMILY_CSV_COLUMNS = ("theta", "x", "y", "z", "q1", "q2", "q3", "q4", "maxResidual")


@dataclass(frozen=True)
class SelfMotionCheck:
    """Self-motion flag with the three condition residuals."""

    holds: bool
    sum_residual: float  # rho1y + rho2y + rho3y
    z12_residual: float  # rho1z - rho2z
    z23_residual: float  # rho2z - rho3z

    def __bool__(self) -> bool:
        return self.holds

    def max_residual(self) -> float:
        return max(abs(self.sum_residual), abs(self.z12_residual), abs(self.z23_residual))

    def to_dict(self) -> dict[str, float | bool]:
        return {
            "holds": self.holds,
            "sum_residual": self.sum_residual,
            "z12_residual": self.z12_residual,
            "z23_residual": self.z23_residual,
        }


def self_motion_condition(j: ActuatedJoints, tolerance: float = SELF_MOTION_TOLERANCE) -> SelfMotionCheck:
    """Test the three joint-space conditions of the Cardanic self-motion."""
    sum_residual = j.rho1y + j.rho2y + j.rho3y
    z12 = j.rho1z - j.rho2z
    z23 = j.rho2z - j.rho3z
    holds = abs(sum_residual) <= tolerance and abs(z12) <= tolerance and abs(z23) <= tolerance
    return SelfMotionCheck(holds, sum_residual, z12, z23)


@dataclass(frozen=True)
class FamilySample:
    theta: float
    pose: Pose
    max_residual: float

    def csv_row(self) -> tuple[float, ...]:
        return (self.theta, *self.pose.as_array(), self.max_residual)


def family_csv_rows(samples: Iterable[FamilySample]) -> list[tuple[float, ...]]:
    """Rows under FAMILY_CSV_COLUMNS, in sample order."""
    return [s.csv_row() for s in samples]


@dataclass(frozen=True)
class CardanicFamily:
    """One-parameter pose family of the self-motion at ``joint_anchor``.

    theta runs over the unit circle q = (0, cos θ, sin θ, 0) of the
    quaternion (q2, q3) plane. Every member is a half-turn of the platform
    about a horizontal axis, so the platform is flipped upside down.
    """

    joint_anchor: ActuatedJoints

    def orientation_at(self, theta: float) -> UnitQuaternion:
        return UnitQuaternion(0.0, math.cos(theta), math.sin(theta), 0.0)

    def pose_at(self, theta: float) -> Pose:
        """Family member at ``theta``; x solves the leg-2 y equation."""
        j = self.joint_anchor
        q = self.orientation_at(theta)
        # The leg-2 y residual is affine in x.
        r0 = constraint_residuals(Pose(0.0, j.rho1y, j.rho1z, q), j)[2]
        r1 = constraint_residuals(Pose(1.0, j.rho1y, j.rho1z, q), j)[2]
        x = r0 / (r0 - r1)
        return Pose(x, j.rho1y, j.rho1z, q)

    def closed_form_x(self, theta: float) -> float:
        """x(θ) = (2 cos 2θ − y − 2ρ2y)/√3; cross-check for ``pose_at``."""
        j = self.joint_anchor
        return (2.0 * math.cos(2.0 * theta) - j.rho1y - 2.0 * j.rho2y) / SQRT3

    def sample(self, count: int = 360) -> list[FamilySample]:
        """Members at θ = 2πk/count, k = 0..count-1, with their residuals."""
        samples = []
        for k in range(count):
            theta = 2.0 * math.pi * k / count
            pose = self.pose_at(theta)
            residual = float(np.max(np.abs(constraint_residuals(pose, self.joint_anchor))))
            samples.append(FamilySample(theta, pose, residual))
        return samples

    def to_dict(self) -> dict[str, object]:
        return {
            "joint_anchor": self.joint_anchor.to_dict(),
            "orientation_locus": "q1=0, q4=0, q2^2+q3^2=1",
            "parametrization": "q=(0,cos(theta),sin(theta),0), y=rho1y, z=rho1z, x from leg-2 y equation",
            "x_closed_form": "(2*cos(2*theta) - rho1y - 2*rho2y)/sqrt(3)",
        }


def cardanic_family(j: ActuatedJoints, tolerance: float = SELF_MOTION_TOLERANCE) -> CardanicFamily:
    """Pose family of the self-motion at joints ``j``.

    Raises:
        NotSelfMotionError: The joints violate a self-motion condition
    """
    check = self_motion_condition(j, tolerance)
    if not check:
        raise NotSelfMotionError("joints do not satisfy the self-motion condition", **check.to_dict())
    return CardanicFamily(j)


@dataclass(frozen=True)
class AxesCheck:
    """Concurrency test of the three passive prismatic axes."""

    concurrent: bool
    intersection: tuple[float, float, float]
    residual: float
    angles: tuple[float, float, float]

    def __bool__(self) -> bool:
        return self.concurrent


def self_motion_axes_check(p: Pose, tolerance: float = AXES_TOLERANCE) -> AxesCheck:
    """Test whether the passive axes meet at one point at 2π/3 to each other.

    The least-squares point minimizing the summed squared distance to the
    three lines is computed; the lines concur when its residual distance is
    within ``tolerance``.
    """
    points = platform_points(p)
    directions = [GEOMETRY.passive_axis(leg) for leg in (1, 2, 3)]

    projectors = [np.eye(3) - np.outer(d, d) for d in directions]
    lhs = sum(projectors)
    rhs = sum(proj @ c for proj, c in zip(projectors, points))
    point = np.linalg.solve(lhs, rhs)
    residual = math.sqrt(sum(float(np.sum((proj @ (point - c)) ** 2)) for proj, c in zip(projectors, points)))

    angles = tuple(
        math.acos(max(-1.0, min(1.0, float(directions[a] @ directions[b]))))
        for a, b in ((0, 1), (0, 2), (1, 2))
    )
    target = 2.0 * math.pi / 3.0
    concurrent = residual <= tolerance and all(abs(angle - target) <= tolerance for angle in angles)
    return AxesCheck(concurrent, tuple(float(v) for v in point), residual, angles)
