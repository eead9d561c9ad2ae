"""Velocity model, parallel-singularity factorization and surface sampling.

The twist is (v, ω): linear velocity of the reference point and angular
velocity, both in the world frame. Orientation rates follow
q̇ = ½ (0, ω) ⊗ q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from logging import getLogger
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidInputError
from .kinematics import inverse_kinematics
from .model import (
    JOINT_COEFFICIENTS,
    Pose,
    UnitQuaternion,
    jacobian_at,
)

logger = getLogger(__name__)

SINGULARITY_TOLERANCE = 1e-10
RATIO_THRESHOLD = 0.05
TWIST_CONVENTION = "world-frame linear velocity of P, world-frame angular velocity"

SURFACE_CSV_COLUMNS = ("surface_id", "q2", "q3", "q4")
SURFACE_IDS = ("cylinder", "ellipsoid", "selfmotion_circle")

# Flips the residuals of the z rows and the leg-1 y row so every joint rate
# enters the velocity relation with a negative coefficient.
RESIDUAL_SIGNS = np.diag([-1.0, -1.0, 1.0, -1.0, 1.0, -1.0])


def rate_map(q: UnitQuaternion) -> np.ndarray:
    """4×3 matrix G with q̇ = ½·G·ω for world-frame ω."""
    q1, q2, q3, q4 = q.q1, q.q2, q.q3, q.q4
    return np.array(
        [
            [-q2, -q3, -q4],
            [q1, q4, -q3],
            [-q4, q1, q2],
            [q3, -q2, q1],
        ]
    )


@dataclass(frozen=True)
class VelocityModel:
    """A·t + B·ρ̇ = 0 at one pose."""

    a: np.ndarray
    b: np.ndarray
    twist_convention: str = TWIST_CONVENTION

    def residual(self, twist: Sequence[float], joint_rates: Sequence[float]) -> float:
        """‖A·t + B·ρ̇‖∞."""
        value = self.a @ np.asarray(twist, dtype=float) + self.b @ np.asarray(joint_rates, dtype=float)
        return float(np.max(np.abs(value)))

    def to_dict(self) -> dict[str, object]:
        return {
            "A": self.a.tolist(),
            "B": self.b.tolist(),
            "twist_convention": self.twist_convention,
            "det_A": float(np.linalg.det(self.a)),
            "det_B": float(np.linalg.det(self.b)),
        }


def velocity_model(p: Pose) -> VelocityModel:
    """Differentiate the constraint equations at ``p``.

    B is constant and diagonal: (−1, −1, −2, −1, −2, −1).
    """
    jac = jacobian_at(p.as_array())
    position_part = jac[:, :3]
    orientation_part = 0.5 * jac[:, 3:] @ rate_map(p.orientation)
    a = RESIDUAL_SIGNS @ np.hstack([position_part, orientation_part])
    b = RESIDUAL_SIGNS @ JOINT_COEFFICIENTS
    return VelocityModel(a, b)


def singularity_factors(q: UnitQuaternion) -> tuple[float, float, float]:
    """(q1² − q2² − q3² + q4², q1 − q4, q1 + q4)."""
    q1, q2, q3, q4 = q.q1, q.q2, q.q3, q.q4
    return (q1 * q1 - q2 * q2 - q3 * q3 + q4 * q4, q1 - q4, q1 + q4)


def eliminated_factors(q: UnitQuaternion) -> tuple[float, float]:
    """Factors with q1 eliminated: ellipsoid and cylinder in (q2, q3, q4)."""
    q2, q3, q4 = q.q2, q.q3, q.q4
    return (q2 * q2 + q3 * q3 + 2 * q4 * q4 - 1.0, 2 * q2 * q2 + 2 * q3 * q3 - 1.0)


def eliminated_equivalence_check(q: UnitQuaternion) -> tuple[float, float]:
    """Return the factored product and its q1-eliminated counterpart.

    On the unit sphere q1² − q2² − q3² + q4² = −(2q2² + 2q3² − 1) and
    (q1 − q4)(q1 + q4) = −(q2² + q3² + 2q4² − 1), so the two products agree
    exactly, signs included.
    """
    full = float(np.prod(singularity_factors(q)))
    reduced = float(np.prod(eliminated_factors(q)))
    return full, reduced


def selfmotion_locus_residuals(q: UnitQuaternion) -> np.ndarray:
    """Six polynomials in (q2, q3, q4) vanishing on the self-motion locus.

    They also vanish at q2 = q3 = q4 = 0; only together with the eliminated
    singularity condition do they cut out the unit circle alone.
    """
    q2, q3, q4 = q.q2, q.q3, q.q4
    ring = q2 * q2 + q3 * q3 - 1.0
    return np.array(
        [
            q2 * q4,
            q3 * q4,
            q2 * ring,
            q3 * ring,
            q4 ** 3 - q4,
            q2 ** 4 + (q3 * q3 + q4 * q4 - 1.0) * q2 * q2 + q3 * q3 * q4 * q4,
        ]
    )


@dataclass(frozen=True)
class SingularityReport:
    """Parallel-singularity evaluation at one pose."""

    det_a: float
    factored_value: float
    factor_values: tuple[float, float, float]
    eliminated_factors: tuple[float, float]
    is_singular: bool
    selfmotion_locus_residuals: tuple[float, ...]
    det_ratio: float | None = None

    def to_dict(self) -> dict[str, object]:
        return {
            "det_A": self.det_a,
            "factored_value": self.factored_value,
            "factor_values": list(self.factor_values),
            "eliminated_factors": list(self.eliminated_factors),
            "is_singular": self.is_singular,
            "selfmotion_locus_residuals": list(self.selfmotion_locus_residuals),
            "det_ratio": self.det_ratio,
        }


def singularity_report(p: Pose, tolerance: float = SINGULARITY_TOLERANCE) -> SingularityReport:
    """Evaluate det(A), its factorization and the self-motion locus at ``p``.

    Only the orientation matters; A does not depend on position.
    """
    q = p.orientation
    det_a = float(np.linalg.det(velocity_model(p).a))
    factors = singularity_factors(q)
    product = float(np.prod(factors))
    ratio = det_a / product if abs(product) > RATIO_THRESHOLD else None
    return SingularityReport(
        det_a=det_a,
        factored_value=product,
        factor_values=tuple(float(f) for f in factors),
        eliminated_factors=tuple(float(f) for f in eliminated_factors(q)),
        is_singular=abs(product) <= tolerance,
        selfmotion_locus_residuals=tuple(float(v) for v in selfmotion_locus_residuals(q)),
        det_ratio=ratio,
    )


def _advance(p: Pose, twist: np.ndarray, h: float) -> Pose:
    v, omega = twist[:3], twist[3:]
    speed = float(np.linalg.norm(omega))
    q = p.orientation
    if speed > 0.0:
        q = UnitQuaternion.from_axis_angle(omega, speed * h).multiply(q)
    x, y, z = p.position + h * v
    return Pose(x, y, z, q)


def velocity_residual(p: Pose, twist: Sequence[float], step: float = 1e-6) -> float:
    """Check the velocity relation against finite differences of IK.

    The pose is moved along ``twist`` for ±``step``; the central difference
    of the actuated joints gives ρ̇.

    Returns:
        ‖A·t + B·ρ̇‖∞
    """
    twist = np.asarray(twist, dtype=float).reshape(6)
    if not np.all(np.isfinite(twist)):
        raise InvalidInputError("twist must be finite", twist=twist.tolist())
    if not step > 0:
        raise InvalidInputError("finite-difference step must be positive", step=step)
    forward = inverse_kinematics(_advance(p, twist, step)).actuated.as_array()
    backward = inverse_kinematics(_advance(p, twist, -step)).actuated.as_array()
    joint_rates = (forward - backward) / (2.0 * step)
    return velocity_model(p).residual(twist, joint_rates)


def arc_sign_changes(
    f: Callable[[np.ndarray], float],
    a: Sequence[float],
    b: Sequence[float],
    samples: int = 256,
    tolerance: float = 1e-10,
) -> list[float]:
    """Parameters t ∈ [0, 2π) where f changes sign along cos t·a + sin t·b.

    ``a`` and ``b`` should be orthonormal so the arc is a great circle.
    Sign changes between adjacent samples are refined by bisection to
    ``tolerance`` in t; exact zeros at sample points are reported as is.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)

    def at(t: float) -> float:
        return float(f(math.cos(t) * a + math.sin(t) * b))

    ts = np.linspace(0.0, 2.0 * math.pi, samples + 1)
    values = [at(float(t)) for t in ts]
    changes: list[float] = []
    for k in range(samples):
        lo, hi = float(ts[k]), float(ts[k + 1])
        f_lo, f_hi = values[k], values[k + 1]
        if f_lo == 0.0:
            changes.append(lo)
            continue
        if f_lo * f_hi > 0.0 or f_hi == 0.0:
            continue
        while hi - lo > tolerance:
            mid = 0.5 * (lo + hi)
            f_mid = at(mid)
            if f_mid == 0.0:
                lo = hi = mid
                break
            if f_lo * f_mid < 0.0:
                hi = mid
            else:
                lo, f_lo = mid, f_mid
        changes.append(0.5 * (lo + hi))
    return changes


@dataclass(frozen=True)
class SurfacePoint:
    surface_id: str
    q2: float
    q3: float
    q4: float

    def implicit_value(self) -> float:
        """Value of the implicit equation of the point's surface."""
        q2, q3, q4 = self.q2, self.q3, self.q4
        if self.surface_id == "cylinder":
            return 2 * q2 * q2 + 2 * q3 * q3 - 1.0
        if self.surface_id == "ellipsoid":
            return q2 * q2 + q3 * q3 + 2 * q4 * q4 - 1.0
        return max(abs(q2 * q2 + q3 * q3 - 1.0), abs(q4))

    def csv_row(self) -> tuple[str, float, float, float]:
        return (self.surface_id, self.q2, self.q3, self.q4)


def sample_singularity_surfaces(resolution: int = 64) -> list[SurfacePoint]:
    """Point clouds of the two singularity quadrics and the self-motion circle.

    Cylinder 2q2² + 2q3² = 1 is sampled on resolution angles × resolution
    heights in [−1/√2, 1/√2]; ellipsoid q2² + q3² + 2q4² = 1 on resolution
    polar angles at cell midpoints × resolution azimuthal angles; the circle
    on resolution angles. Rows come out grouped by surface in that order.

    Raises:
        InvalidInputError: resolution below 8
    """
    if resolution < 8:
        raise InvalidInputError("resolution must be >= 8", resolution=resolution)

    n = int(resolution)
    azimuths = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    radius = 1.0 / math.sqrt(2.0)
    points: list[SurfacePoint] = []

    for t in azimuths:
        for h in np.linspace(-radius, radius, n):
            points.append(SurfacePoint("cylinder", radius * math.cos(t), radius * math.sin(t), float(h)))

    for polar in (np.arange(n) + 0.5) * (math.pi / n):
        s, c = math.sin(polar), math.cos(polar)
        for t in azimuths:
            points.append(SurfacePoint("ellipsoid", s * math.cos(t), s * math.sin(t), c * radius))

    for t in azimuths:
        points.append(SurfacePoint("selfmotion_circle", math.cos(t), math.sin(t), 0.0))

    logger.debug("sampled %d surface points at resolution %d", len(points), n)
    return points
