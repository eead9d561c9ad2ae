"""Inverse and direct kinematics.

Inverse kinematics is closed form. Direct kinematics fixes y and z from
the leg-1 equations and solves the remaining five equations (legs 2 and 3
plus the unit-norm condition) in (x, q1, q2, q3, q4) by damped Newton from a
deterministic seed set, deflating every root it finds.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from logging import getLogger

import numpy as np

from .config import SolverOptions
from .errors import DegenerateError, InvalidInputError, NotPlanarError
from .model import (
    SQRT3,
    ActuatedJoints,
    FullJointState,
    Pose,
    UnitQuaternion,
    constraint_residuals,
    jacobian_at,
    leg_local_coordinates,
    platform_distance_errors,
    platform_points,
    pose_distance,
    residuals_at,
)
from .newton import NewtonResult, ShiftedDeflation, damped_newton, polish
from .selfmotion import CardanicFamily, self_motion_condition

logger = getLogger(__name__)

PLANAR_TOLERANCE = 1e-12
DEGENERACY_TOLERANCE = 1e-10
DOUBLE_ROOT_TOLERANCE = 1e-12
FAMILY_MEMBER_TOLERANCE = 1e-6


def inverse_kinematics(p: Pose) -> FullJointState:
    """Joint values of a pose; total for this robot."""
    q1, q2, q3, q4 = p.orientation.q1, p.orientation.q2, p.orientation.q3, p.orientation.q4
    x, y, z = p.x, p.y, p.z

    rho2y = 0.5 * ((2 * q1 * q4 - x) * SQRT3 + 2 * q1 * q1 + 3 * q2 * q2 - q3 * q3 - y - 1)
    rho3y = 0.5 * ((2 * q1 * q4 + x) * SQRT3 - 2 * q1 * q1 - 3 * q2 * q2 + q3 * q3 - y + 1)
    rho2z = z + SQRT3 * q1 * q3 - SQRT3 * q2 * q4 + q1 * q2 + q3 * q4
    rho3z = z + SQRT3 * q1 * q3 - SQRT3 * q2 * q4 - q1 * q2 - q3 * q4
    actuated = ActuatedJoints(y, z, rho2y, rho2z, rho3y, rho3z)

    passive = [leg_local_coordinates(c, leg)[0] for leg, c in zip((1, 2, 3), platform_points(p))]
    return FullJointState(actuated, *passive)


class OutcomeKind(str, Enum):
    FINITE_SOLUTIONS = "FiniteSolutions"
    SELF_MOTION = "SelfMotion"
    NO_SOLUTION = "NoSolution"


@dataclass(frozen=True)
class DKOutcome:
    """Result of direct kinematics.

    ``solutions`` is filled only for FiniteSolutions. For SelfMotion the
    family is attached and any isolated assembly modes found alongside it
    are listed in ``isolated_solutions``.
    """

    kind: OutcomeKind
    solutions: tuple[Pose, ...] = ()
    self_motion_family: CardanicFamily | None = None
    isolated_solutions: tuple[Pose, ...] = ()
    warnings: tuple[str, ...] = ()


def max_residual(p: Pose, j: ActuatedJoints) -> float:
    return float(np.max(np.abs(constraint_residuals(p, j))))


def verify_pose(p: Pose, j: ActuatedJoints, tolerance: float = 1e-9) -> bool:
    """Constraint residuals and unit platform edges within ``tolerance``."""
    return max_residual(p, j) <= tolerance and bool(np.all(platform_distance_errors(platform_points(p)) <= tolerance))


def orientation_candidates(j: ActuatedJoints, tolerance: float = 1e-12) -> list[Pose]:
    """Isolated DK solutions from the closed-form reduction of the system.

    The leg-2/leg-3 z equations fix a = q1q3 − q2q4 and b = q1q2 + q3q4, the
    sum of the y equations fixes g = q1q4 and their difference gives x. With
    s = q1² + q4² the unit norm reads s² − s + a² + b² = 0, and
    (q1 ± q4)² = s ± 2g. The s = 0 branch is the self-motion family and is
    not returned.
    """
    a = (j.rho2z + j.rho3z - 2.0 * j.rho1z) / (2.0 * SQRT3)
    b = (j.rho2z - j.rho3z) / 2.0
    g = (j.rho1y + j.rho2y + j.rho3y) / (2.0 * SQRT3)

    disc = 1.0 - 4.0 * (a * a + b * b)
    if disc < -tolerance:
        return []
    root = math.sqrt(max(disc, 0.0))

    poses: list[Pose] = []
    for s in sorted({0.5 * (1.0 + root), 0.5 * (1.0 - root)}, reverse=True):
        if s <= tolerance:
            continue
        plus, minus = s + 2.0 * g, s - 2.0 * g
        if plus < -tolerance or minus < -tolerance:
            continue
        u, v = math.sqrt(max(plus, 0.0)), math.sqrt(max(minus, 0.0))
        for q1, q4 in (((u + v) / 2.0, (u - v) / 2.0), ((u - v) / 2.0, (u + v) / 2.0)):
            q2 = (b * q1 - a * q4) / s
            q3 = (a * q1 + b * q4) / s
            try:
                q = UnitQuaternion.from_array((q1, q2, q3, q4), normalize=True)
            except InvalidInputError:
                continue
            x = (2 * q.q1 ** 2 + 3 * q.q2 ** 2 - q.q3 ** 2 - 1 + j.rho3y - j.rho2y) / SQRT3
            poses.append(Pose(x, j.rho1y, j.rho1z, q))
    return poses


class _ReducedSystem:
    """The five equations in u = (x, q1, q2, q3, q4) with y, z fixed."""

    rows = [2, 3, 4, 5]
    columns = [0, 3, 4, 5, 6]

    def __init__(self, j: ActuatedJoints) -> None:
        self.joints = j

    def values(self, u: np.ndarray) -> np.ndarray:
        return np.array([u[0], self.joints.rho1y, self.joints.rho1z, u[1], u[2], u[3], u[4]])

    def residual(self, u: np.ndarray) -> np.ndarray:
        r = residuals_at(self.values(u), self.joints)[self.rows]
        return np.append(r, float(u[1:] @ u[1:]) - 1.0)

    def jacobian(self, u: np.ndarray) -> np.ndarray:
        jac = jacobian_at(self.values(u))[np.ix_(self.rows, self.columns)]
        norm_row = np.concatenate([[0.0], 2.0 * u[1:]])
        return np.vstack([jac, norm_row])

    def to_pose(self, u: np.ndarray) -> Pose | None:
        try:
            q = UnitQuaternion.from_array(u[1:])
        except InvalidInputError:
            return None
        return Pose(float(u[0]), self.joints.rho1y, self.joints.rho1z, q)


def seed_set(options: SolverOptions) -> list[np.ndarray]:
    """Deterministic multistart seeds in (x, q1, q2, q3, q4).

    The sign patterns of (±½, ±½, ±½, ±½) crossed with the x grid, followed
    by the home pose. Only patterns with q1 = +½ are used: q and −q are the
    same orientation and the residual is even in q.
    """
    xs = np.linspace(-2.0, 2.0, options.seed_density) if options.seed_density > 1 else np.array([0.0])
    seeds = []
    for signs in itertools.product((1.0, -1.0), repeat=3):
        q = 0.5 * np.array([1.0, *signs])
        for x in xs:
            seeds.append(np.concatenate([[x], q]))
    seeds.append(np.concatenate([[1.0 / SQRT3], [1.0, 0.0, 0.0, 0.0]]))
    return seeds


def _newton(
    system: _ReducedSystem,
    u0: np.ndarray,
    options: SolverOptions,
    deflation: ShiftedDeflation | None = None,
) -> NewtonResult:
    return damped_newton(
        system.residual,
        system.jacobian,
        u0,
        max_iterations=options.max_iterations,
        tolerance=options.tolerance,
        divergence_threshold=options.divergence_threshold,
        deflation=deflation,
        min_step=options.line_search_min_step,
        stall_window=options.stall_window,
    )


def _solve_multistart(j: ActuatedJoints, options: SolverOptions, grid: bool = True) -> list[Pose]:
    """Run the analytic seeds, then the deflated seed grid when ``grid`` is set."""
    system = _ReducedSystem(j)
    deflation = ShiftedDeflation(power=options.deflation_power, shift=options.deflation_shift)
    found: list[Pose] = []

    def accept(u: np.ndarray) -> None:
        u = polish(system.residual, system.jacobian, u)
        pose = system.to_pose(u)
        if pose is None or not verify_pose(pose, j, options.verify_tolerance):
            logger.debug("rejected root %s", u)
            return
        # q and -q are the same rotation; deflate both.
        deflation.add(u)
        deflation.add(np.concatenate([[u[0]], -u[1:]]))
        if any(pose_distance(pose, other) <= options.dedup_tolerance for other in found):
            return
        found.append(pose)

    if options.analytic_seeds or not grid:
        for candidate in orientation_candidates(j):
            result = _newton(system, candidate.as_array()[[0, 3, 4, 5, 6]], options)
            if result.converged:
                accept(result.root)

    if grid:
        outcomes: Counter[str] = Counter()
        for index, u0 in enumerate(seed_set(options)):
            result = _newton(system, u0, options, deflation)
            outcomes[result.reason] += 1
            logger.debug("seed %d: %s after %d iterations", index, result.reason, result.iterations)
            if result.converged:
                accept(result.root)
        logger.debug("seed grid outcomes: %s", dict(outcomes))

    return sorted(found, key=_ordering_key)


def _ordering_key(p: Pose) -> tuple[float, ...]:
    return (p.x, p.orientation.q1, p.orientation.q2, p.orientation.q3, p.orientation.q4)


def direct_kinematics(j: ActuatedJoints, options: SolverOptions | None = None) -> DKOutcome:
    """All platform poses reaching the actuated joints ``j``.

    Args:
        j: Actuated joint values
        options: Solver options (defaults if omitted)

    Returns:
        FiniteSolutions with the verified distinct poses, SelfMotion with the
        Cardanic family and the isolated modes of the closed-form reduction,
        or NoSolution when no seed converges
    """
    options = options or SolverOptions()
    if not all(math.isfinite(v) for v in j.as_tuple()):
        raise InvalidInputError("joints must be finite", joints=j.to_dict())

    warnings: list[str] = []
    check = self_motion_condition(j, options.self_motion_tolerance)
    if not check and check.max_residual() <= options.near_degenerate_tolerance:
        message = (
            f"joints are within {check.max_residual():.3g} of the self-motion condition; "
            "solutions are ill-conditioned"
        )
        logger.warning(message)
        warnings.append(message)

    # Grid seeds would only land on family members; isolated modes all come
    # from the closed-form candidates.
    roots = _solve_multistart(j, options, grid=not check)

    if check:
        isolated = tuple(
            p
            for p in roots
            if abs(p.orientation.q1) > FAMILY_MEMBER_TOLERANCE or abs(p.orientation.q4) > FAMILY_MEMBER_TOLERANCE
        )
        logger.info("self-motion joints; %d isolated assembly modes alongside the family", len(isolated))
        return DKOutcome(
            OutcomeKind.SELF_MOTION,
            self_motion_family=CardanicFamily(j),
            isolated_solutions=isolated,
            warnings=tuple(warnings),
        )

    if not roots:
        logger.info("no seed converged")
        return DKOutcome(OutcomeKind.NO_SOLUTION, warnings=tuple(warnings))
    return DKOutcome(OutcomeKind.FINITE_SOLUTIONS, solutions=tuple(roots), warnings=tuple(warnings))


@dataclass(frozen=True)
class PlanarQuadratic:
    """a·ρ1x² + b·ρ1x + c = 0 after removing (ρ1y+ρ2y+ρ3y)²."""

    a: float
    b: float
    c: float
    degenerate: bool

    @property
    def discriminant(self) -> float:
        return self.b * self.b - 4.0 * self.a * self.c

    def roots(self) -> list[float]:
        """Real roots in ascending order; a near-zero discriminant is a double root."""
        disc = self.discriminant
        if abs(disc) <= DOUBLE_ROOT_TOLERANCE:
            return [-self.b / (2.0 * self.a)]
        if disc < 0.0:
            return []
        # Cancellation-free form of the quadratic formula.
        q = -0.5 * (self.b + math.copysign(math.sqrt(disc), self.b))
        return sorted([q / self.a, self.c / q])


def _require_planar(j: ActuatedJoints) -> None:
    vertical = (j.rho1z, j.rho2z, j.rho3z)
    if any(abs(v) > PLANAR_TOLERANCE for v in vertical):
        raise NotPlanarError(
            "planar solver needs rho1z = rho2z = rho3z = 0",
            rho1z=j.rho1z,
            rho2z=j.rho2z,
            rho3z=j.rho3z,
        )


def planar_quadratic_coefficients(j: ActuatedJoints) -> PlanarQuadratic:
    """Coefficients of the planar direct-kinematics quadratic in ρ1x.

    Raises:
        NotPlanarError: A vertical joint is nonzero
    """
    _require_planar(j)
    r1, r2, r3 = j.rho1y, j.rho2y, j.rho3y
    a = 9.0
    b = 6.0 * SQRT3 * (r2 - r3)
    c = r1 * r1 + 2 * r1 * r2 + 2 * r1 * r3 + 4 * r2 * r2 - 4 * r2 * r3 + 4 * r3 * r3 - 3.0
    degenerate = abs(r1 + r2 + r3) <= DEGENERACY_TOLERANCE
    return PlanarQuadratic(a, b, c, degenerate)


def planar_direct_kinematics(j: ActuatedJoints, tolerance: float = 1e-9) -> list[tuple[float, Pose]]:
    """Solve planar joints through the quadratic and rebuild each pose.

    For a root ρ1x the platform turns by φ about z with
    sin φ = (ρ1y+ρ2y+ρ3y)/√3 and cos φ = √3·ρ1x + ρ2y − ρ3y, read back
    from the leg-2 and leg-3 y equations; x = ρ1x, y = ρ1y and z = 0.

    Raises:
        NotPlanarError: A vertical joint is nonzero
        DegenerateError: ρ1y + ρ2y + ρ3y vanishes
    """
    quadratic = planar_quadratic_coefficients(j)
    if quadratic.degenerate:
        raise DegenerateError(
            "planar quadratic cancels; the joints admit a self-motion",
            sum_residual=j.rho1y + j.rho2y + j.rho3y,
        )

    solutions = []
    sin_phi = (j.rho1y + j.rho2y + j.rho3y) / SQRT3
    for rho1x in quadratic.roots():
        cos_phi = SQRT3 * rho1x + j.rho2y - j.rho3y
        phi = math.atan2(sin_phi, cos_phi)
        q = UnitQuaternion.from_axis_angle((0.0, 0.0, 1.0), phi)
        pose = Pose(rho1x, j.rho1y, 0.0, q)
        if not verify_pose(pose, j, tolerance):
            logger.warning("planar root %.17g failed verification (residual %.3g)", rho1x, max_residual(pose, j))
            continue
        solutions.append((rho1x, pose))
    return solutions
