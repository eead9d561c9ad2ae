"""End-to-end acceptance checks.

Counts are reduced by default; ``--full-scale`` runs the full sample sizes.
Runtime budgets scale with the number of samples actually drawn.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from ppps.cli import run
from ppps.kinematics import (
    OutcomeKind,
    direct_kinematics,
    inverse_kinematics,
    max_residual,
    planar_direct_kinematics,
    planar_quadratic_coefficients,
)
from ppps.model import ActuatedJoints, Pose, UnitQuaternion, pose_distance, rotation_matrix
from ppps.selfmotion import cardanic_family, self_motion_axes_check
from ppps.singularity import (
    arc_sign_changes,
    eliminated_equivalence_check,
    sample_singularity_surfaces,
    selfmotion_locus_residuals,
    singularity_factors,
    singularity_report,
    velocity_model,
    velocity_residual,
)

pytestmark = pytest.mark.acceptance

# Seconds allowed per full-size run.
HOME_BUDGET = 1.0
FAMILY_BUDGET = 5.0
ROUNDTRIP_BUDGET = 60.0
ROUNDTRIP_POSES = 1000


def _det_a(q: np.ndarray) -> float:
    pose = Pose(0.0, 0.0, 0.0, UnitQuaternion.from_array(q, normalize=True))
    return float(np.linalg.det(velocity_model(pose).a))


def _factored(q: np.ndarray) -> float:
    return math.prod(singularity_factors(UnitQuaternion.from_array(q, normalize=True)))


class TestHomeConsistency:
    """Home pose and all-zero joints."""

    def test_home_ik_and_dk(self, home_pose: Pose) -> None:
        """IK of the home pose is all zero and DK of zero joints is the self-motion, within a second."""
        start = time.perf_counter()
        joints = inverse_kinematics(home_pose).actuated
        outcome = direct_kinematics(ActuatedJoints.zeros())
        elapsed = time.perf_counter() - start

        assert np.max(np.abs(joints.as_array())) <= 1e-12
        assert outcome.kind is OutcomeKind.SELF_MOTION
        assert elapsed < HOME_BUDGET


class TestCardanicFamilyValidity:
    """Members of the self-motion family at zero joints."""

    def test_family_members(self) -> None:
        """360 members close the loop, stay on the locus, map back to zero and have concurrent axes."""
        start = time.perf_counter()
        anchor = ActuatedJoints.zeros()
        samples = cardanic_family(anchor).sample(360)
        assert len(samples) == 360
        for sample in samples:
            assert sample.max_residual <= 1e-10
            assert np.max(np.abs(selfmotion_locus_residuals(sample.pose.orientation))) <= 1e-12
            assert np.max(np.abs(inverse_kinematics(sample.pose).actuated.as_array())) <= 1e-10
            check = self_motion_axes_check(sample.pose)
            assert check.residual <= 1e-8
            assert check.angles == pytest.approx([2.0 * math.pi / 3.0] * 3, abs=1e-8)
        assert time.perf_counter() - start < FAMILY_BUDGET


@pytest.mark.slow
class TestRoundtrip:
    """DK of IK recovers random nonsingular poses."""

    def test_random_nonsingular_poses(self, pose_factory, scale) -> None:
        """Every pose comes back within 1e-8, inside the per-pose share of the time budget."""
        count = scale(ROUNDTRIP_POSES, 50)
        poses = [pose_factory() for _ in range(count)]

        start = time.perf_counter()
        outcomes = [direct_kinematics(inverse_kinematics(p).actuated) for p in poses]
        elapsed = time.perf_counter() - start

        for p, outcome in zip(poses, outcomes):
            assert outcome.kind is OutcomeKind.FINITE_SOLUTIONS
            assert any(pose_distance(s, p) <= 1e-8 for s in outcome.solutions)
        assert elapsed < ROUNDTRIP_BUDGET * count / ROUNDTRIP_POSES


class TestRotationMatrices:
    """Rotation matrices of many random unit quaternions."""

    def test_orthonormal(self, quaternion_factory, scale) -> None:
        """Every matrix is orthonormal with determinant 1 to 1e-12."""
        for _ in range(scale(10000, 2000)):
            r = rotation_matrix(quaternion_factory())
            assert np.max(np.abs(r @ r.T - np.eye(3))) <= 1e-12
            assert abs(np.linalg.det(r) - 1.0) <= 1e-12


class TestSingularityZeroSets:
    """Zero sets of det(A) and of the factored product."""

    def test_sign_changes_agree_along_arcs(self, rng: np.random.Generator, scale) -> None:
        """Along random great-circle arcs det(A) and the product change sign at the same angles."""
        for _ in range(scale(200, 20)):
            a = rng.normal(size=4)
            a /= np.linalg.norm(a)
            b = rng.normal(size=4)
            b -= (b @ a) * a
            b /= np.linalg.norm(b)
            det_changes = arc_sign_changes(_det_a, a, b)
            product_changes = arc_sign_changes(_factored, a, b)
            assert len(det_changes) == len(product_changes)
            for t_det, t_product in zip(det_changes, product_changes):
                assert abs(t_det - t_product) <= 1e-8

    def test_det_b_constant(self, pose_factory, scale) -> None:
        """det(B) is the same constant 4 at every pose."""
        dets = [np.linalg.det(velocity_model(pose_factory()).b) for _ in range(scale(10000, 200))]
        assert np.ptp(dets) <= 1e-12 * abs(dets[0])
        assert dets[0] == pytest.approx(4.0)


class TestEliminatedIdentity:
    """The full and eliminated singularity products."""

    def test_products_agree(self, quaternion_factory, scale) -> None:
        """Both products agree to 1e-12 for random orientations."""
        for _ in range(scale(10000, 1000)):
            q = quaternion_factory()
            full, reduced = eliminated_equivalence_check(q)
            assert abs(full - reduced) <= 1e-12


@pytest.mark.slow
class TestPlanarAgainstFullSolver:
    """The planar quadratic against the general solver."""

    def test_random_planar_inputs(self, rng: np.random.Generator, scale) -> None:
        """Every planar root is a verified pose that the general solver also finds."""
        checked = 0
        while checked < scale(100, 15):
            r1, r2, r3 = rng.uniform(-0.5, 0.5, size=3)
            joints = ActuatedJoints(r1, 0.0, r2, 0.0, r3, 0.0)
            if planar_quadratic_coefficients(joints).degenerate or abs(r1 + r2 + r3) < 1e-3:
                continue
            solutions = planar_direct_kinematics(joints)
            general = direct_kinematics(joints).solutions
            for _, p in solutions:
                assert max_residual(p, joints) <= 1e-9
                assert any(pose_distance(p, s) <= 1e-8 for s in general)
            checked += 1

    def test_symmetric_roots(self) -> None:
        """Symmetric joints give the known pair of roots."""
        roots = [rho1x for rho1x, _ in planar_direct_kinematics(ActuatedJoints(0.1, 0.0, 0.1, 0.0, 0.1, 0.0))]
        assert roots == pytest.approx([-math.sqrt(2.91 / 9.0), math.sqrt(2.91 / 9.0)], abs=1e-12)


class TestVelocityModel:
    """The velocity relation A·t + B·ρ̇ = 0."""

    def test_finite_difference_pairs(self, pose_factory, rng: np.random.Generator, scale) -> None:
        """Finite differences along ten unit twists per pose satisfy the relation."""
        for _ in range(scale(100, 20)):
            p = pose_factory()
            for twist in rng.normal(size=(10, 6)):
                assert velocity_residual(p, twist / np.linalg.norm(twist)) <= 1e-6


class TestSurfaceExport:
    """Surface point clouds written by the CLI."""

    def test_csv_rows_satisfy_equations(self, tmp_path, capsys: pytest.CaptureFixture[str]) -> None:
        """Each CSV row satisfies the implicit equation of its surface."""
        out = tmp_path / "surfaces.csv"
        assert run(["surfaces", "--resolution", "64", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "surface_id,q2,q3,q4"
        for line in lines[1:]:
            surface_id, *values = line.split(",")
            q2, q3, q4 = map(float, values)
            if surface_id == "cylinder":
                assert abs(2 * q2 * q2 + 2 * q3 * q3 - 1) <= 1e-9
            elif surface_id == "ellipsoid":
                assert abs(q2 * q2 + q3 * q3 + 2 * q4 * q4 - 1) <= 1e-9
            else:
                assert surface_id == "selfmotion_circle"
                assert abs(q2 * q2 + q3 * q3 - 1) <= 1e-9
                assert abs(q2 * q2 + q3 * q3 + 2 * q4 * q4 - 1) <= 1e-12

    def test_sampler_and_export_agree(self) -> None:
        """The sampler emits 2·n² + n points."""
        assert len(sample_singularity_surfaces(64)) == 64 * 64 * 2 + 64


class TestPositionIndependence:
    """Singularity reports are independent of platform position."""

    def test_reports_identical(self, quaternion_factory, rng: np.random.Generator, scale) -> None:
        """Two positions with the same orientation give identical reports."""
        for _ in range(scale(1000, 100)):
            q = quaternion_factory()
            a = singularity_report(Pose(*rng.uniform(-2, 2, size=3), q))
            b = singularity_report(Pose(*rng.uniform(-2, 2, size=3), q))
            assert a.det_a == pytest.approx(b.det_a, abs=1e-12)
            assert a.factored_value == b.factored_value
            np.testing.assert_allclose(a.selfmotion_locus_residuals, b.selfmotion_locus_residuals, atol=1e-12)
            assert a.is_singular == b.is_singular
