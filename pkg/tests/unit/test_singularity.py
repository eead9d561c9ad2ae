"""Velocity model, singularity factorization and surface sampling tests."""

from __future__ import annotations

import math

import numpy as np
import pytest

from ppps.errors import InvalidInputError
from ppps.model import Pose, UnitQuaternion
from ppps.singularity import (
    SURFACE_IDS,
    arc_sign_changes,
    eliminated_equivalence_check,
    rate_map,
    sample_singularity_surfaces,
    selfmotion_locus_residuals,
    singularity_report,
    velocity_model,
    velocity_residual,
)

HALF_ROOT2 = math.sqrt(2.0) / 2.0
DET_RATIO = 3.0 * math.sqrt(3.0)

pytestmark = pytest.mark.unit


def _at(q: UnitQuaternion, x: float = 0.0, y: float = 0.0, z: float = 0.0) -> Pose:
    return Pose(x, y, z, q)


class TestVelocityModel:
    """A·t + B·ρ̇ = 0."""

    def test_b_is_constant_diagonal(self, home_pose: Pose, pose_factory) -> None:
        """B is the same constant diagonal at every pose."""
        expected = np.diag([-1.0, -1.0, -2.0, -1.0, -2.0, -1.0])
        np.testing.assert_array_equal(velocity_model(home_pose).b, expected)
        np.testing.assert_array_equal(velocity_model(pose_factory()).b, expected)
        assert np.linalg.det(expected) == pytest.approx(4.0)

    def test_a_independent_of_position(self, quaternion_factory) -> None:
        """A depends on orientation only."""
        q = quaternion_factory()
        np.testing.assert_array_equal(velocity_model(_at(q)).a, velocity_model(_at(q, 1.0, -2.0, 0.5)).a)

    def test_home_det_a(self, home_pose: Pose) -> None:
        """det A at home is 3√3."""
        assert np.linalg.det(velocity_model(home_pose).a) == pytest.approx(DET_RATIO, abs=1e-12)

    def test_quarter_turn_about_z_is_singular(self) -> None:
        """q1 = q4 makes A singular."""
        a = velocity_model(_at(UnitQuaternion(HALF_ROOT2, 0.0, 0.0, HALF_ROOT2))).a
        assert abs(np.linalg.det(a)) <= 1e-10

    def test_rate_map_is_orthogonal_to_q(self, quaternion_factory) -> None:
        """The rate map has orthonormal columns orthogonal to q."""
        q = quaternion_factory()
        g = rate_map(q)
        np.testing.assert_allclose(q.as_array() @ g, 0.0, atol=1e-15)
        np.testing.assert_allclose(g.T @ g, np.eye(3), atol=1e-12)

    def test_finite_difference_relation_at_home(self, home_pose: Pose, rng: np.random.Generator) -> None:
        """Finite differences at home satisfy the velocity relation."""
        for twist in rng.normal(size=(20, 6)):
            assert velocity_residual(home_pose, twist / np.linalg.norm(twist)) <= 1e-6

    def test_finite_difference_relation_random(self, pose_factory, rng: np.random.Generator) -> None:
        """Finite differences at random poses satisfy it as well."""
        for _ in range(10):
            p = pose_factory()
            twist = rng.normal(size=6)
            assert velocity_residual(p, twist) <= 1e-6

    def test_pure_translation(self, home_pose: Pose) -> None:
        """A pure translation is linear and nearly exact."""
        assert velocity_residual(home_pose, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]) <= 1e-8

    def test_rejects_non_finite_twist(self, home_pose: Pose) -> None:
        """Non-finite twists are rejected."""
        with pytest.raises(InvalidInputError):
            velocity_residual(home_pose, [math.nan, 0, 0, 0, 0, 0])


class TestSingularityReport:
    """Factorized singularity report."""

    def test_identity(self, home_pose: Pose) -> None:
        """Identity is regular with unit product."""
        report = singularity_report(home_pose)
        assert report.factored_value == 1.0
        assert not report.is_singular
        assert report.det_ratio == pytest.approx(DET_RATIO, abs=1e-12)

    def test_q1_equals_q4(self) -> None:
        """q1 = q4 zeroes the second factor."""
        report = singularity_report(_at(UnitQuaternion(HALF_ROOT2, 0.0, 0.0, HALF_ROOT2)))
        assert report.factor_values[1] == pytest.approx(0.0, abs=1e-15)
        assert report.is_singular
        assert report.det_ratio is None

    def test_cylinder_point(self) -> None:
        """A point on the cylinder is singular in the eliminated form."""
        report = singularity_report(_at(UnitQuaternion(HALF_ROOT2, 0.5, 0.5, 0.0)))
        assert report.eliminated_factors[1] == pytest.approx(0.0, abs=1e-15)
        assert report.is_singular

    def test_position_independent(self, quaternion_factory) -> None:
        """Reports do not depend on position."""
        for _ in range(20):
            q = quaternion_factory()
            a = singularity_report(_at(q)).to_dict()
            b = singularity_report(_at(q, 0.7, -1.3, 2.1)).to_dict()
            assert a == b

    def test_det_ratio_constant(self, pose_factory) -> None:
        """det A over the product stays at 3√3."""
        for _ in range(50):
            ratio = singularity_report(pose_factory()).det_ratio
            assert ratio == pytest.approx(DET_RATIO, rel=1e-9)


class TestEliminatedForm:
    """Eliminated singularity form."""

    def test_circle_point(self) -> None:
        """Both products vanish on the self-motion circle."""
        full, reduced = eliminated_equivalence_check(UnitQuaternion(0.0, HALF_ROOT2, HALF_ROOT2, 0.0))
        assert full == pytest.approx(0.0, abs=1e-15)
        assert reduced == pytest.approx(0.0, abs=1e-15)

    def test_identity(self) -> None:
        """Both products are 1 at identity."""
        assert eliminated_equivalence_check(UnitQuaternion.identity()) == (1.0, 1.0)

    def test_random(self, quaternion_factory) -> None:
        """Full and eliminated products agree for random orientations."""
        for _ in range(200):
            full, reduced = eliminated_equivalence_check(quaternion_factory())
            assert full == pytest.approx(reduced, abs=1e-12)


class TestSelfMotionLocus:
    """Self-motion locus polynomials."""

    def test_on_circle(self) -> None:
        """Circle points satisfy every locus polynomial."""
        np.testing.assert_allclose(selfmotion_locus_residuals(UnitQuaternion(0.0, 1.0, 0.0, 0.0)), 0.0, atol=1e-15)
        np.testing.assert_allclose(
            selfmotion_locus_residuals(UnitQuaternion(0.0, HALF_ROOT2, HALF_ROOT2, 0.0)), 0.0, atol=1e-15
        )

    def test_origin_also_satisfies_locus(self) -> None:
        """Identity satisfies the polynomials as well."""
        np.testing.assert_array_equal(selfmotion_locus_residuals(UnitQuaternion.identity()), 0.0)

    def test_generic_orientation_off_locus(self) -> None:
        """A generic orientation is clearly off the locus."""
        q = UnitQuaternion.from_array([0.5, 0.5, 0.5, 0.5])
        assert np.max(np.abs(selfmotion_locus_residuals(q))) > 0.1


class TestSurfaces:
    """Point clouds of the singularity quadrics."""

    def test_counts_and_order(self) -> None:
        """Rows come in cylinder, ellipsoid, circle order."""
        points = sample_singularity_surfaces(8)
        assert len(points) == 8 * 8 * 2 + 8
        ids = [p.surface_id for p in points]
        assert ids == ["cylinder"] * 64 + ["ellipsoid"] * 64 + ["selfmotion_circle"] * 8
        assert set(ids) == set(SURFACE_IDS)

    def test_points_satisfy_equations(self) -> None:
        """Every point satisfies its implicit equation inside the unit ball."""
        for p in sample_singularity_surfaces(16):
            assert abs(p.implicit_value()) <= 1e-9
            assert p.q2 ** 2 + p.q3 ** 2 + p.q4 ** 2 <= 1.0 + 1e-12

    def test_circle_on_ellipsoid(self) -> None:
        """The circle lies on the ellipsoid."""
        for p in sample_singularity_surfaces(16):
            if p.surface_id == "selfmotion_circle":
                assert abs(p.q2 ** 2 + p.q3 ** 2 + 2 * p.q4 ** 2 - 1.0) <= 1e-12

    def test_known_points(self) -> None:
        """The first ellipsoid point sits half a polar cell below the top pole."""
        points = sample_singularity_surfaces(8)
        ellipsoid = [p for p in points if p.surface_id == "ellipsoid"]
        polar = math.pi / 16
        assert ellipsoid[0].q2 == pytest.approx(math.sin(polar))
        assert ellipsoid[0].q3 == 0.0
        assert ellipsoid[0].q4 == pytest.approx(math.cos(polar) / math.sqrt(2.0))

    def test_ellipsoid_points_distinct(self) -> None:
        """No ellipsoid point repeats."""
        for n in (8, 13):
            ellipsoid = {
                (round(p.q2, 12), round(p.q3, 12), round(p.q4, 12))
                for p in sample_singularity_surfaces(n)
                if p.surface_id == "ellipsoid"
            }
            assert len(ellipsoid) == n * n

    def test_resolution_too_small(self) -> None:
        """Resolutions below 8 are rejected."""
        with pytest.raises(InvalidInputError):
            sample_singularity_surfaces(7)

    def test_deterministic(self) -> None:
        """Sampling is deterministic."""
        assert sample_singularity_surfaces(12) == sample_singularity_surfaces(12)


class TestArcSignChanges:
    """Sign changes along great-circle arcs."""

    def test_cosine(self) -> None:
        """cos along an arc changes sign twice."""
        changes = arc_sign_changes(lambda q: q[0], [1, 0, 0, 0], [0, 1, 0, 0])
        assert changes == pytest.approx([math.pi / 2, 3 * math.pi / 2], abs=1e-9)

    def test_no_changes(self) -> None:
        """A positive function never changes sign."""
        assert arc_sign_changes(lambda q: 1.0 + q[0] ** 2, [1, 0, 0, 0], [0, 1, 0, 0]) == []
