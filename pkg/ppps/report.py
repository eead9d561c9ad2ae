"""Headline checks of the robot model and a Markdown report of them."""

from __future__ import annotations

import math
import time
from datetime import datetime
from logging import getLogger
from pathlib import Path
from typing import Any

import numpy as np

from .config import SolverOptions
from .kinematics import OutcomeKind, direct_kinematics, inverse_kinematics
from .model import ActuatedJoints, Pose, UnitQuaternion
from .selfmotion import cardanic_family, self_motion_axes_check
from .singularity import (
    eliminated_equivalence_check,
    sample_singularity_surfaces,
    selfmotion_locus_residuals,
    singularity_report,
    velocity_residual,
)

logger = getLogger(__name__)


def _result(name: str, passed: bool, details: str) -> dict[str, Any]:
    logger.info("%s: %s (%s)", name, "pass" if passed else "FAIL", details)
    return {"name": name, "passed": bool(passed), "details": details}


def check_home_ik() -> dict[str, Any]:
    joints = inverse_kinematics(Pose.home()).actuated.as_array()
    worst = float(np.max(np.abs(joints)))
    return _result("Home pose IK", worst <= 1e-12, f"max |rho| = {worst:.3g}")


def check_home_dk(options: SolverOptions) -> dict[str, Any]:
    outcome = direct_kinematics(ActuatedJoints.zeros(), options)
    return _result("Home joints DK", outcome.kind is OutcomeKind.SELF_MOTION, f"outcome {outcome.kind.value}")


def check_family(options: SolverOptions) -> dict[str, Any]:
    family = cardanic_family(ActuatedJoints.zeros())
    samples = family.sample(options.family_samples)
    residual = max(s.max_residual for s in samples)
    locus = max(float(np.max(np.abs(selfmotion_locus_residuals(s.pose.orientation)))) for s in samples)
    joints = max(float(np.max(np.abs(inverse_kinematics(s.pose).actuated.as_array()))) for s in samples)
    axes = all(self_motion_axes_check(s.pose) for s in samples)
    passed = residual <= 1e-10 and locus <= 1e-12 and joints <= 1e-10 and axes
    return _result(
        "Cardanic family",
        passed,
        f"{len(samples)} members, residual {residual:.3g}, locus {locus:.3g}, axes concurrent: {axes}",
    )


def check_surfaces(options: SolverOptions) -> dict[str, Any]:
    points = sample_singularity_surfaces(options.resolution)
    worst = max(abs(p.implicit_value()) for p in points)
    return _result("Singularity surfaces", worst <= 1e-9, f"{len(points)} points, worst equation {worst:.3g}")


def check_elimination(count: int = 1000, seed: int = 0) -> dict[str, Any]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for values in rng.normal(size=(count, 4)):
        full, reduced = eliminated_equivalence_check(UnitQuaternion.from_array(values, normalize=True))
        worst = max(worst, abs(full - reduced))
    return _result("Eliminated factor identity", worst <= 1e-12, f"{count} quaternions, worst gap {worst:.3g}")


def check_velocity(count: int = 20, seed: int = 0) -> dict[str, Any]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        q = UnitQuaternion.from_array(rng.normal(size=4), normalize=True)
        x, y, z = rng.uniform(-1.0, 1.0, size=3)
        twist = rng.normal(size=6)
        worst = max(worst, velocity_residual(Pose(x, y, z, q), twist / np.linalg.norm(twist)))
    return _result("Velocity model", worst <= 1e-6, f"{count} poses, worst residual {worst:.3g}")


def check_det_ratio() -> dict[str, Any]:
    ratio = singularity_report(Pose.home()).det_ratio
    expected = 3.0 * math.sqrt(3.0)
    passed = ratio is not None and abs(ratio - expected) <= 1e-9
    return _result("det(A) / factored product", passed, f"ratio {ratio!r} at home")


def run_checks(options: SolverOptions | None = None) -> list[dict[str, Any]]:
    """Evaluate every headline check; each result has name, passed and details."""
    options = options or SolverOptions()
    return [
        check_home_ik(),
        check_home_dk(options),
        check_family(options),
        check_surfaces(options),
        check_elimination(),
        check_velocity(),
        check_det_ratio(),
    ]


def generate_report(
    results: list[dict[str, Any]],
    start_time: float,
    output_dir: str | Path = "reports",
    name: str = "kinematics",
) -> str:
    """Write a Markdown report of ``results`` and return its path."""
    duration = time.time() - start_time
    now = datetime.now()

    report_path = Path(output_dir) / f"{now.strftime('%Y-%m-%d_%H-%M-%S')}_{name}.md"
    report_path.parent.mkdir(parents=True, exist_ok=True)

    passed = sum(1 for r in results if r.get("passed"))
    lines = [
        f"# Check Report: {name}",
        "",
        f"**Date:** {now.strftime('%Y-%m-%d %H:%M:%S')}",
        f"**Duration:** {duration:.2f} seconds",
        f"**Passed:** {passed}/{len(results)}",
        "",
        "## Results",
        "",
        "| Check | Status | Details |",
        "|-------|--------|---------|",
    ]
    for result in results:
        status = "✅ PASS" if result.get("passed") else "❌ FAIL"
        lines.append(f"| {result['name']} | {status} | {result.get('details', '')} |")

    report_path.write_text("\n".join(lines) + "\n")
    return str(report_path)
