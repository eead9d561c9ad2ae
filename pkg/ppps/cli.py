"""Command-line front end.

Every subcommand parses its inputs, calls one library operation and writes
JSON or CSV to stdout (or ``--out``). Exit codes: 0 success, 1 domain
error (JSON error document on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .config import SolverOptions, load_options
from .errors import ConfigurationError, KinematicsError
from .kinematics import direct_kinematics, inverse_kinematics, planar_direct_kinematics
from .model import JOINT_NAMES, POSE_NAMES, ActuatedJoints, Pose, UnitQuaternion
from .selfmotion import (
    FAMILY_CSV_COLUMNS,
    cardanic_family,
    family_csv_rows,
    self_motion_axes_check,
    self_motion_condition,
)
from .serialize import joint_state_payload, outcome_payload, to_csv, to_json
from .singularity import (
    SURFACE_CSV_COLUMNS,
    sample_singularity_surfaces,
    singularity_report,
    velocity_model,
    velocity_residual,
)

logger = logging.getLogger(__name__)

# Supported formats per subcommand; the first is the default.
FORMATS = {
    "ik": ("json", "csv"),
    "dk": ("json",),
    "planar-dk": ("json", "csv"),
    "selfmotion-check": ("json",),
    "selfmotion-trace": ("csv", "json"),
    "singularity": ("json",),
    "surfaces": ("csv", "json"),
    "velocity-check": ("json",),
}


class UsageError(Exception):
    """Bad input detected after argparse; reported like an argparse error."""


def _numbers(text: str, count: int, what: str) -> list[float]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != count:
        raise argparse.ArgumentTypeError(f"{what} needs {count} comma-separated numbers, got {len(parts)}")
    values = []
    for part in parts:
        try:
            value = float(part)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{what}: not a number: {part!r}") from None
        if not math.isfinite(value):
            raise argparse.ArgumentTypeError(f"{what}: non-finite value: {part!r}")
        values.append(value)
    return values


def pose_values(text: str) -> list[float]:
    """argparse type for x,y,z,q1,q2,q3,q4."""
    return _numbers(text, 7, "pose")


def joint_values(text: str) -> list[float]:
    """argparse type for rho1y,rho1z,rho2y,rho2z,rho3y,rho3z."""
    return _numbers(text, 6, "joints")


def twist_values(text: str) -> list[float]:
    return _numbers(text, 6, "twist")


def _read_values(path: str, names: Sequence[str], what: str) -> list[float]:
    """Read a file holding either a JSON object keyed by ``names`` or a number list."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {what} file {path}: {e.strerror}") from e

    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise UsageError(f"{what} file {path} is not valid JSON: {e}") from e
        missing = [n for n in names if n not in data]
        if missing:
            raise UsageError(f"{what} file {path} is missing {', '.join(missing)}")
        text = ",".join(str(data[n]) for n in names)

    try:
        return _numbers(text, len(names), what)
    except argparse.ArgumentTypeError as e:
        raise UsageError(f"{path}: {e}") from e


def _pose(args: argparse.Namespace) -> Pose:
    values = args.pose if args.pose is not None else _read_values(args.pose_file, POSE_NAMES, "pose")
    return Pose(values[0], values[1], values[2], UnitQuaternion.from_array(values[3:]))


def _joints(args: argparse.Namespace) -> ActuatedJoints:
    values = args.joints if args.joints is not None else _read_values(args.joints_file, JOINT_NAMES, "joints")
    return ActuatedJoints.from_array(values)


# Option fields settable from the command line, with their flag spelling.
OPTION_FLAGS = {
    "max_iterations": "--max-iterations",
    "tolerance": "--tolerance",
    "verify_tolerance": "--verify-tolerance",
    "seed_density": "--seed-density",
    "resolution": "--resolution",
    "family_samples": "--samples",
}


def _options(args: argparse.Namespace) -> SolverOptions:
    """Config file first, then explicit flags on top.

    Flags are checked on their own first, so a bad flag is a usage error
    while a bad config file stays a configuration error.
    """
    flags = {
        "max_iterations": args.max_iterations,
        "tolerance": args.tolerance,
        "verify_tolerance": args.verify_tolerance,
        "seed_density": args.seed_density,
        "resolution": getattr(args, "resolution", None),
        "family_samples": getattr(args, "samples", None),
    }
    for name, value in flags.items():
        if value is None:
            continue
        try:
            SolverOptions().merged({name: value})
        except ConfigurationError as e:
            raise UsageError(e.message.replace(name, OPTION_FLAGS[name], 1)) from e

    options = load_options(args.config)
    return options.merged({**flags, "analytic_seeds": False if args.no_analytic_seeds else None})


def cmd_ik(args: argparse.Namespace, options: SolverOptions) -> str:
    pose = _pose(args)
    state = inverse_kinematics(pose)
    if args.format == "csv":
        columns = (*JOINT_NAMES, "rho1x", "rho2x", "rho3x")
        row = (*state.actuated.as_tuple(), state.rho1x, state.rho2x, state.rho3x)
        return to_csv(columns, [row])
    return to_json("ik", {"pose": pose.to_dict(), **joint_state_payload(state)})


def cmd_dk(args: argparse.Namespace, options: SolverOptions) -> str:
    joints = _joints(args)
    outcome = direct_kinematics(joints, options)
    return to_json("dk", {"joints": joints.to_dict(), **outcome_payload(outcome)})


def cmd_planar_dk(args: argparse.Namespace, options: SolverOptions) -> str:
    joints = _joints(args)
    solutions = planar_direct_kinematics(joints, options.verify_tolerance)
    if args.format == "csv":
        return to_csv(("rho1x", *POSE_NAMES), [(rho1x, *pose.as_array()) for rho1x, pose in solutions])
    return to_json(
        "planar-dk",
        {
            "joints": joints.to_dict(),
            "solutions": [{"rho1x": rho1x, "pose": pose.to_dict()} for rho1x, pose in solutions],
        },
    )


def cmd_selfmotion_check(args: argparse.Namespace, options: SolverOptions) -> str:
    payload: dict[str, Any] = {}
    if args.pose is not None or args.pose_file is not None:
        pose = _pose(args)
        joints = inverse_kinematics(pose).actuated
        axes = self_motion_axes_check(pose)
        payload["pose"] = pose.to_dict()
        payload["axes"] = {
            "concurrent": axes.concurrent,
            "intersection": list(axes.intersection),
            "residual": axes.residual,
            "angles": list(axes.angles),
        }
    else:
        joints = _joints(args)
    payload["joints"] = joints.to_dict()
    payload["self_motion"] = self_motion_condition(joints, options.self_motion_tolerance).to_dict()
    return to_json("selfmotion-check", payload)


def cmd_selfmotion_trace(args: argparse.Namespace, options: SolverOptions) -> str:
    family = cardanic_family(_joints(args), options.self_motion_tolerance)
    samples = family.sample(options.family_samples)
    if args.format == "csv":
        return to_csv(FAMILY_CSV_COLUMNS, family_csv_rows(samples))
    return to_json(
        "selfmotion-trace",
        {
            "family": family.to_dict(),
            "samples": [dict(zip(FAMILY_CSV_COLUMNS, s.csv_row())) for s in samples],
        },
    )


def cmd_singularity(args: argparse.Namespace, options: SolverOptions) -> str:
    pose = _pose(args)
    report = singularity_report(pose)
    model = velocity_model(pose)
    return to_json("singularity", {"pose": pose.to_dict(), **report.to_dict(), "velocity_model": model.to_dict()})


def cmd_surfaces(args: argparse.Namespace, options: SolverOptions) -> str:
    points = sample_singularity_surfaces(options.resolution)
    if args.format == "csv":
        return to_csv(SURFACE_CSV_COLUMNS, [p.csv_row() for p in points])
    return to_json(
        "surfaces",
        {"resolution": options.resolution, "points": [dict(zip(SURFACE_CSV_COLUMNS, p.csv_row())) for p in points]},
    )


def cmd_velocity_check(args: argparse.Namespace, options: SolverOptions) -> str:
    if args.directions < 1:
        raise UsageError("--directions must be >= 1")
    pose = _pose(args)
    if args.twist is not None:
        twists = [np.array(args.twist)]
    else:
        rng = np.random.default_rng(args.seed)
        twists = [t / np.linalg.norm(t) for t in rng.normal(size=(args.directions, 6))]
    residuals = [velocity_residual(pose, t, args.step) for t in twists]
    return to_json(
        "velocity-check",
        {
            "pose": pose.to_dict(),
            "step": args.step,
            "twists": [t.tolist() for t in twists],
            "residuals": residuals,
            "max_residual": max(residuals),
        },
    )


COMMANDS: dict[str, Callable[[argparse.Namespace, SolverOptions], str]] = {
    "ik": cmd_ik,
    "dk": cmd_dk,
    "planar-dk": cmd_planar_dk,
    "selfmotion-check": cmd_selfmotion_check,
    "selfmotion-trace": cmd_selfmotion_trace,
    "singularity": cmd_singularity,
    "surfaces": cmd_surfaces,
    "velocity-check": cmd_velocity_check,
}


def _add_pose_input(parser: argparse.ArgumentParser, required: bool = True) -> None:
    group = parser.add_mutually_exclusive_group(required=required)
    group.add_argument("--pose", type=pose_values, metavar="X,Y,Z,Q1,Q2,Q3,Q4", help="Platform pose")
    group.add_argument("--pose-file", metavar="PATH", help="File with a pose (JSON object or number list)")


def _add_joint_input(parser: argparse.ArgumentParser, required: bool = True) -> argparse._MutuallyExclusiveGroup:
    group = parser.add_mutually_exclusive_group(required=required)
    group.add_argument("--joints", type=joint_values, metavar="R1Y,R1Z,R2Y,R2Z,R3Y,R3Z", help="Actuated joints")
    group.add_argument("--joints-file", metavar="PATH", help="File with joints (JSON object or number list)")
    return group


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv"], help="Output format")
    common.add_argument("--out", metavar="PATH", help="Write output here instead of stdout")
    common.add_argument("--config", metavar="PATH", help="YAML or JSON options file (flags win)")
    common.add_argument("--max-iterations", type=int, help="Newton iteration cap")
    common.add_argument("--tolerance", type=float, help="Newton convergence tolerance")
    common.add_argument("--verify-tolerance", type=float, help="Solution acceptance tolerance")
    common.add_argument("--seed-density", type=int, help="x grid points per quaternion seed")
    common.add_argument("--no-analytic-seeds", action="store_true", help="Multistart from the grid only")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Errors only")

    parser = argparse.ArgumentParser(prog="ppps", description="3-PPPS parallel robot kinematics")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("ik", parents=[common], help="Inverse kinematics of a pose")
    _add_pose_input(p)

    p = sub.add_parser("dk", parents=[common], help="Direct kinematics of actuated joints")
    _add_joint_input(p)

    p = sub.add_parser("planar-dk", parents=[common], help="Planar direct kinematics via the quadratic")
    _add_joint_input(p)

    p = sub.add_parser("selfmotion-check", parents=[common], help="Self-motion condition of joints or a pose")
    group = _add_joint_input(p)
    group.add_argument("--pose", type=pose_values, metavar="X,Y,Z,Q1,Q2,Q3,Q4", help="Pose (adds the axes test)")
    group.add_argument("--pose-file", metavar="PATH", help="File with a pose")

    p = sub.add_parser("selfmotion-trace", parents=[common], help="Sample the Cardanic family")
    _add_joint_input(p)
    p.add_argument("--samples", type=int, help="Number of family members")

    p = sub.add_parser("singularity", parents=[common], help="Parallel-singularity report of a pose")
    _add_pose_input(p)

    p = sub.add_parser("surfaces", parents=[common], help="Singularity surface point clouds")
    p.add_argument("--resolution", type=int, help="Grid density (>= 8)")

    p = sub.add_parser("velocity-check", parents=[common], help="Finite-difference check of A t + B rho' = 0")
    _add_pose_input(p)
    p.add_argument("--twist", type=twist_values, metavar="VX,VY,VZ,WX,WY,WZ", help="Single twist to test")
    p.add_argument("--directions", type=int, default=10, help="Random unit twists when --twist is absent")
    p.add_argument("--seed", type=int, default=0, help="RNG seed for random twists")
    p.add_argument("--step", type=float, default=1e-6, help="Finite-difference step")

    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.ERROR if args.quiet else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)


def run(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv``, dispatch, write output; return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    _configure_logging(args)

    formats = FORMATS[args.command]
    if args.format is None:
        args.format = formats[0]
    elif args.format not in formats:
        parser.print_usage(sys.stderr)
        print(f"ppps: error: --format {args.format} is not supported by {args.command}", file=sys.stderr)
        return 2

    try:
        options = _options(args)
        output = COMMANDS[args.command](args, options)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"ppps: error: {e}", file=sys.stderr)
        return 2
    except KinematicsError as e:
        logger.debug("%s failed", args.command, exc_info=True)
        print(json.dumps(e.to_dict(), indent=2, default=str), file=sys.stderr)
        return 1

    if args.out:
        Path(args.out).write_text(output)
        logger.info("wrote %s", args.out)
    else:
        sys.stdout.write(output)
    return 0


def main() -> int:
    return run()
