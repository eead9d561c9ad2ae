"""JSON and CSV output.

JSON documents carry ``schema_version`` and use the shortest float repr that
round-trips exactly; CSV floats are written with ``%.17g``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Sequence

import numpy as np

from .kinematics import DKOutcome
from .model import FullJointState, Pose

SCHEMA_VERSION = 1


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # JSON has no NaN or infinity
        return value if math.isfinite(value) else None
    return value


def to_json(kind: str, payload: dict[str, Any]) -> str:
    """Versioned JSON document ``{"schema_version", "kind", ...payload}``."""
    document = {"schema_version": SCHEMA_VERSION, "kind": kind}
    document.update(_plain(payload))
    return json.dumps(document, indent=2, allow_nan=False) + "\n"


def format_float(value: float) -> str:
    return "%.17g" % value


def to_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """CSV text with a header row; floats at 17 significant digits."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buffer.getvalue()


def joint_state_payload(state: FullJointState) -> dict[str, Any]:
    return {
        "actuated": state.actuated.to_dict(),
        "passive": {"rho1x": state.rho1x, "rho2x": state.rho2x, "rho3x": state.rho3x},
    }


def outcome_payload(outcome: DKOutcome) -> dict[str, Any]:
    """Direct-kinematics outcome as a plain mapping."""

    def poses(items: Sequence[Pose]) -> list[dict[str, float]]:
        return [p.to_dict() for p in items]

    family = outcome.self_motion_family
    return {
        "outcome": outcome.kind.value,
        "solutions": poses(outcome.solutions),
        "self_motion_family": family.to_dict() if family is not None else None,
        "isolated_solutions": poses(outcome.isolated_solutions),
        "warnings": list(outcome.warnings),
    }
