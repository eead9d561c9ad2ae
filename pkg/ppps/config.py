"""Solver options and config-file loading."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ConfigurationError


@dataclass(frozen=True)
class SolverOptions:
    """Numeric knobs shared by the solvers, samplers and the CLI."""

    max_iterations: int = 200
    tolerance: float = 1e-12
    divergence_threshold: float = 1e6
    verify_tolerance: float = 1e-9
    dedup_tolerance: float = 1e-6
    seed_density: int = 3  # x seeds = linspace(-2, 2, seed_density)
    deflation_power: float = 2.0
    deflation_shift: float = 1.0
    line_search_min_step: float = 1e-4
    stall_window: int = 4  # 0 keeps iterating until max_iterations
    analytic_seeds: bool = True
    self_motion_tolerance: float = 1e-10
    near_degenerate_tolerance: float = 1e-6
    resolution: int = 64
    family_samples: int = 360

    def __post_init__(self) -> None:
        """Validate ranges."""
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be >= 1", max_iterations=self.max_iterations)
        if self.seed_density < 1:
            raise ConfigurationError("seed_density must be >= 1", seed_density=self.seed_density)
        if self.resolution < 8:
            raise ConfigurationError("resolution must be >= 8", resolution=self.resolution)
        if self.family_samples < 1:
            raise ConfigurationError("family_samples must be >= 1", family_samples=self.family_samples)
        if self.stall_window < 0:
            raise ConfigurationError("stall_window must be >= 0", stall_window=self.stall_window)
        if not 0 < self.line_search_min_step < 1:
            raise ConfigurationError(
                "line_search_min_step must lie in (0, 1)", line_search_min_step=self.line_search_min_step
            )
        for name in (
            "tolerance",
            "divergence_threshold",
            "verify_tolerance",
            "dedup_tolerance",
            "deflation_power",
            "deflation_shift",
            "self_motion_tolerance",
            "near_degenerate_tolerance",
        ):
            value = getattr(self, name)
            if not value > 0:
                raise ConfigurationError(f"{name} must be positive", **{name: value})

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "SolverOptions":
        """Build options from a mapping of flag-style or field-style keys.

        Args:
            mapping: Keys like ``max-iterations`` or ``max_iterations``

        Returns:
            Options with unspecified fields left at their defaults
        """
        known = {f.name: f for f in fields(cls)}
        values: dict[str, Any] = {}
        for key, value in mapping.items():
            name = str(key).replace("-", "_")
            if name not in known:
                raise ConfigurationError(f"unknown option: {key}", option=key)
            values[name] = _coerce(known[name].type, value, name)
        return cls(**values)

    def merged(self, overrides: Mapping[str, Any]) -> "SolverOptions":
        """Return a copy with non-None overrides applied."""
        current = asdict(self)
        current.update({k: v for k, v in overrides.items() if v is not None})
        return SolverOptions.from_mapping(current)

    def to_dict(self) -> dict[str, Any]:
        """Plain dict view, in field order."""
        return asdict(self)


TRUE_WORDS = ("1", "true", "yes", "on")
FALSE_WORDS = ("0", "false", "no", "off")


def _coerce(type_name: Any, value: Any, name: str) -> Any:
    type_name = str(type_name)
    try:
        if type_name == "bool":
            if isinstance(value, str):
                word = value.strip().lower()
                if word in TRUE_WORDS:
                    return True
                if word in FALSE_WORDS:
                    return False
                raise ValueError(value)
            if isinstance(value, (bool, int)) and value in (0, 1):
                return bool(value)
            raise ValueError(value)
        if type_name == "int":
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        return float(value)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"invalid value for {name}: {value!r}", option=name) from e


def load_options(path: str | Path | None, base: SolverOptions | None = None) -> SolverOptions:
    """Load options from a YAML or JSON config file.

    Args:
        path: Config file path; ``None`` returns ``base`` unchanged
        base: Options the file is layered on (defaults if omitted)

    Returns:
        Merged options

    Raises:
        ConfigurationError: Missing, unreadable or malformed file, or bad values
    """
    base = base or SolverOptions()
    if path is None:
        return base

    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}", path=str(path))

    try:
        with open(path) as f:
            if path.suffix == ".json":
                data = json.load(f)
            else:
                data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigurationError(f"cannot read config file {path}: {e.strerror}", path=str(path)) from e
    except (json.JSONDecodeError, UnicodeDecodeError, yaml.YAMLError) as e:
        raise ConfigurationError(f"malformed config file {path}: {e}", path=str(path)) from e

    if data is None:
        return base
    if not isinstance(data, dict):
        raise ConfigurationError("config file must hold a mapping", path=str(path))
    return base.merged(data)
