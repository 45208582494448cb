"""
Experiment configuration model

An ExperimentConfig is built from a flat mapping of dotted `section.key`
names (as resolved by ConfigManager) and fully describes one run. Its
config_hash names the bundle directory.
"""

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

from ..constants import (
    BOUNDARY_KINDS,
    CONFIG_HASH_LENGTH,
    COEFFICIENT_PROFILES,
    DEFAULT_BETA,
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_SOLVER_TOLERANCE,
    DOMAIN_SIDES,
    INTEGRAND_TAGS,
    SIDE_ONE_SIDE,
    SUPPORTED_REPORT_FORMATS,
)
from ..exceptions import ConfigError
from .base import ValidatedModel
from .serialization import to_builtin

EXPERIMENT_MODES = ["green", "boundary_ball"]

SECTION_KEYS: dict[str, set[str] | None] = {
    "boundary": None,  # generator parameters pass through
    "domain": {"side", "lower", "upper"},
    "operator": {"beta", "profile", "axis", "offset"},
    "grid": {"h_ladder", "tolerance", "max_iterations"},
    "experiment": {"mode", "pole", "ball_center", "ball_radius"},
    "functional": {"tags", "scales", "epsilon"},
    "dyadic": {"k_min", "k_max"},
    "output": {"dir", "svg", "format", "verbose", "quiet"},
    "run": {"seed", "threads"},
}

# Keys that do not change any computed number
HASH_EXCLUDED = {"output_dir", "threads", "verbose", "quiet", "output_format"}


def _as_float_list(value: Any, key: str) -> list[float] | None:
    if value is None:
        return None
    if isinstance(value, int | float):
        return [float(value)]
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be a list of numbers", config_key=key) from exc


def _as_str_list(value: Any) -> list[str]:
    if value is None:
        return []
    if isinstance(value, str):
        return [part.strip() for part in value.split(",") if part.strip()]
    return [str(v) for v in value]


def _typed(value: Any, kind: type, key: str) -> Any:
    if value is None:
        return None
    if kind is bool and isinstance(value, str):
        return value.strip().lower() in ("1", "true", "yes", "on")
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be of type {kind.__name__}", config_key=key) from exc


@dataclass
class ExperimentConfig(ValidatedModel):
    """Resolved configuration of one experiment run"""

    boundary_kind: str = "plane"
    boundary_params: dict[str, Any] = field(default_factory=dict)
    domain_side: str = SIDE_ONE_SIDE
    domain_lower: list[float] | None = None
    domain_upper: list[float] | None = None
    beta: float = DEFAULT_BETA
    profile: str = "identity"
    profile_axis: int = -1
    profile_offset: float = 0.0
    h_ladder: list[float] = field(default_factory=lambda: [1.0 / 32])
    tolerance: float = DEFAULT_SOLVER_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    mode: str = "green"
    pole: list[float] | None = None
    ball_center: list[float] | None = None
    ball_radius: float | None = None
    tags: list[str] = field(default_factory=list)
    scales: list[float] | None = None
    epsilon: float = 0.1
    k_min: int = 0
    k_max: int = 4
    output_dir: str = "urlab_runs"
    svg: bool = False
    output_format: str = "markdown"
    verbose: bool = False
    quiet: bool = False
    seed: int = 0
    threads: int = 1

    def validate(self) -> None:
        """Raise ConfigError naming the first problem found"""
        problems = self.problems()
        if problems:
            key, message = problems[0]
            raise ConfigError(message, config_key=key)

    def problems(self) -> list[tuple[str, str]]:
        """All (config key, message) problems of this configuration"""
        found: list[tuple[str, str]] = []

        def add(key: str, message: str) -> None:
            found.append((key, message))

        if self.boundary_kind not in BOUNDARY_KINDS:
            add("boundary.kind", f"Unknown boundary kind: {self.boundary_kind}. Must be one of: {', '.join(BOUNDARY_KINDS)}")
        if self.domain_side not in DOMAIN_SIDES:
            add("domain.side", f"Unknown domain side: {self.domain_side}")
        for tag in self.tags:
            if tag not in INTEGRAND_TAGS:
                add("functional.tags", f"Unknown integrand tag: {tag}")
        if self.profile not in COEFFICIENT_PROFILES:
            add("operator.profile", f"Unknown coefficient profile: {self.profile}")
        if not self.beta > 0:
            add("operator.beta", f"beta must be positive, got {self.beta}")

        if not self.h_ladder:
            add("grid.h_ladder", "h ladder must not be empty")
        elif any(h <= 0 for h in self.h_ladder):
            add("grid.h_ladder", "Grid spacings must be positive")
        elif any(b >= a for a, b in zip(self.h_ladder, self.h_ladder[1:], strict=False)):
            add("grid.h_ladder", f"h ladder must be strictly decreasing: {self.h_ladder}")
        if not self.tolerance > 0:
            add("grid.tolerance", "Solver tolerance must be positive")
        if self.max_iterations < 1:
            add("grid.max_iterations", "max_iterations must be at least 1")

        box_ok = self.domain_lower is not None and self.domain_upper is not None
        if (self.domain_lower is None) != (self.domain_upper is None):
            add("domain.lower", "domain.lower and domain.upper must be given together")
        if box_ok:
            assert self.domain_lower is not None and self.domain_upper is not None
            if len(self.domain_lower) != len(self.domain_upper):
                add("domain.lower", "Box corners must have the same dimension")
                box_ok = False
            elif any(lo >= hi for lo, hi in zip(self.domain_lower, self.domain_upper, strict=True)):
                add("domain.lower", "Box lower corner must be below upper corner in every coordinate")
                box_ok = False

        if self.mode not in EXPERIMENT_MODES:
            add("experiment.mode", f"Unknown experiment mode: {self.mode}")
        if self.pole is not None and box_ok and not self._inside(self.pole):
            add("experiment.pole", f"Pole {self.pole} lies outside the box")
        if self.mode == "boundary_ball":
            if self.ball_center is None or self.ball_radius is None:
                add("experiment.ball_center", "boundary_ball mode needs ball_center and ball_radius")
            elif not self.ball_radius > 0:
                add("experiment.ball_radius", "ball_radius must be positive")

        if self.scales is not None and any(r <= 0 for r in self.scales):
            add("functional.scales", "Scales must be positive")
        if not self.epsilon > 0:
            add("functional.epsilon", "BWGL threshold epsilon must be positive")
        if self.k_min > self.k_max:
            add("dyadic.k_min", "k_min must not exceed k_max")
        if self.output_format not in SUPPORTED_REPORT_FORMATS:
            add("output.format", f"Invalid output format: {self.output_format}")
        if self.threads < 1:
            add("run.threads", "Thread count must be at least 1")
        return found

    def _inside(self, point: list[float]) -> bool:
        assert self.domain_lower is not None and self.domain_upper is not None
        if len(point) != len(self.domain_lower):
            return False
        return all(
            lo < x < hi for x, lo, hi in zip(point, self.domain_lower, self.domain_upper, strict=True)
        )

    @classmethod
    def from_flat(cls, flat: dict[str, Any], validate: bool = True) -> "ExperimentConfig":
        """
        Build from dotted keys.

        Raises:
            ConfigError: Unknown keys, mistyped values or (when validate is
                set) failed validation
        """
        boundary_params: dict[str, Any] = {}
        for key, value in flat.items():
            section, _, name = key.partition(".")
            if section not in SECTION_KEYS or not name:
                raise ConfigError(f"Unknown configuration key: {key}", config_key=key)
            allowed = SECTION_KEYS[section]
            if allowed is None:
                if name != "kind" and value is not None:
                    boundary_params[name] = value
            elif name not in allowed:
                raise ConfigError(f"Unknown configuration key: {key}", config_key=key)

        def get(key: str, default: Any = None) -> Any:
            value = flat.get(key)
            return default if value is None else value

        config = cls.__new__(cls)
        config.boundary_kind = str(get("boundary.kind", "plane"))
        config.boundary_params = boundary_params
        config.domain_side = str(get("domain.side", SIDE_ONE_SIDE))
        config.domain_lower = _as_float_list(flat.get("domain.lower"), "domain.lower")
        config.domain_upper = _as_float_list(flat.get("domain.upper"), "domain.upper")
        config.beta = _typed(get("operator.beta", DEFAULT_BETA), float, "operator.beta")
        config.profile = str(get("operator.profile", "identity"))
        config.profile_axis = _typed(get("operator.axis", -1), int, "operator.axis")
        config.profile_offset = _typed(get("operator.offset", 0.0), float, "operator.offset")
        config.h_ladder = _as_float_list(get("grid.h_ladder", [1.0 / 32]), "grid.h_ladder") or []
        config.tolerance = _typed(get("grid.tolerance", DEFAULT_SOLVER_TOLERANCE), float, "grid.tolerance")
        config.max_iterations = _typed(get("grid.max_iterations", DEFAULT_MAX_ITERATIONS), int, "grid.max_iterations")
        config.mode = str(get("experiment.mode", "green"))
        config.pole = _as_float_list(flat.get("experiment.pole"), "experiment.pole")
        config.ball_center = _as_float_list(flat.get("experiment.ball_center"), "experiment.ball_center")
        config.ball_radius = _typed(flat.get("experiment.ball_radius"), float, "experiment.ball_radius")
        config.tags = _as_str_list(flat.get("functional.tags"))
        config.scales = _as_float_list(flat.get("functional.scales"), "functional.scales")
        config.epsilon = _typed(get("functional.epsilon", 0.1), float, "functional.epsilon")
        config.k_min = _typed(get("dyadic.k_min", 0), int, "dyadic.k_min")
        config.k_max = _typed(get("dyadic.k_max", 4), int, "dyadic.k_max")
        config.output_dir = str(get("output.dir", "urlab_runs"))
        config.svg = _typed(get("output.svg", False), bool, "output.svg")
        config.output_format = str(get("output.format", "markdown"))
        config.verbose = _typed(get("output.verbose", False), bool, "output.verbose")
        config.quiet = _typed(get("output.quiet", False), bool, "output.quiet")
        config.seed = _typed(get("run.seed", 0), int, "run.seed")
        config.threads = _typed(get("run.threads", 1), int, "run.threads")
        if validate:
            config.validate()
        return config

    def to_flat(self) -> dict[str, Any]:
        """Inverse of from_flat"""
        flat = {
            "boundary.kind": self.boundary_kind,
            "domain.side": self.domain_side,
            "domain.lower": self.domain_lower,
            "domain.upper": self.domain_upper,
            "operator.beta": self.beta,
            "operator.profile": self.profile,
            "operator.axis": self.profile_axis,
            "operator.offset": self.profile_offset,
            "grid.h_ladder": self.h_ladder,
            "grid.tolerance": self.tolerance,
            "grid.max_iterations": self.max_iterations,
            "experiment.mode": self.mode,
            "experiment.pole": self.pole,
            "experiment.ball_center": self.ball_center,
            "experiment.ball_radius": self.ball_radius,
            "functional.tags": self.tags,
            "functional.scales": self.scales,
            "functional.epsilon": self.epsilon,
            "dyadic.k_min": self.k_min,
            "dyadic.k_max": self.k_max,
            "output.dir": self.output_dir,
            "output.svg": self.svg,
            "output.format": self.output_format,
            "output.verbose": self.verbose,
            "output.quiet": self.quiet,
            "run.seed": self.seed,
            "run.threads": self.threads,
        }
        flat.update({f"boundary.{k}": v for k, v in self.boundary_params.items()})
        return to_builtin(flat)

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON of every result-affecting field, truncated"""
        payload = {k: v for k, v in self.to_dict().items() if k not in HASH_EXCLUDED}
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:CONFIG_HASH_LENGTH]
