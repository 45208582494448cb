"""
Experiment executor for urlab CLI

Orchestrates the stages of one experiment and assembles its bundle: CSV
tables, field files, optional SVG slices and a provenance manifest.
"""

import math
import platform
import time
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass
from importlib import metadata
from pathlib import Path
from typing import Any

import numpy as np

from .. import __version__
from ..carleson import build_integrand, carleson_norm, refinement_trend, write_carleson_csv
from ..constants import (
    PROBE_MIN_SPACINGS,
    TREND_BOUNDED_FACTOR,
    TREND_DIVERGING_RATIO,
    TREND_LOG_AGREEMENT,
    TREND_RELATIVE_SLOPE,
)
from ..dyadic import CubeForest, build_christ_cubes, build_whitney, export_forest, packing_sum
from ..elliptic import (
    GridField,
    OperatorSpec,
    assemble,
    caccioppoli_check,
    gradient_bound_check,
    green_function,
    images_green,
    make_coefficients,
    solve_boundary_ball,
)
from ..exceptions import ConfigError, LabError, NumericalError, StageError
from ..geometry import BoundarySample, DomainBox, assess_uniformity, make_boundary
from ..io import OutputHandler, StreamHandler, read_boundary, write_boundary, write_field
from ..models import ExperimentConfig, SolveReport
from ..smoothdist import SmoothDistanceField, comparability_constant
from ..storage_manager import StorageManager
from ..urdiag import bwgl_report, write_beta_csv
from ..verbose_logger import ExperimentLogger

VERBS = ("gen-boundary", "solve", "functional", "bwgl", "dichotomy", "report")
MAX_PROBES = 64
UNIFORMITY_PROBES = 8


@dataclass
class Solution:
    """One rung of the refinement ladder"""

    index: int
    h: float
    u: GridField
    report: SolveReport


def library_versions() -> dict[str, str]:
    """Versions of the interpreter, urlab and its numerical stack"""
    versions = {"python": platform.python_version(), "urlab": __version__}
    for package in ("numpy", "scipy", "matplotlib", "pyyaml"):
        try:
            versions[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            versions[package] = "unknown"
    return versions


def _unit_outer_data(X: np.ndarray) -> np.ndarray:
    return np.ones(np.atleast_2d(X).shape[0])


class ExperimentExecutor:
    """Runs one verb against one configuration"""

    def __init__(
        self,
        config: ExperimentConfig,
        storage: StorageManager | None = None,
        stream: StreamHandler | None = None,
        logger: ExperimentLogger | None = None,
    ):
        """
        Initialize ExperimentExecutor

        Args:
            config: Validated experiment configuration
            storage: StorageManager rooted at the output directory
            stream: StreamHandler for user-facing progress
            logger: ExperimentLogger writing the bundle log
        """
        self.config = config
        self.config_hash = config.config_hash()
        self.storage = storage or StorageManager(config.output_dir)
        self.stream = stream or StreamHandler(verbose=config.verbose, quiet=config.quiet)
        self.logger = logger or ExperimentLogger(
            self.storage,
            self.config_hash,
            console_enabled=config.verbose,
            log_level="DEBUG" if config.verbose else "INFO",
        )
        self.bundle = self.storage.get_bundle_dir(self.config_hash)
        self.rng = np.random.default_rng(config.seed)

        self._sample: BoundarySample | None = None
        self._domain: DomainBox | None = None
        self._field: SmoothDistanceField | None = None
        self._spec: OperatorSpec | None = None
        self._forest: CubeForest | None = None
        self._solutions: list[Solution] | None = None

        self.constants: dict[str, Any] = {}
        self.residuals: list[dict[str, Any]] = []
        self.trends: dict[str, Any] = {}
        self.summaries: dict[str, Any] = {}

    # Stage plumbing

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """Run a block as a named stage; failures become StageError"""
        self.logger.log_stage(name, "started", level="DEBUG")
        self.stream.write(f"{name}...", "debug")
        start = time.perf_counter()
        try:
            yield
        except StageError:
            raise
        except LabError as e:
            self.logger.log_error(type(e).__name__, e.message, e.context, recoverable=False)
            raise StageError(name, e) from e
        except (ArithmeticError, ValueError, np.linalg.LinAlgError) as e:
            wrapped = NumericalError(str(e), context={"exception": type(e).__name__})
            self.logger.log_error(type(e).__name__, str(e), recoverable=False)
            raise StageError(name, wrapped) from e
        self.logger.log_stage(name, f"finished in {time.perf_counter() - start:.2f}s")

    def _soft(self, label: str, func, *args, **kwargs):
        """Run a diagnostic whose failure is reported, not fatal"""
        try:
            return func(*args, **kwargs)
        except NumericalError as e:
            self.logger.log_error(type(e).__name__, f"{label}: {e.message}", e.context)
            self.stream.write(f"{label} skipped: {e.message}", "warning")
            return None

    # Shared inputs

    @property
    def sample(self) -> BoundarySample:
        if self._sample is None:
            with self.stage("boundary"):
                params = dict(self.config.boundary_params)
                if self.config.boundary_kind == "custom" and "file" in params:
                    sample = read_boundary(params["file"])
                else:
                    sample = make_boundary(self.config.boundary_kind, params)
                write_boundary(sample, self.bundle / "tables" / "boundary.txt")
                if sample.ahlfors is not None:
                    self.constants["C_sigma"] = sample.ahlfors.c_sigma
                    self.summaries["ahlfors"] = sample.ahlfors.to_dict()
                self.stream.write(
                    f"Boundary {sample.kind}: {sample.count} atoms, d={sample.d}, n={sample.n}", "info"
                )
            self._sample = sample
        return self._sample

    @property
    def domain(self) -> DomainBox:
        if self._domain is None:
            sample = self.sample
            with self.stage("domain"):
                if self.config.domain_lower is None or self.config.domain_upper is None:
                    raise ConfigError("domain.lower and domain.upper are required", config_key="domain.lower")
                self._domain = DomainBox(
                    lower=np.asarray(self.config.domain_lower),
                    upper=np.asarray(self.config.domain_upper),
                    boundary=sample,
                    side=self.config.domain_side,
                )
        return self._domain

    @property
    def field(self) -> SmoothDistanceField:
        if self._field is None:
            domain = self.domain
            with self.stage("smooth_distance"):
                field_ = SmoothDistanceField(domain.boundary, beta=self.config.beta)
                probes = self._interior_probes(domain)
                if len(probes):
                    self.constants["C_beta"] = comparability_constant(field_, probes)
                self._field = field_
        return self._field

    @property
    def spec(self) -> OperatorSpec:
        if self._spec is None:
            sample = self.sample
            with self.stage("operator"):
                coefficients = make_coefficients(
                    sample.n,
                    self.config.profile,
                    **(
                        {}
                        if self.config.profile == "identity"
                        else {"axis": self.config.profile_axis, "offset": self.config.profile_offset}
                    ),
                )
                self._spec = OperatorSpec(self.config.beta, sample.d, sample.n, coefficients)
        return self._spec

    def _interior_probes(self, domain: DomainBox) -> np.ndarray:
        """Seeded subsample of lattice probes far enough from the sample to resolve"""
        lattice = domain.lattice(16)
        floor = 2 * PROBE_MIN_SPACINGS * domain.boundary.spacing
        keep = domain.contains(lattice) & (domain.delta(lattice) > floor)
        candidates = lattice[keep]
        if len(candidates) > MAX_PROBES:
            pick = np.sort(self.rng.choice(len(candidates), MAX_PROBES, replace=False))
            candidates = candidates[pick]
        return candidates

    def _pole(self) -> np.ndarray:
        if self.config.pole is not None:
            return np.asarray(self.config.pole, dtype=float)
        domain = self.domain
        return (domain.lower + domain.upper) / 2

    def _christ_forest(self, k_min: int, k_max: int) -> CubeForest:
        if self._forest is None or (self._forest.k_min, self._forest.k_max) != (k_min, k_max):
            self._forest = build_christ_cubes(self.sample, k_min, k_max)
            self.constants["a0"] = self._forest.a0
        return self._forest

    # Verbs

    def gen_boundary(self) -> None:
        """Boundary sample, its Ahlfors data and the domain's uniformity constants"""
        domain = self.domain
        with self.stage("uniformity"):
            sample = domain.boundary
            core = sample.core_indices
            count = min(UNIFORMITY_PROBES, len(core))
            atoms = np.sort(self.rng.choice(core, count, replace=False))
            r = float(np.min(domain.extent)) / 8
            probes = [(sample.points[i], r) for i in atoms]
            interior = self._interior_probes(domain)
            pairs = [(interior[i], interior[-1 - i]) for i in range(min(UNIFORMITY_PROBES, len(interior) // 2))]
            report = self._soft("uniformity", assess_uniformity, domain, probes, pairs)
            if report is not None:
                self.constants["epsilon_corkscrew"] = report.epsilon
                self.summaries["uniformity"] = report.to_dict()
        self.field  # noqa: B018

    def solve(self) -> list[Solution]:
        """Solve on every rung of the ladder, with gradient and Caccioppoli diagnostics"""
        if self._solutions is not None:
            return self._solutions
        domain, field_, spec = self.domain, self.field, self.spec
        solutions: list[Solution] = []
        gradient_sups: list[float | None] = []
        caccioppoli: list[float | None] = []

        for index, h in enumerate(self.config.h_ladder):
            with self.stage(f"solve[h={h:g}]"):
                start = time.perf_counter()
                template = GridField.template(domain, h)
                if self.config.mode == "green":
                    system = assemble(spec, template, field_)
                    u, report = green_function(
                        system,
                        self._pole(),
                        self.config.tolerance,
                        self.config.max_iterations,
                        outer_data=self._images_outer_data(template),
                    )
                else:
                    assert self.config.ball_center is not None and self.config.ball_radius is not None
                    u, report = solve_boundary_ball(
                        spec,
                        template,
                        field_,
                        np.asarray(self.config.ball_center),
                        self.config.ball_radius,
                        _unit_outer_data,
                        self.config.tolerance,
                        self.config.max_iterations,
                    )
                self.logger.log_solve(f"h={h:g}", report.to_dict(), time.perf_counter() - start)
                self.residuals.append({"h": h, **report.to_dict()})
                write_field(
                    u,
                    self.bundle / "fields" / f"u_{index}.urlf",
                    provenance={"config_hash": self.config_hash, "h": h, "solve": report.to_dict()},
                )
                if self.config.svg:
                    OutputHandler.render_slice(u, self.bundle / "plots" / f"u_{index}.svg", title=f"u, h={h:g}")
                solutions.append(Solution(index, h, u, report))

            with self.stage(f"diagnostics[h={h:g}]"):
                bound = self._soft("gradient bound", gradient_bound_check, u)
                gradient_sups.append(None if bound is None else bound.sup)
                if self.config.mode == "green":
                    whitney = build_whitney(domain, h)
                    check = self._soft("caccioppoli", caccioppoli_check, u, field_, spec, whitney)
                    caccioppoli.append(None if check is None else check.constant)
                    error = self._images_error(u)
                    if error is not None:
                        self.residuals[-1]["images_relative_l2"] = error

        self.constants["gradient_bound"] = gradient_sups
        if caccioppoli:
            self.constants["caccioppoli_C"] = caccioppoli
        self._write_solve_table(solutions)
        self._solutions = solutions
        return solutions

    def _images_offset(self) -> float | None:
        """Height of the half-space when the images formula is the exact Green function"""
        sample = self.sample
        spec = self.spec
        if sample.kind != "plane" or self.config.domain_side != "one_side":
            return None
        if spec.coefficients is not None and not spec.coefficients.is_identity():
            return None
        return float(sample.params.get("offset", 0.0))

    def _images_outer_data(self, template: GridField) -> np.ndarray | None:
        """Images formula on the lattice, zero at the pole node itself"""
        offset = self._images_offset()
        if offset is None:
            return None
        pole = template.node(template.nearest_index(self._pole()))
        nodes = template.nodes
        away = np.linalg.norm(nodes - pole, axis=1) > 0
        data = np.zeros(template.size)
        data[away] = images_green(pole, nodes[away], offset)
        return data.reshape(template.shape)

    def _images_error(self, u: GridField) -> float | None:
        """Relative L2 distance to the half-plane images formula, when that formula applies"""
        offset = self._images_offset()
        if offset is None or "pole" not in u.metadata:
            return None
        pole = np.asarray(u.metadata["pole"])
        h = u.h
        nodes = u.nodes
        keep = (
            u.interior.reshape(-1)
            & (u.delta.reshape(-1) >= 8 * h)
            & (np.linalg.norm(nodes - pole, axis=1) >= 8 * h)
        )
        if not np.any(keep):
            return None
        exact = images_green(pole, nodes[keep], offset)
        discrete = u.values.reshape(-1)[keep]
        return float(np.linalg.norm(discrete - exact) / np.linalg.norm(exact))

    def _write_solve_table(self, solutions: list[Solution]) -> None:
        rows = [
            (
                s.h,
                s.report.iterations,
                s.report.residual,
                s.report.weighted_residual,
                s.report.m_matrix,
                s.report.unknowns,
            )
            for s in solutions
        ]
        OutputHandler.write_csv(
            self.bundle / "tables" / "solve.csv",
            ["h", "iterations", "residual", "weighted_residual", "m_matrix", "unknowns"],
            rows,
        )

    def default_scales(self) -> list[float]:
        """Dyadic radii from 8 h_max up to min(diam/2, smallest box extent / 2)"""
        h_max = max(self.config.h_ladder)
        top = min(self.sample.diam / 2, float(np.min(self.domain.extent)) / 2)
        k_low = math.ceil(-math.log2(top) - 1e-12)
        k_high = math.floor(-math.log2(8 * h_max) + 1e-12)
        if k_low > k_high:
            raise ConfigError(
                "No dyadic scale fits between 8h and the box",
                config_key="functional.scales",
                suggestion="Set functional.scales or refine the ladder",
            )
        return [2.0**-k for k in range(k_low, k_high + 1)]

    def functional(self) -> dict[str, list[float]]:
        """Carleson tables for every tag on every rung, and their refinement trends"""
        if not self.config.tags:
            raise StageError("functional", ConfigError("No integrand tags configured", config_key="functional.tags"))
        solutions = self.solve()
        with self.stage("scales"):
            scales = self.config.scales or self.default_scales()
            generations = [round(-math.log2(r)) for r in scales]
            forest = self._christ_forest(min(generations), max(generations))

        sups: dict[str, list[float]] = {}
        rows: list[tuple] = []
        for tag in self.config.tags:
            sups[tag] = []
            for s in solutions:
                with self.stage(f"functional[{tag}, h={s.h:g}]"):
                    integrand = build_integrand(tag, s.u, self.field, self.spec)
                    report = carleson_norm(
                        integrand, scales, forest=forest, tag=tag, threads=self.config.threads
                    )
                    write_carleson_csv(report, self.bundle / "tables" / f"carleson_{tag}_{s.index}.csv")
                    if self.config.svg:
                        OutputHandler.render_slice(
                            integrand, self.bundle / "plots" / f"{tag}_{s.index}.svg", title=f"{tag}, h={s.h:g}"
                        )
                    sups[tag].append(report.sup)
                    rows.append((tag, s.h, report.sup, report.coverage))
                    self.stream.write(f"{tag} at h={s.h:g}: sup {report.sup:.4g}", "info")
            if len(solutions) >= 2:
                with self.stage(f"trend[{tag}]"):
                    trend = refinement_trend(sups[tag], self.config.h_ladder)
                    self.trends[tag] = trend.to_dict()
                    self.stream.write(f"{tag}: {trend.classification}", "info")

        OutputHandler.write_csv(
            self.bundle / "tables" / "functional_summary.csv", ["tag", "h", "sup", "coverage"], rows
        )
        self.summaries["functional"] = {"scales": scales, "sups": sups}
        return sups

    def bwgl(self) -> dict[str, Any]:
        """Beta numbers of the Christ forest and BWGL packing ratios by depth"""
        with self.stage("bwgl"):
            forest = self._christ_forest(self.config.k_min, self.config.k_max)
            export_forest(forest, self.bundle / "tables" / "forest.txt")
            report = bwgl_report(forest, self.config.epsilon, threads=self.config.threads)
            write_beta_csv(report, self.bundle / "tables" / "bwgl.csv")

            depth_rows = []
            for depth_k in range(forest.k_min, forest.k_max + 1):

                def bad(cube, depth_k=depth_k) -> bool:
                    value = report.values[cube.id]
                    return cube.k <= depth_k and value is not None and value > report.epsilon

                ratio = max((packing_sum(forest, bad, root) for root in forest.roots), default=0.0)
                depth_rows.append((depth_k - forest.k_min, depth_k, ratio))
            OutputHandler.write_csv(
                self.bundle / "tables" / "bwgl_depth.csv", ["depth", "k", "max_ratio"], depth_rows
            )
            self.constants["bwgl_epsilon"] = report.epsilon
            self.constants["bwgl_max_ratio"] = report.max_ratio
            summary = {
                "epsilon": report.epsilon,
                "max_ratio": report.max_ratio,
                "depth_ratios": [row[2] for row in depth_rows],
                "cubes": len(forest),
            }
            self.summaries["bwgl"] = summary
            self.stream.write(f"BWGL max packing ratio {report.max_ratio:.4g} at epsilon={report.epsilon:g}", "info")
        return summary

    def dichotomy(self) -> dict[str, Any]:
        """Carleson trends across the ladder next to the BWGL packing of the same boundary"""
        if len(self.config.h_ladder) < 2:
            raise StageError(
                "dichotomy",
                ConfigError("The dichotomy needs at least two ladder spacings", config_key="grid.h_ladder"),
            )
        sups = self.functional()
        packing = self.bwgl()
        classes = {tag: self.trends[tag]["classification"] for tag in sups}
        verdict = "bounded" if all(c == "bounded" for c in classes.values()) else "divergent"
        rows = [
            (tag, h, value, classes[tag])
            for tag, values in sups.items()
            for h, value in zip(self.config.h_ladder, values, strict=True)
        ]
        OutputHandler.write_csv(
            self.bundle / "tables" / "dichotomy.csv", ["tag", "h", "sup", "classification"], rows
        )
        summary = {"classifications": classes, "verdict": verdict, "bwgl_max_ratio": packing["max_ratio"]}
        self.summaries["dichotomy"] = summary
        self.stream.write(f"Dichotomy verdict: {verdict}", "info")
        return summary

    def report(self) -> Path:
        """Render the bundle's manifest in the configured format"""
        with self.stage("report"):
            try:
                manifest = self.storage.load_manifest(self.bundle)
            except FileNotFoundError as e:
                raise ConfigError(
                    f"No manifest in {self.bundle}",
                    config_key="output.dir",
                    suggestion="Run another verb with the same config first",
                ) from e
            fmt = self.config.output_format
            content = OutputHandler.format_output(manifest, fmt)
            suffix = {"json": "json", "yaml": "yaml", "markdown": "md"}[fmt]
            path = self.bundle / f"report.{suffix}"
            OutputHandler.write_output(content, path)
            if not self.config.quiet:
                OutputHandler.write_output(content)
        return path

    # Driver

    def manifest(self, verb: str, status: str, error: LabError | None = None) -> dict[str, Any]:
        """Provenance record merged into any manifest already in the bundle"""
        try:
            existing = self.storage.load_manifest(self.bundle)
        except FileNotFoundError:
            existing = {}
        files = sorted(
            str(p.relative_to(self.bundle))
            for p in self.bundle.rglob("*")
            if p.is_file() and p.parent.name != "logs" and p.name != "manifest.json"
        )
        manifest = {
            **existing,
            "config_hash": self.config_hash,
            "verb": verb,
            "verbs": sorted({*existing.get("verbs", []), verb}),
            "status": status,
            "versions": library_versions(),
            "config": self.config.to_dict(),
            "tolerances": {
                "solver": self.config.tolerance,
                "max_iterations": self.config.max_iterations,
                "trend": {
                    "bounded_factor": TREND_BOUNDED_FACTOR,
                    "relative_slope": TREND_RELATIVE_SLOPE,
                    "diverging_ratio": TREND_DIVERGING_RATIO,
                    "log_agreement": TREND_LOG_AGREEMENT,
                },
            },
            "constants": {**existing.get("constants", {}), **self.constants},
            "trends": {**existing.get("trends", {}), **self.trends},
            "summaries": {**existing.get("summaries", {}), **self.summaries},
            "files": files,
        }
        if self.residuals:
            manifest["residuals"] = self.residuals
        if error is not None:
            manifest["error"] = {k: v for k, v in error.to_dict().items() if k != "timestamp"}
        else:
            manifest.pop("error", None)
        return manifest

    def run(self, verb: str) -> Path:
        """
        Execute a verb and write the manifest

        Returns:
            Bundle directory

        Raises:
            StageError: Naming the stage that failed
        """
        if verb not in VERBS:
            raise ConfigError(f"Unknown verb: {verb}", config_key="verb")
        self.logger.log_run_start(verb, self.config.to_dict())
        start = time.perf_counter()
        actions = {
            "gen-boundary": self.gen_boundary,
            "solve": self.solve,
            "functional": self.functional,
            "bwgl": self.bwgl,
            "dichotomy": self.dichotomy,
            "report": self.report,
        }
        try:
            actions[verb]()
        except StageError as e:
            if verb != "report":
                self.storage.save_manifest(self.config_hash, self.manifest(verb, "failed", e))
            self.logger.log_run_complete(False, time.perf_counter() - start)
            self.logger.close()
            raise
        if verb != "report":
            self.storage.save_manifest(self.config_hash, self.manifest(verb, "completed"))
        self.logger.log_run_complete(True, time.perf_counter() - start)
        self.logger.close()
        return self.bundle


def run_experiment(config: ExperimentConfig, verb: str = "functional", **kwargs: Any) -> Path:
    """Run one verb for a validated config; returns the bundle directory"""
    return ExperimentExecutor(config, **kwargs).run(verb)
