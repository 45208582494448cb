"""
Carleson-measure functionals over dyadic boundary balls

For a nonnegative integrand f the per-ball value is

    r^-d * integral over B(x, r) ∩ Omega of f^2 delta^(d-n) dX

with balls centered at Christ-cube centers and radii equal to the cube
scales. Lattice fields are integrated by the midpoint rule over their
valid nodes; callables are integrated over graded cubes with
dist(W) >= 2 l(W) built down to the cutoff.
"""

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from ..constants import (
    BALL_FACE_MARGIN,
    BALL_SAMPLE_CHUNK,
    BALL_SAMPLE_DIVISIONS,
    CENTER_COVERAGE_TARGET,
    CSV_FLOAT_FORMAT,
    DERIVATIVE_MASK_SPACINGS,
    QUADRATURE_WHITNEY_RATIO,
    TREND_BOUNDED_FACTOR,
    TREND_DIVERGING_RATIO,
    TREND_LOG_AGREEMENT,
    TREND_RELATIVE_SLOPE,
)
from ..dyadic.christ import CubeForest, build_christ_cubes
from ..dyadic.whitney import WhitneyCover, build_whitney
from ..elliptic.grid import GridField
from ..exceptions import ParameterError
from ..geometry.domain import DomainBox
from ..models.reports import BallValue, CarlesonReport, TrendSummary

logger = logging.getLogger(__name__)

Integrand = GridField | Callable[[np.ndarray], np.ndarray]


def dyadic_generation(r: float) -> int:
    """k with r = 2^-k; ParameterError for non-dyadic radii"""
    k = -math.log2(r)
    if abs(k - round(k)) > 1e-9:
        raise ParameterError("Carleson scales must be dyadic radii 2^-k", "scale", r)
    return int(round(k))


@lru_cache(maxsize=4)
def _ball_offsets(n: int) -> np.ndarray:
    """Lattice points of the closed unit ball, axis extremes included"""
    axis = np.linspace(-1.0, 1.0, 2 * BALL_SAMPLE_DIVISIONS + 1)
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    offsets = np.column_stack([g.reshape(-1) for g in grids])
    return offsets[np.linalg.norm(offsets, axis=1) <= 1.0 + 1e-12]


def _leaves_box(domain: DomainBox, x: np.ndarray, r: float) -> np.ndarray:
    """
    Whether B(x, r) ∩ Omega comes within BALL_FACE_MARGIN * r of a
    truncation face of the box, per row of x.

    The ball is sampled on a lattice of its points. The margin is a fixed
    fraction of r, so the same balls are present on every rung of a ladder.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    offsets = _ball_offsets(domain.n) * r
    margin = BALL_FACE_MARGIN * r
    flagged = np.zeros(x.shape[0], dtype=bool)
    chunk = max(1, BALL_SAMPLE_CHUNK // len(offsets))
    for start in range(0, x.shape[0], chunk):
        block = x[start : start + chunk]
        points = (block[:, None, :] + offsets[None]).reshape(-1, domain.n)
        close = domain.face_gap(points) < margin
        if np.any(close):
            close[close] = domain.contains(points[close])
        flagged[start : start + chunk] = close.reshape(block.shape[0], -1).any(axis=1)
    return flagged


class _Quadrature:
    """Cell centers, their densities f^2 delta^(d-n) |cell| and a search tree"""

    def __init__(self, points: np.ndarray, density: np.ndarray):
        self.points = points
        self.density = density
        self.tree = cKDTree(points) if len(points) else None

    def ball(self, x: np.ndarray, r: float) -> tuple[float, int]:
        if self.tree is None:
            return 0.0, 0
        idx = self.tree.query_ball_point(x, r)
        if not idx:
            return 0.0, 0
        return math.fsum(self.density[idx]), len(idx)


def _grid_quadrature(f: GridField, d: float) -> _Quadrature:
    if f.rank != "scalar":
        raise ParameterError("Carleson integrands are scalar fields", "rank", f.rank)
    keep = f.defined & (f.delta > 0) & np.isfinite(f.values)
    if np.any(f.values[keep] < 0):
        raise ParameterError("Carleson integrands must be nonnegative")
    values = f.values[keep]
    delta = f.delta[keep]
    density = values**2 * delta ** (d - f.n) * f.h**f.n
    return _Quadrature(f.nodes[keep.reshape(-1)], density)


def _probe_quadrature(
    f: Callable[[np.ndarray], np.ndarray], domain: DomainBox, cover: WhitneyCover, d: float
) -> _Quadrature:
    centers = cover.centers
    if len(centers) == 0:
        return _Quadrature(np.empty((0, domain.n)), np.empty(0))
    values = np.asarray(f(centers), dtype=float)
    if np.any(values < 0):
        raise ParameterError("Carleson integrands must be nonnegative")
    delta = domain.delta(centers)
    density = values**2 * delta ** (d - domain.n) * cover.sides**domain.n
    return _Quadrature(centers, density)


def carleson_norm(
    f: Integrand,
    scales: Sequence[float],
    domain: DomainBox | None = None,
    centers: np.ndarray | None = None,
    forest: CubeForest | None = None,
    cutoff: float | None = None,
    whitney: WhitneyCover | None = None,
    tag: str = "custom",
    threads: int = 1,
) -> CarlesonReport:
    """
    Per-ball Carleson values and their supremum.

    Args:
        f: Lattice field, or a callable evaluated at Whitney-cube centers
        scales: Dyadic radii r = 2^-k
        domain: Required for callables; defaults to the field's domain
        centers: Explicit ball centers used at every scale
        forest: Christ cubes supplying centers (built when omitted)
        cutoff: Inner cutoff; 2h for lattice fields, the Whitney floor otherwise
        whitney: Cells for the callable path (graded cubes down to the cutoff when omitted)
        tag: Integrand tag recorded on the report
        threads: Worker threads for the per-ball sums

    Returns:
        CarlesonReport with one row per (center, scale)
    """
    if isinstance(f, GridField):
        domain = f.domain
        h = f.h
        cutoff = f.metadata.get("cutoff", DERIVATIVE_MASK_SPACINGS * h) if cutoff is None else cutoff
    else:
        if domain is None:
            raise ParameterError("Callable integrands need a domain")
        if cutoff is None:
            raise ParameterError("Callable integrands need a cutoff", "cutoff", cutoff)
        h = float(cutoff)
    assert domain is not None
    sample = domain.boundary
    d, n = sample.d, sample.n

    scales = sorted({float(r) for r in scales}, reverse=True)
    if not scales:
        raise ParameterError("At least one scale is required", "scales", scales)
    generations = [dyadic_generation(r) for r in scales]
    for r in scales:
        if r < 8 * h:
            raise ParameterError(f"Scale {r:g} is below 8h = {8 * h:g}", "scale", r)
        if r > sample.diam / 2 * (1 + 1e-12):
            raise ParameterError(f"Scale {r:g} exceeds diam/2 = {sample.diam / 2:g}", "scale", r)

    if isinstance(f, GridField):
        quadrature = _grid_quadrature(f, d)
    else:
        cover = whitney if whitney is not None else build_whitney(domain, h, QUADRATURE_WHITNEY_RATIO)
        quadrature = _probe_quadrature(f, domain, cover, d)

    if centers is None and forest is None:
        forest = build_christ_cubes(sample, min(generations), max(generations))

    jobs: list[tuple[np.ndarray, float]] = []
    for r, k in zip(scales, generations, strict=True):
        if centers is not None:
            jobs.extend((np.asarray(c, dtype=float), r) for c in np.atleast_2d(centers))
        else:
            assert forest is not None
            jobs.extend((q.center, r) for q in forest.generation(k))

    def evaluate(job: tuple[np.ndarray, float]) -> BallValue:
        x, r = job
        if _leaves_box(domain, x, r)[0]:
            return BallValue(center=x.tolist(), r=r, value=None, cells_used=0, reason="ball leaves the box")
        total, cells = quadrature.ball(x, r)
        if cells == 0:
            return BallValue(center=x.tolist(), r=r, value=None, cells_used=0, reason="empty mask")
        return BallValue(center=x.tolist(), r=r, value=total / r**d, cells_used=cells)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            balls = list(pool.map(evaluate, jobs))
    else:
        balls = [evaluate(job) for job in jobs]

    present = [b for b in balls if b.present]
    if present:
        best = max(present, key=lambda b: (b.value, [-c for c in b.center], -b.r))
        sup = float(best.value)
    else:
        best, sup = None, 0.0

    coverage = _coverage(forest, balls, scales[0], generations[0], domain) if centers is None else 1.0
    if coverage < CENTER_COVERAGE_TARGET:
        logger.warning(
            "Ball centers cover only %.1f%% of eligible atoms at scale %g",
            100 * coverage,
            scales[0],
        )
    report = CarlesonReport(
        tag=tag,
        h=h,
        cutoff=float(cutoff),
        d=d,
        n=n,
        scales=scales,
        balls=balls,
        sup=sup,
        argmax=best,
        coverage=coverage,
    )
    logger.info(
        "Carleson %s: %d balls (%d present), sup %.6g",
        tag,
        len(balls),
        len(present),
        sup,
    )
    return report


def _coverage(
    forest: CubeForest | None,
    balls: list[BallValue],
    r: float,
    k: int,
    domain: DomainBox,
) -> float:
    """Fraction of eligible atoms whose coarsest-scale cube produced a value"""
    if forest is None:
        return 1.0
    sample = forest.sample
    present = {tuple(b.center) for b in balls if b.present and b.r == r}
    eligible = ~_leaves_box(domain, sample.points, r)
    if not np.any(eligible):
        return 0.0
    covered = np.zeros(sample.count, dtype=bool)
    for cube in forest.generation(k):
        if tuple(cube.center.tolist()) in present:
            covered[cube.members] = True
    return float(np.sum(covered & eligible)) / float(np.sum(eligible))


def refinement_trend(sups: Sequence[float], hs: Sequence[float]) -> TrendSummary:
    """
    Classify a supremum across a refinement ladder.

    bounded: max/min <= 1.5 and relative slope < 0.02
    diverging: every consecutive ratio >= 1.3
    log_divergent: all differences positive and within 20% of each other
    Otherwise diverging when the relative slope reaches 0.02.
    """
    if len(sups) != len(hs) or len(hs) < 2:
        raise ParameterError("A trend needs at least two (h, sup) pairs")
    order = np.argsort(-np.asarray(hs, dtype=float), kind="stable")
    h = np.asarray(hs, dtype=float)[order]
    s = np.asarray(sups, dtype=float)[order]
    if np.any(h <= 0):
        raise ParameterError("Cutoffs must be positive")

    slope = float(np.polyfit(np.log(1.0 / h), s, 1)[0])
    top = float(np.max(np.abs(s)))
    relative = slope / top if top > 0 else 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(s[:-1] > 0, s[1:] / s[:-1], np.inf)
    differences = np.diff(s)

    if top == 0:
        label = "bounded"
    elif s.min() > 0 and s.max() / s.min() <= TREND_BOUNDED_FACTOR and relative < TREND_RELATIVE_SLOPE:
        label = "bounded"
    elif np.all(ratios >= TREND_DIVERGING_RATIO):
        label = "diverging"
    elif np.all(differences > 0) and np.ptp(differences) <= TREND_LOG_AGREEMENT * differences.max():
        label = "log_divergent"
    elif relative >= TREND_RELATIVE_SLOPE:
        label = "diverging"
    else:
        label = "bounded"

    logger.debug("Trend over %d cutoffs: slope %.4g (relative %.4g) -> %s", len(h), slope, relative, label)
    return TrendSummary(
        hs=h.tolist(),
        sups=s.tolist(),
        slope=slope,
        relative_slope=relative,
        ratios=[float(x) for x in ratios],
        differences=differences.tolist(),
        classification=label,
    )


def write_carleson_csv(report: CarlesonReport, path: str | Path) -> Path:
    """Rows `center..., r, value, cells_used`; absent balls write nan"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = [f"x{i}" for i in range(report.n)] + ["r", "value", "cells_used"]
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(",".join(header) + "\n")
        for ball in report.balls:
            value = "nan" if ball.value is None else CSV_FLOAT_FORMAT % ball.value
            fields = [CSV_FLOAT_FORMAT % c for c in ball.center]
            fields += [CSV_FLOAT_FORMAT % ball.r, value, str(ball.cells_used)]
            handle.write(",".join(fields) + "\n")
    return path
