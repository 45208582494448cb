"""
Bilateral beta numbers and BWGL packing

bbeta_inf(Q) = l(Q)^-1 inf_P ( sup_{y in E ∩ 2B_Q} dist(y, P)
                              + sup_{z in P ∩ 2B_Q} dist(z, E) )

with 2B_Q = B(x_Q, 2 l(Q)). The infimum is approximated by a weighted
least-squares seed followed by a deterministic pattern search over plane
tilts and offsets, so reported values are upper bounds.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..constants import (
    BETA_ANGLE_STEP,
    BETA_LATTICE_DIVISIONS,
    BETA_OFFSET_STEP_FRACTION,
    BETA_SEARCH_ITERATIONS,
    CSV_FLOAT_FORMAT,
)
from ..dyadic.christ import Cube, CubeForest, packing_sum
from ..exceptions import DimensionError, FitError, ParameterError
from ..geometry.boundary import BoundarySample, dist_to_boundary
from ..models.reports import BetaReport

logger = logging.getLogger(__name__)

MIN_STEP = 1e-9


@dataclass
class BetaFit:
    """Achieved beta number with the plane realizing it"""

    value: float
    seed_value: float
    point: np.ndarray
    frame: np.ndarray
    iterations: int


def _complement(frame: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the frame rows"""
    n = frame.shape[1]
    _, _, vt = np.linalg.svd(np.vstack([frame, np.zeros((n - frame.shape[0], n))]))
    return vt[frame.shape[0]:]


def _disk_lattice(d: int, radius: float, pitch: float) -> np.ndarray:
    """Points of pitch-spaced Z^d inside the d-ball of the given radius"""
    m = int(np.floor(radius / pitch))
    axis = np.arange(-m, m + 1) * pitch
    grid = np.array(list(itertools.product(axis, repeat=d)), dtype=float)
    return grid[np.linalg.norm(grid, axis=1) <= radius]


class _BilateralObjective:
    """Normalized bilateral sup-sum for planes near one cube"""

    def __init__(self, sample: BoundarySample, center: np.ndarray, side: float, atoms: np.ndarray, d: int):
        self.sample = sample
        self.center = center
        self.side = side
        self.radius = 2.0 * side
        self.atoms = atoms
        self.d = d
        self.pitch = side / BETA_LATTICE_DIVISIONS

    def __call__(self, point: np.ndarray, frame: np.ndarray) -> float:
        normal = np.eye(self.sample.n) - frame.T @ frame
        one_sided = float(np.max(np.linalg.norm((self.atoms - point) @ normal, axis=1)))

        foot = point + (self.center - point) @ frame.T @ frame
        gap = float(np.linalg.norm(self.center - foot))
        other = 0.0
        if gap < self.radius:
            reach = float(np.sqrt(self.radius**2 - gap**2))
            lattice = _disk_lattice(self.d, reach, self.pitch)
            probes = foot + lattice @ frame
            other = float(np.max(np.atleast_1d(dist_to_boundary(self.sample, probes))))
        return (one_sided + other) / self.side


def _plane(seed_point: np.ndarray, seed_frame: np.ndarray, normals: np.ndarray, params: np.ndarray):
    d, c = seed_frame.shape[0], normals.shape[0]
    tilt = params[: d * c].reshape(d, c)
    offset = params[d * c:]
    q, _ = np.linalg.qr((seed_frame + tilt @ normals).T)
    return seed_point + offset @ normals, q.T[:d]


def fit_bbeta(sample: BoundarySample, center: np.ndarray, side: float) -> BetaFit:
    """Pattern-search upper bound for bbeta_inf over B(center, 2 side)"""
    if not float(sample.d).is_integer():
        raise DimensionError("Beta numbers need integer d", d=sample.d, n=sample.n)
    d = int(sample.d)
    if side <= 0:
        raise ParameterError("Cube side must be positive", "side", side)
    idx = sample.tree.query_ball_point(center, 2.0 * side)
    if len(idx) < d + 1:
        raise FitError(
            f"Only {len(idx)} atoms in 2B_Q",
            atoms=len(idx),
            required=d + 1,
            context={"center": np.asarray(center).tolist(), "side": side},
        )
    atoms = sample.points[idx]
    weights = sample.weights[idx]
    mean = weights @ atoms / weights.sum()
    _, _, vt = np.linalg.svd(np.sqrt(weights)[:, None] * (atoms - mean))
    seed_frame = vt[:d]
    normals = _complement(seed_frame)

    objective = _BilateralObjective(sample, np.asarray(center, dtype=float), side, atoms, d)
    params = np.zeros(d * normals.shape[0] + normals.shape[0])
    steps = np.concatenate(
        [
            np.full(d * normals.shape[0], BETA_ANGLE_STEP),
            np.full(normals.shape[0], BETA_OFFSET_STEP_FRACTION * side),
        ]
    )
    seed_value = best = objective(mean, seed_frame)

    iterations = 0
    while iterations < BETA_SEARCH_ITERATIONS and best > 0 and steps.max() > MIN_STEP * max(1.0, side):
        iterations += 1
        candidate, candidate_value = None, best
        for i in range(params.size):
            for sign in (1.0, -1.0):
                trial = params.copy()
                trial[i] += sign * steps[i]
                value = objective(*_plane(mean, seed_frame, normals, trial))
                if value < candidate_value:
                    candidate, candidate_value = trial, value
        if candidate is None:
            steps = steps / 2
        else:
            params, best = candidate, candidate_value

    point, frame = _plane(mean, seed_frame, normals, params)
    return BetaFit(value=best, seed_value=seed_value, point=point, frame=frame, iterations=iterations)


def bbeta_inf(sample: BoundarySample, cube: Cube) -> float:
    """Bilateral beta number of one Christ cube"""
    return fit_bbeta(sample, cube.center, cube.side).value


def bwgl_report(forest: CubeForest, epsilon: float, threads: int = 1) -> BetaReport:
    """
    Beta numbers of every cube and the packing ratio of bad cubes per root.

    Cubes whose fit fails are recorded as None and never counted as bad.
    """
    if epsilon <= 0:
        raise ParameterError("BWGL threshold must be positive", "epsilon", epsilon)
    sample = forest.sample

    def fit(cube: Cube) -> BetaFit | None:
        try:
            return fit_bbeta(sample, cube.center, cube.side)
        except FitError as exc:
            logger.warning("Cube %d skipped: %s", cube.id, exc.message)
            return None

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            fits = list(pool.map(fit, forest.cubes))
    else:
        fits = [fit(q) for q in forest.cubes]

    values = {q.id: (None if f is None else float(f.value)) for q, f in zip(forest.cubes, fits, strict=True)}
    seeds = {q.id: (None if f is None else float(f.seed_value)) for q, f in zip(forest.cubes, fits, strict=True)}
    planes = {
        q.id: {"point": f.point.tolist(), "frame": f.frame.tolist()}
        for q, f in zip(forest.cubes, fits, strict=True)
        if f is not None
    }

    def is_bad(cube: Cube) -> bool:
        value = values[cube.id]
        return value is not None and value > epsilon

    ratios = {root.id: packing_sum(forest, is_bad, root) for root in forest.roots}
    report = BetaReport(
        epsilon=float(epsilon),
        values=values,
        seed_values=seeds,
        generations={q.id: q.k for q in forest.cubes},
        planes=planes,
        ratios=ratios,
        max_ratio=max(ratios.values(), default=0.0),
    )
    logger.info(
        "BWGL at epsilon=%g: %d of %d cubes bad, max packing ratio %.4g",
        epsilon,
        sum(1 for q in forest.cubes if is_bad(q)),
        len(forest),
        report.max_ratio,
    )
    return report


def write_beta_csv(report: BetaReport, path: str | Path) -> Path:
    """Rows `cube_id,k,bbeta,is_bad` followed by one `root` row per root cube"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("cube_id,k,bbeta,is_bad\n")
        for cube_id, k, value, bad in report.rows():
            text = "nan" if value is None else CSV_FLOAT_FORMAT % value
            handle.write(f"{cube_id},{k},{text},{int(bad)}\n")
        for root_id, ratio in sorted(report.ratios.items()):
            handle.write(f"root,{root_id},{CSV_FLOAT_FORMAT % ratio},\n")
    return path
