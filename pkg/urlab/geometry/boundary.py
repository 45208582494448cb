"""
Boundary samples

A BoundarySample represents the pair (boundary, surface measure) by
quadrature atoms: points with positive weights approximating d-dimensional
Hausdorff measure. Generated kinds also carry an exact distance oracle
where one is available.
"""

import dataclasses
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np
from scipy.spatial import cKDTree

from ..constants import (
    AHLFORS_MAX_RADIUS_FRACTION,
    AHLFORS_MAX_SLOPE,
    AHLFORS_MIN_RADIUS_SPACINGS,
    AHLFORS_RATIO_CEILING,
    AHLFORS_RATIO_FLOOR,
    BOUNDARY_KINDS,
)
from ..exceptions import DimensionError, ParameterError
from ..models.reports import AhlforsReport
from .oracles import AffineOracle, CircleOracle, DistanceOracle, FlatTail

logger = logging.getLogger(__name__)

HeightFunction = Callable[[np.ndarray], np.ndarray]

DEFAULT_AHLFORS_TRIALS = 64


@dataclass(frozen=True, eq=False)
class BoundarySample:
    """Quadrature representation of a d-Ahlfors-regular boundary in R^n"""

    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    d: float
    n: int
    kind: str
    spacing: float
    diam: float
    oracle: DistanceOracle | None = field(default=None, repr=False)
    core_mask: np.ndarray | None = field(default=None, repr=False)
    tail: FlatTail | None = field(default=None, repr=False)
    height: HeightFunction | None = field(default=None, repr=False)
    params: dict[str, Any] = field(default_factory=dict)
    ahlfors: AhlforsReport | None = None

    def __post_init__(self) -> None:
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

        if self.n < 2:
            raise DimensionError("Ambient dimension must be at least 2", d=self.d, n=self.n)
        if not 0 < self.d < self.n:
            raise DimensionError(
                f"Boundary dimension d={self.d} must lie in (0, n) for n={self.n}",
                d=self.d,
                n=self.n,
            )
        if points.shape[1] != self.n:
            raise DimensionError(
                f"Points have {points.shape[1]} coordinates, expected {self.n}", n=self.n
            )
        if weights.shape[0] != points.shape[0]:
            raise ParameterError("One weight per point is required")
        if not np.all(weights > 0):
            raise ParameterError("All weights must be positive")
        if points.shape[0] > 1:
            gaps, _ = self.tree.query(points, k=2)
            if np.any(gaps[:, 1] <= 0):
                raise ParameterError("Boundary points must be pairwise distinct")

    @cached_property
    def tree(self) -> cKDTree:
        return cKDTree(self.points)

    @property
    def count(self) -> int:
        return int(self.points.shape[0])

    @property
    def total_mass(self) -> float:
        return math.fsum(self.weights)

    @property
    def core_indices(self) -> np.ndarray:
        """Atoms far enough from sample edges to serve as ball centers"""
        if self.core_mask is None:
            return np.arange(self.count)
        return np.flatnonzero(self.core_mask)

    def dilate(self, factor: float) -> "BoundarySample":
        """Scale the set by factor; weights scale like factor**d"""
        if factor <= 0:
            raise ParameterError("Dilation factor must be positive", "factor", factor)
        identity = np.eye(self.n)
        origin = np.zeros(self.n)
        height = self.height
        return dataclasses.replace(
            self,
            points=factor * self.points,
            weights=self.weights * factor**self.d,
            spacing=factor * self.spacing,
            diam=factor * self.diam,
            oracle=self.oracle.transformed(identity, origin, factor) if self.oracle else None,
            tail=self.tail.transformed(identity, origin, factor) if self.tail else None,
            height=(lambda x: factor * height(np.asarray(x) / factor)) if height else None,
            ahlfors=None,
        )

    def transform(self, rotation: np.ndarray, shift: np.ndarray) -> "BoundarySample":
        """Apply the rigid motion X -> rotation @ X + shift"""
        rotation = np.asarray(rotation, dtype=float)
        shift = np.asarray(shift, dtype=float)
        if rotation.shape != (self.n, self.n) or not np.allclose(
            rotation @ rotation.T, np.eye(self.n), atol=1e-10
        ):
            raise ParameterError("Rotation must be an orthogonal n x n matrix")
        height = self.height if np.allclose(rotation, np.eye(self.n)) else None
        if height is not None:
            base = self.height
            height = lambda x: base(np.asarray(x) - shift[:-1]) + shift[-1]  # noqa: E731
        return dataclasses.replace(
            self,
            points=self.points @ rotation.T + shift,
            oracle=self.oracle.transformed(rotation, shift, 1.0) if self.oracle else None,
            tail=self.tail.transformed(rotation, shift, 1.0) if self.tail else None,
            height=height,
            ahlfors=None,
        )

    def nearest(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Distance to and index of the nearest atom"""
        dist, idx = self.tree.query(np.atleast_2d(X))
        return np.asarray(dist, dtype=float), np.asarray(idx, dtype=int)


def _require_positive(params: dict[str, Any], key: str, default: float) -> float:
    value = float(params.get(key, default))
    if not value > 0:
        raise ParameterError(f"{key} must be positive", key, value)
    return value


def _flat_sample(kind: str, params: dict[str, Any]) -> BoundarySample:
    d = int(params.get("d", 1))
    n = int(params.get("n", d + 1 if kind == "plane" else d + 2))
    if not 0 < d < n:
        raise DimensionError(f"{kind} needs 0 < d < n", d=d, n=n)
    if kind == "plane" and d != n - 1:
        raise DimensionError("plane needs d = n - 1; use low_dim_plane", d=d, n=n)
    if kind == "low_dim_plane" and d >= n - 1:
        raise DimensionError("low_dim_plane needs d < n - 1", d=d, n=n)

    extent = _require_positive(params, "extent", 8.0 if d == 1 else 4.0)
    spacing = _require_positive(params, "spacing", 0.01 if d == 1 else 0.05)
    offset = float(params.get("offset", 0.0))
    steps = int(round(extent / spacing))
    if not math.isclose(steps * spacing, extent, rel_tol=1e-9):
        raise ParameterError("extent must be a multiple of spacing", "extent", extent)

    axis = np.arange(-steps, steps + 1) * spacing
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    points = np.zeros((axis.size**d, n))
    for j, grid in enumerate(grids):
        points[:, j] = grid.reshape(-1)
    points[:, d] = offset
    weights = np.full(points.shape[0], spacing**d)

    origin = np.zeros(n)
    origin[d] = offset
    oracle = AffineOracle(origin=origin, frame=np.eye(n)[:d]) if params.get("exact", True) else None

    tail = None
    if d == 1:
        tail = FlatTail(
            origin=origin,
            direction=np.eye(n)[0],
            start=-extent - spacing / 2,
            stop=extent + spacing / 2,
        )

    reach = extent * (1.0 - 2.0 * AHLFORS_MAX_RADIUS_FRACTION * math.sqrt(d))
    core = np.all(np.abs(points[:, :d]) <= max(reach, spacing), axis=1)
    height = (lambda x: np.full(np.asarray(x).shape[0], offset)) if kind == "plane" else None

    return BoundarySample(
        points=points,
        weights=weights,
        d=d,
        n=n,
        kind=kind,
        spacing=spacing,
        diam=2.0 * extent * math.sqrt(d),
        oracle=oracle,
        core_mask=core,
        tail=tail,
        height=height,
        params={"d": d, "n": n, "extent": extent, "spacing": spacing, "offset": offset},
    )


def _lipschitz_graph(params: dict[str, Any]) -> BoundarySample:
    if int(params.get("n", 2)) != 2:
        raise DimensionError("lipschitz_graph is generated in the plane only", n=params.get("n"))
    slope = float(params.get("M", 0.3))
    if slope < 0:
        raise ParameterError("Lipschitz constant M must be nonnegative", "M", slope)
    omega = _require_positive(params, "omega", math.pi)
    extent = _require_positive(params, "extent", 8.0)
    spacing = _require_positive(params, "spacing", 0.01)

    def height(x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)[:, 0] if np.ndim(x) > 1 else np.asarray(x, dtype=float)
        return (slope / omega) * np.sin(omega * x)

    steps = int(round(extent / spacing))
    xs = np.arange(-steps, steps + 1) * spacing
    points = np.column_stack([xs, height(xs)])
    weights = spacing * np.sqrt(1.0 + (slope * np.cos(omega * xs)) ** 2)
    reach = extent * (1.0 - 2.0 * AHLFORS_MAX_RADIUS_FRACTION)

    return BoundarySample(
        points=points,
        weights=weights,
        d=1,
        n=2,
        kind="lipschitz_graph",
        spacing=spacing * math.sqrt(1.0 + slope**2),
        diam=2.0 * extent,
        core_mask=np.abs(xs) <= reach,
        height=height,
        params={"M": slope, "omega": omega, "extent": extent, "spacing": spacing},
    )


def _circle(params: dict[str, Any]) -> BoundarySample:
    radius = _require_positive(params, "R", 1.0)
    count = int(params.get("count", 628))
    n = int(params.get("n", 2))
    if count < 3:
        raise ParameterError("circle needs at least 3 points", "count", count)
    if n < 2:
        raise DimensionError("circle needs n >= 2", d=1, n=n)
    center = np.zeros(n)
    center[: min(n, len(params.get("center", [])))] = params.get("center", [])[:n]

    theta = 2.0 * math.pi * np.arange(count) / count
    points = np.zeros((count, n))
    points[:, 0] = radius * np.cos(theta)
    points[:, 1] = radius * np.sin(theta)
    points += center
    spacing = 2.0 * math.pi * radius / count

    return BoundarySample(
        points=points,
        weights=np.full(count, spacing),
        d=1,
        n=n,
        kind="circle",
        spacing=spacing,
        diam=2.0 * radius,
        oracle=CircleOracle(center=center, radius=radius),
        params={"R": radius, "count": count, "n": n, "center": center.tolist()},
    )


def cantor_corners(generation: int) -> np.ndarray:
    """Lower-left corners of the generation-g four-corner Cantor squares in [0,1]^2"""
    corners = np.zeros((1, 2))
    for j in range(1, generation + 1):
        digits = np.array([[0, 0], [3, 0], [0, 3], [3, 3]], dtype=float) * 4.0**-j
        corners = (corners[:, None, :] + digits[None, :, :]).reshape(-1, 2)
    return corners


def _four_corner_cantor(params: dict[str, Any]) -> BoundarySample:
    generation = int(params.get("generation", 5))
    if generation < 1:
        raise ParameterError("generation must be at least 1", "generation", generation)
    side = 4.0**-generation
    points = cantor_corners(generation) + side / 2
    return BoundarySample(
        points=points,
        weights=np.full(points.shape[0], side),
        d=1,
        n=2,
        kind="four_corner_cantor",
        spacing=side,
        diam=math.sqrt(2.0) * (1.0 - side),
        params={"generation": generation},
    )


def _custom(params: dict[str, Any]) -> BoundarySample:
    if "points" not in params:
        raise ParameterError("custom boundary needs points", "points")
    points = np.atleast_2d(np.asarray(params["points"], dtype=float))
    count, n = points.shape
    weights = np.asarray(params.get("weights", np.ones(count)), dtype=float)
    d = float(params.get("d", 1))
    if count > 1:
        gaps, _ = cKDTree(points).query(points, k=2)
        default_spacing = float(np.median(gaps[:, 1]))
        diam = float(np.max(np.linalg.norm(points - points.mean(axis=0), axis=1))) * 2.0
    else:
        default_spacing, diam = 0.0, 0.0
    return BoundarySample(
        points=points,
        weights=weights,
        d=int(d) if float(d).is_integer() else d,
        n=n,
        kind="custom",
        spacing=float(params.get("spacing", default_spacing)),
        diam=float(params.get("diam", diam)),
        oracle=params.get("oracle"),
        height=params.get("height"),
        params={"d": d, "count": count},
    )


_GENERATORS: dict[str, Callable[[dict[str, Any]], BoundarySample]] = {
    "plane": lambda p: _flat_sample("plane", p),
    "low_dim_plane": lambda p: _flat_sample("low_dim_plane", p),
    "lipschitz_graph": _lipschitz_graph,
    "circle": _circle,
    "four_corner_cantor": _four_corner_cantor,
    "custom": _custom,
}


def make_boundary(kind: str, params: dict[str, Any] | None = None) -> BoundarySample:
    """
    Generate a boundary sample of the given kind.

    Generated kinds get their empirical Ahlfors constant recorded; custom
    samples are taken as given.
    """
    if kind not in BOUNDARY_KINDS:
        raise ParameterError(
            f"Unknown boundary kind: {kind}",
            "kind",
            kind,
            suggestion=f"Choose one of: {', '.join(BOUNDARY_KINDS)}",
        )
    params = dict(params or {})
    sample = _GENERATORS[kind](params)
    if kind != "custom":
        trials = int(params.get("ahlfors_trials", DEFAULT_AHLFORS_TRIALS))
        sample = dataclasses.replace(sample, ahlfors=verify_ahlfors(sample, trials))
    logger.debug(
        "Generated %s boundary: %d atoms, d=%s, n=%d, spacing=%.3g",
        kind,
        sample.count,
        sample.d,
        sample.n,
        sample.spacing,
    )
    return sample


def verify_ahlfors(sample: BoundarySample, trials: int, seed: int = 0) -> AhlforsReport:
    """
    Sample sigma(B(x,r))/r^d at random core atoms and log-uniform radii.

    Ratios outside [1e-3, 1e3], or a log-log slope steeper than 0.25, set
    the regularity-failure flag.
    """
    if trials < 1:
        raise ParameterError("trials must be at least 1", "trials", trials)
    r_min = AHLFORS_MIN_RADIUS_SPACINGS * sample.spacing
    r_max = AHLFORS_MAX_RADIUS_FRACTION * sample.diam
    if not 0 < r_min < r_max:
        raise ParameterError(
            "Sample has no valid Ahlfors scale window",
            context={"r_min": r_min, "r_max": r_max},
            suggestion="Use a finer spacing or a larger sample",
        )

    rng = np.random.default_rng(seed)
    core = sample.core_indices
    centers = sample.points[core[rng.integers(0, core.size, size=trials)]]
    radii = np.exp(rng.uniform(math.log(r_min), math.log(r_max), size=trials))

    members = sample.tree.query_ball_point(centers, radii)
    masses = np.array([math.fsum(sample.weights[idx]) for idx in members])
    ratios = masses / radii**sample.d

    if trials > 1 and np.ptp(np.log(radii)) > 0:
        slope = float(np.polyfit(np.log(radii), np.log(ratios), 1)[0])
    else:
        slope = 0.0
    ratio_min = float(ratios.min())
    ratio_max = float(ratios.max())
    failure = (
        ratio_min < AHLFORS_RATIO_FLOOR
        or ratio_max > AHLFORS_RATIO_CEILING
        or abs(slope) > AHLFORS_MAX_SLOPE
    )
    if failure:
        logger.warning(
            "Regularity failure on %s sample: ratios [%.3g, %.3g], slope %.3f",
            sample.kind,
            ratio_min,
            ratio_max,
            slope,
        )
    return AhlforsReport(
        ratio_min=ratio_min,
        ratio_max=ratio_max,
        c_sigma=max(ratio_max, 1.0 / ratio_min),
        slope=slope,
        trials=trials,
        r_min=r_min,
        r_max=r_max,
        regularity_failure=failure,
    )


def dist_to_boundary(sample: BoundarySample, X: np.ndarray) -> np.ndarray | float:
    """Exact distance via the oracle when present, else nearest-atom distance"""
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    if sample.oracle is not None:
        dist = sample.oracle.distance(np.atleast_2d(X))
    else:
        dist, _ = sample.nearest(X)
    return float(dist[0]) if single else dist


def local_hausdorff(
    E: BoundarySample, F: BoundarySample, x: np.ndarray, r: float
) -> float:
    """
    Normalized local Hausdorff distance d_{x,r}(E, F).

    An empty intersection with B(x, r) contributes 0 to its supremum.
    """
    if r <= 0:
        raise ParameterError("Radius must be positive", "r", r)
    x = np.asarray(x, dtype=float)

    def one_sided(A: BoundarySample, B: BoundarySample) -> float:
        inside = A.tree.query_ball_point(x, r)
        if not inside:
            return 0.0
        return float(np.max(dist_to_boundary(B, A.points[inside])))

    return (one_sided(E, F) + one_sided(F, E)) / r
