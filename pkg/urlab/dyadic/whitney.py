"""
Whitney decomposition of a domain window

Lattice cubes aligned to the box lower corner are split top-down until
ratio * l(W) <= dist(W, boundary), with ratio 20 for Whitney cubes proper.
Cubes that would need to be smaller than
h_min are left uncovered and reported.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from ..constants import WHITNEY_LOWER
from ..exceptions import ParameterError
from ..geometry.domain import DomainBox

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WhitneyCube:
    """Lattice cube [corner, corner + side]^n"""

    corner: np.ndarray
    side: float
    distance: float

    @property
    def center(self) -> np.ndarray:
        return self.corner + self.side / 2

    @property
    def upper(self) -> np.ndarray:
        return self.corner + self.side

    @property
    def dilate_radius(self) -> float:
        """Radius of W* = 2 B_W"""
        return self.side * math.sqrt(self.corner.shape[0])


@dataclass
class WhitneyCover:
    """Accepted Whitney cubes with coverage statistics"""

    domain: DomainBox = field(repr=False)
    h_min: float
    top_side: float
    corners: np.ndarray = field(repr=False)
    levels: np.ndarray = field(repr=False)
    distances: np.ndarray = field(repr=False)
    unresolved_volume: float = 0.0
    ratio: float = WHITNEY_LOWER

    @property
    def sides(self) -> np.ndarray:
        return self.top_side * 2.0 ** -self.levels.astype(float)

    @property
    def centers(self) -> np.ndarray:
        return self.corners + self.sides[:, None] / 2

    @property
    def upper_violations(self) -> int:
        """Cubes with dist(W) >= 2 ratio l(W), from coarse tiles or lattice effects"""
        return int(np.sum(self.distances >= 2 * self.ratio * self.sides))

    def __len__(self) -> int:
        return int(self.levels.size)

    def __iter__(self):
        for corner, side, dist in zip(self.corners, self.sides, self.distances, strict=True):
            yield WhitneyCube(corner=corner, side=float(side), distance=float(dist))

    def filtered(self, min_side: float) -> "WhitneyCover":
        """The cover that build_whitney would return with h_min = min_side"""
        keep = self.sides >= min_side * (1 - 1e-12)
        dropped = self.sides[~keep]
        return WhitneyCover(
            domain=self.domain,
            h_min=min_side,
            top_side=self.top_side,
            corners=self.corners[keep],
            levels=self.levels[keep],
            distances=self.distances[keep],
            unresolved_volume=self.unresolved_volume
            + float(np.sum(dropped**self.domain.n)),
            ratio=self.ratio,
        )

    @cached_property
    def _index(self) -> dict[tuple[int, ...], int]:
        cells = np.floor((self.corners - self.domain.lower) / self.sides[:, None] + 0.5).astype(int)
        return {
            (int(level), *map(int, cell)): i
            for i, (level, cell) in enumerate(zip(self.levels, cells, strict=True))
        }

    def locate(self, X: np.ndarray) -> np.ndarray:
        """Index of the cube containing each row of X, -1 where uncovered"""
        X = np.atleast_2d(X)
        found = np.full(X.shape[0], -1, dtype=int)
        for level in np.unique(self.levels):
            side = self.top_side * 2.0 ** -float(level)
            cells = np.floor((X - self.domain.lower) / side).astype(int)
            for row in np.flatnonzero(found < 0):
                found[row] = self._index.get((int(level), *map(int, cells[row])), -1)
        return found

    def overlap_multiplicity(self) -> int:
        """Largest number of dilates W* containing a single cube center"""
        if len(self) == 0:
            return 0
        centers = self.centers
        counts = np.zeros(len(self), dtype=int)
        for level in np.unique(self.levels):
            group = centers[self.levels == level]
            radius = self.top_side * 2.0 ** -float(level) * math.sqrt(self.domain.n)
            counts += np.asarray(
                cKDTree(group).query_ball_point(centers, radius, return_length=True)
            )
        return int(counts.max())

    def uncovered_fraction(self, floor: float, divisions: int = 256) -> float:
        """Fraction of {X in box and domain : delta(X) > floor} outside every cube"""
        points = self.domain.lattice(divisions)
        target = self.domain.contains(points) & (self.domain.delta(points) > floor)
        if not np.any(target):
            return 0.0
        covered = self.locate(points[target]) >= 0
        return 1.0 - float(np.mean(covered))


def _cube_distances(domain: DomainBox, lower: np.ndarray, side: float, ratio: float) -> np.ndarray:
    """dist(W, boundary) per cube; beyond 2 ratio l(W) only a lower bound is kept"""
    upper = lower + side
    sample = domain.boundary
    if sample.oracle is not None:
        exact = sample.oracle.box_distance(lower, upper)
        if exact is not None:
            return np.asarray(exact, dtype=float)

    half_diagonal = side * math.sqrt(domain.n) / 2
    center_dist, _ = sample.tree.query(lower + side / 2)
    result = np.maximum(0.0, center_dist - half_diagonal)
    ambiguous = np.flatnonzero(result < 2 * ratio * side)
    if ambiguous.size:
        nearby = sample.tree.query_ball_point(
            lower[ambiguous] + side / 2, center_dist[ambiguous] + half_diagonal + 1e-12
        )
        for slot, idx in zip(ambiguous, nearby, strict=True):
            atoms = sample.points[idx]
            gaps = np.maximum(0.0, np.maximum(lower[slot] - atoms, atoms - upper[slot]))
            result[slot] = float(np.min(np.linalg.norm(gaps, axis=1)))
    return result


def build_whitney(domain: DomainBox, h_min: float, ratio: float = WHITNEY_LOWER) -> WhitneyCover:
    """
    Top-down Whitney cover of the box portion of the domain.

    ratio = 20 gives Whitney cubes; smaller ratios give graded cells that
    reach within about ratio * h_min of the boundary.
    """
    if ratio <= 0:
        raise ParameterError("Separation ratio must be positive", "ratio", ratio)
    if h_min <= 0:
        raise ParameterError("h_min must be positive", "h_min", h_min)

    top = float(np.min(domain.extent))
    tiles = np.ceil(domain.extent / top - 1e-12).astype(int)
    grids = np.meshgrid(*[np.arange(t) for t in tiles], indexing="ij")
    lower = domain.lower + top * np.column_stack([g.reshape(-1) for g in grids])
    offsets = np.array(np.meshgrid(*([[0, 1]] * domain.n), indexing="ij")).reshape(domain.n, -1).T

    corners, levels, distances = [], [], []
    unresolved = 0.0
    level, side = 0, top
    while lower.shape[0]:
        dist = _cube_distances(domain, lower, side, ratio)
        centers = lower + side / 2
        in_domain = domain.contains(centers)
        in_box = domain.in_box(centers)

        accept = (dist >= ratio * side) & in_domain & in_box
        # Cubes clear of the boundary lie on one side entirely
        meets_box = np.all(lower < domain.upper, axis=1)
        refine = (dist < ratio * side) & ~((dist > 0) & ~in_domain) & meets_box
        can_split = side / 2 >= h_min * (1 - 1e-12)

        corners.append(lower[accept])
        levels.append(np.full(int(accept.sum()), level))
        distances.append(dist[accept])
        if not can_split:
            unresolved += float(np.sum(refine & in_box)) * side**domain.n
            break
        parents = lower[refine]
        lower = (parents[:, None, :] + offsets[None, :, :] * side / 2).reshape(-1, domain.n)
        level, side = level + 1, side / 2

    cover = WhitneyCover(
        domain=domain,
        h_min=h_min,
        top_side=top,
        corners=np.concatenate(corners) if corners else np.zeros((0, domain.n)),
        levels=np.concatenate(levels).astype(int),
        distances=np.concatenate(distances),
        unresolved_volume=unresolved,
        ratio=float(ratio),
    )
    if cover.upper_violations:
        logger.debug("%d cubes exceed the %g l(W) bound", cover.upper_violations, 2 * ratio)
    logger.debug("Whitney cover: %d cubes down to side %.3g", len(cover), side)
    return cover
