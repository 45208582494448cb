"""
Christ-David dyadic cubes on boundary samples

Generation-k cubes are built by farthest-point sampling of centers with
separation 2^-k / 2, each child generation drawn inside its parent's
members, and atoms assigned to the nearest center. Membership is therefore
nested and disjoint within a generation by construction.
"""

import logging
import math
from collections.abc import Callable, Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from ..constants import CHRIST_CENTER_SEPARATION, CHRIST_MIN_SPACINGS, CSV_FLOAT_FORMAT
from ..exceptions import ParameterError, ResolutionError
from ..geometry.boundary import BoundarySample

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class Cube:
    """Pseudo-cube Q of generation k, side length 2^-k"""

    id: int
    k: int
    center: np.ndarray
    center_index: int
    members: np.ndarray = field(repr=False)
    sigma_mass: float
    parent: int | None = None
    children: list[int] = field(default_factory=list)

    @property
    def side(self) -> float:
        return 2.0**-self.k

    def __len__(self) -> int:
        return int(self.members.size)


@dataclass
class CubeForest:
    """All cubes of generations k_min..k_max over one sample"""

    sample: BoundarySample = field(repr=False)
    k_min: int
    k_max: int
    cubes: list[Cube] = field(default_factory=list, repr=False)
    a0: float = 0.0

    def cube(self, cube_id: int) -> Cube:
        return self.cubes[cube_id]

    def generation(self, k: int) -> list[Cube]:
        return [q for q in self.cubes if q.k == k]

    @property
    def roots(self) -> list[Cube]:
        return self.generation(self.k_min)

    def descendants(self, root: Cube) -> Iterator[Cube]:
        """Breadth-first walk over root and every cube below it"""
        frontier = [root]
        while frontier:
            yield from frontier
            frontier = [self.cubes[c] for q in frontier for c in q.children]

    def __len__(self) -> int:
        return len(self.cubes)


def _farthest_point_centers(
    points: np.ndarray, start: int, separation: float
) -> list[int]:
    """Greedy centers, pairwise >= separation apart, covering points within separation"""
    chosen = [start]
    gap = np.linalg.norm(points - points[start], axis=1)
    while True:
        j = int(np.argmax(gap))
        if gap[j] < separation:
            return chosen
        chosen.append(j)
        gap = np.minimum(gap, np.linalg.norm(points - points[j], axis=1))


def _split(
    sample: BoundarySample, indices: np.ndarray, start: int, k: int
) -> list[tuple[int, np.ndarray]]:
    """Partition atom indices into generation-k cells as (center atom, members)"""
    local = sample.points[indices]
    first = int(np.flatnonzero(indices == start)[0])
    separation = CHRIST_CENTER_SEPARATION * 2.0**-k
    chosen = _farthest_point_centers(local, first, separation)
    if len(chosen) == 1:
        return [(start, indices)]
    _, owner = cKDTree(local[chosen]).query(local)
    return [(int(indices[c]), indices[owner == slot]) for slot, c in enumerate(chosen)]


def _inner_ratio(sample: BoundarySample, cube: Cube) -> float:
    """Distance from x_Q to the nearest non-member atom, in units of 2^-k"""
    if cube.members.size >= sample.count:
        return 1.0
    dist, idx = sample.tree.query(cube.center, k=cube.members.size + 1)
    members = set(cube.members.tolist())
    for distance, j in zip(np.atleast_1d(dist), np.atleast_1d(idx), strict=True):
        if int(j) not in members:
            return min(1.0, float(distance) / cube.side)
    return 1.0


def build_christ_cubes(sample: BoundarySample, k_min: int, k_max: int) -> CubeForest:
    """
    Build the cube forest for generations k_min..k_max.

    The achieved inner-ball constant a0 is recorded on the forest.
    """
    if k_min > k_max:
        raise ParameterError("k_min must not exceed k_max", context={"k_min": k_min, "k_max": k_max})
    finest = 2.0**-k_max
    if finest < CHRIST_MIN_SPACINGS * sample.spacing:
        raise ResolutionError(
            f"Generation {k_max} is finer than the sample resolves",
            context={"side": finest, "spacing": sample.spacing},
            suggestion=f"Use k_max <= {math.floor(-math.log2(CHRIST_MIN_SPACINGS * sample.spacing))}",
        )
    if 2.0**-k_min < sample.diam / 2:
        logger.warning(
            "Top generation %d is finer than diam/2 = %.3g; roots do not cover a single cube",
            k_min,
            sample.diam / 2,
        )

    forest = CubeForest(sample=sample, k_min=k_min, k_max=k_max)

    def add(k: int, center_index: int, members: np.ndarray, parent: int | None) -> Cube:
        cube = Cube(
            id=len(forest.cubes),
            k=k,
            center=sample.points[center_index].copy(),
            center_index=center_index,
            members=np.sort(members),
            sigma_mass=math.fsum(sample.weights[members]),
            parent=parent,
        )
        forest.cubes.append(cube)
        if parent is not None:
            forest.cubes[parent].children.append(cube.id)
        return cube

    everything = np.arange(sample.count)
    level = [add(k_min, c, m, None) for c, m in _split(sample, everything, 0, k_min)]
    for k in range(k_min + 1, k_max + 1):
        level = [
            add(k, c, m, parent.id)
            for parent in level
            for c, m in _split(sample, parent.members, parent.center_index, k)
        ]

    forest.a0 = min(_inner_ratio(sample, q) for q in forest.cubes)
    logger.debug(
        "Built %d cubes over generations %d..%d (a0 = %.3f)",
        len(forest),
        k_min,
        k_max,
        forest.a0,
    )
    return forest


def packing_sum(
    forest: CubeForest,
    predicate: Callable[[Cube], bool],
    root: Cube,
    threads: int = 1,
) -> float:
    """
    Carleson-packing ratio sum_{Q in root, predicate(Q)} sigma(Q) / sigma(root).

    Masses are summed per generation from member atoms so that the
    all-true predicate returns exactly depth + 1.
    """
    cubes = list(forest.descendants(root))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            flags = list(pool.map(predicate, cubes))
    else:
        flags = [predicate(q) for q in cubes]

    weights = forest.sample.weights
    root_mass = math.fsum(weights[root.members])
    if root_mass == 0:
        return 0.0
    by_generation: dict[int, list[np.ndarray]] = {}
    for cube, flag in zip(cubes, flags, strict=True):
        if flag:
            by_generation.setdefault(cube.k, []).append(weights[cube.members])
    return math.fsum(
        math.fsum(np.concatenate(parts)) / root_mass for _, parts in sorted(by_generation.items())
    )


def export_forest(forest: CubeForest, path: str | Path) -> Path:
    """Write one row `id k x_Q... sigma_mass parent_id` per cube"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for cube in forest.cubes:
            coords = " ".join(CSV_FLOAT_FORMAT % x for x in cube.center)
            parent = -1 if cube.parent is None else cube.parent
            handle.write(
                f"{cube.id} {cube.k} {coords} {CSV_FLOAT_FORMAT % cube.sigma_mass} {parent}\n"
            )
    return path
