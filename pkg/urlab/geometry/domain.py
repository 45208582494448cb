"""
Domains and uniformity diagnostics

DomainBox couples a computational window with the side of the boundary
taken as the domain. Corkscrew points and Harnack chains are searched for
constructively, and their constants are measured rather than assumed.
"""

import logging
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np

from ..constants import (
    CORKSCREW_GRID_DIVISIONS,
    DOMAIN_SIDES,
    HARNACK_MAX_STEPS,
    HARNACK_STEP_FRACTION,
    SIDE_COMPLEMENT,
    SIDE_ONE_SIDE,
)
from ..exceptions import (
    ConnectivityError,
    DimensionError,
    ParameterError,
    SearchFailureError,
)
from ..models.reports import UniformityReport
from .boundary import BoundarySample, dist_to_boundary

logger = logging.getLogger(__name__)

# Strict inequality in the step condition survives rounding
STEP_SHRINK = 1.0 - 1e-12


@dataclass(frozen=True, eq=False)
class DomainBox:
    """Computational window [lower, upper] over one side of a boundary"""

    lower: np.ndarray
    upper: np.ndarray
    boundary: BoundarySample = field(repr=False)
    side: str = SIDE_COMPLEMENT

    def __post_init__(self) -> None:
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        n = self.boundary.n

        if lower.shape != (n,) or upper.shape != (n,):
            raise DimensionError(f"Box corners must be {n}-vectors", n=n)
        if np.any(lower >= upper):
            raise ParameterError("Box lower corner must be below upper corner")
        if self.side not in DOMAIN_SIDES:
            raise ParameterError(f"Unknown domain side: {self.side}", "side", self.side)
        if self.side == SIDE_ONE_SIDE:
            if self.boundary.d < n - 1:
                raise ParameterError(
                    "Domains over boundaries with d < n-1 are complements",
                    "side",
                    self.side,
                    suggestion="Use side=complement",
                )
            if self.boundary.height is None:
                raise ParameterError(
                    f"{self.boundary.kind} boundary is not a graph; one_side is undefined",
                    "side",
                    self.side,
                )

        probe = self.lattice(8)
        if not np.any(self.contains(probe) & (self.delta(probe) > 0)):
            raise ParameterError("Box does not meet the domain")

    @property
    def n(self) -> int:
        return self.boundary.n

    @property
    def extent(self) -> np.ndarray:
        return self.upper - self.lower

    def lattice(self, divisions: int) -> np.ndarray:
        """Cell centers of a divisions^n lattice over the box"""
        axes = [
            lo + (np.arange(divisions) + 0.5) * (hi - lo) / divisions
            for lo, hi in zip(self.lower, self.upper, strict=True)
        ]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([g.reshape(-1) for g in grids])

    def delta(self, X: np.ndarray) -> np.ndarray:
        """Distance to the boundary, vectorized over rows"""
        return np.atleast_1d(dist_to_boundary(self.boundary, np.atleast_2d(X)))

    def contains(self, X: np.ndarray) -> np.ndarray:
        """Membership in the domain (not restricted to the box)"""
        X = np.atleast_2d(X)
        if self.side == SIDE_ONE_SIDE:
            assert self.boundary.height is not None
            return X[:, -1] > self.boundary.height(X[:, :-1])
        return self.delta(X) > 0

    def in_box(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        return np.all((X >= self.lower) & (X <= self.upper), axis=1)

    def face_gap(self, X: np.ndarray) -> np.ndarray:
        """
        Distance to the nearest truncation face of the box, negative outside.

        For one_side domains the bottom face does not truncate where it
        lies on or below the boundary, and is skipped there.
        """
        X = np.atleast_2d(X)
        below = X - self.lower
        if self.side == SIDE_ONE_SIDE:
            assert self.boundary.height is not None
            under = self.lower[-1] <= self.boundary.height(X[:, :-1])
            below[:, -1] = np.where(under, np.inf, below[:, -1])
        return np.minimum(below.min(axis=1), (self.upper - X).min(axis=1))

    def nearest_boundary_point(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        if self.boundary.oracle is not None:
            return self.boundary.oracle.project(X)
        _, idx = self.boundary.nearest(X)
        return self.boundary.points[idx]


def find_corkscrew(domain: DomainBox, x: np.ndarray, r: float) -> tuple[np.ndarray, float]:
    """
    Grid-search B(x, r) for the point maximizing min(delta, r - |X - x|) / r.

    Ties go to the lexicographically smallest maximizer.
    """
    x = np.asarray(x, dtype=float)
    if r <= 0:
        raise ParameterError("Radius must be positive", "r", r)
    offset = float(domain.delta(x)[0])
    if offset > domain.boundary.spacing + 1e-12:
        raise ParameterError(
            "Corkscrew base point is not on the boundary",
            context={"distance": offset, "spacing": domain.boundary.spacing},
        )

    resolution = r / CORKSCREW_GRID_DIVISIONS
    axis = np.arange(-CORKSCREW_GRID_DIVISIONS, CORKSCREW_GRID_DIVISIONS + 1) * resolution
    grids = np.meshgrid(*([axis] * domain.n), indexing="ij")
    offsets = np.column_stack([g.reshape(-1) for g in grids])
    radial = np.linalg.norm(offsets, axis=1)
    candidates = x + offsets[radial < r]
    radial = radial[radial < r]

    inside = domain.contains(candidates)
    candidates, radial = candidates[inside], radial[inside]
    if candidates.shape[0] == 0:
        raise SearchFailureError(
            "No domain point found in the ball", resolution=resolution
        )

    scores = np.minimum(domain.delta(candidates), r - radial) / r
    best = float(scores.max())
    if best <= 0:
        raise SearchFailureError(
            "No interior point clears the boundary at search resolution",
            resolution=resolution,
        )
    ties = candidates[scores >= best - 1e-12]
    order = np.lexsort(ties.T[::-1])
    return ties[order[0]], best


@dataclass
class HarnackChain:
    """Points Z_0 = X, ..., Z_N = Y with |Z_i - Z_{i+1}| <= delta(Z_i)/2"""

    points: np.ndarray
    lambda_: float
    n_prime: int
    step_condition_ok: bool

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.points)


class _ChainBuilder:
    """Greedy chain construction with a shared step budget"""

    def __init__(self, domain: DomainBox, scale: float):
        self.domain = domain
        self.scale = scale
        self.steps = 0

    def _delta(self, P: np.ndarray) -> float:
        value = float(self.domain.delta(P)[0])
        if value <= 1e-12 * self.scale or not self.domain.contains(P)[0]:
            raise ConnectivityError(
                "Chain reached the boundary",
                context={"point": P.tolist(), "delta": value},
            )
        return value

    def _tick(self) -> None:
        self.steps += 1
        if self.steps > HARNACK_MAX_STEPS:
            raise ConnectivityError(
                "Harnack chain exceeded its step budget",
                context={"steps": self.steps, "scale": self.scale},
                suggestion="The domain may fail to be uniform at this scale",
            )

    def ascend(self, P: np.ndarray, target: float) -> list[np.ndarray]:
        """Move away from the nearest boundary point until delta >= target"""
        path = [P]
        while (delta := self._delta(P)) < target:
            self._tick()
            foot = self.domain.nearest_boundary_point(P)[0]
            away = P - foot
            norm = float(np.linalg.norm(away))
            if norm == 0:
                raise ConnectivityError("Ascent direction undefined", context={"point": P.tolist()})
            P = P + (HARNACK_STEP_FRACTION * delta * STEP_SHRINK) * away / norm
            path.append(P)
        return path

    def walk(self, A: np.ndarray, B: np.ndarray) -> list[np.ndarray]:
        """Straight walk from A to B; returns the points after A, ending at B"""
        path = []
        P = A
        while True:
            remaining = float(np.linalg.norm(B - P))
            if remaining == 0:
                return path
            self._tick()
            step = HARNACK_STEP_FRACTION * self._delta(P) * STEP_SHRINK
            if step >= remaining:
                path.append(B.copy())
                return path
            P = P + step * (B - P) / remaining
            path.append(P)


def harnack_chain(domain: DomainBox, X: np.ndarray, Y: np.ndarray) -> HarnackChain:
    """
    Connect X to Y by a Harnack chain.

    Both endpoints ascend until their depth reaches half of |X - Y|, the
    tops are joined by a straight walk, and the chain descends through the
    reversed ascent of Y.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if not (domain.contains(X)[0] and domain.contains(Y)[0]):
        raise ParameterError("Chain endpoints must lie in the domain")

    delta_x = float(domain.delta(X)[0])
    delta_y = float(domain.delta(Y)[0])
    floor = min(delta_x, delta_y)
    separation = float(np.linalg.norm(X - Y))
    if separation == 0:
        return HarnackChain(points=X[None, :].copy(), lambda_=0.0, n_prime=0, step_condition_ok=True)

    builder = _ChainBuilder(domain, separation)
    target = separation / 2
    up_x = builder.ascend(X, target)
    up_y = builder.ascend(Y, target)

    chain = list(up_x)
    chain.extend(builder.walk(up_x[-1], up_y[-1]))
    for upper, lower in zip(up_y[::-1][:-1], up_y[::-1][1:], strict=True):
        chain.extend(builder.walk(upper, lower))

    points = np.array(chain)
    depths = domain.delta(points)
    steps = np.linalg.norm(np.diff(points, axis=0), axis=1)
    step_ok = bool(np.all(steps <= HARNACK_STEP_FRACTION * depths[:-1]))
    n_prime = int(max(0, math.ceil(np.max(np.log2(floor / depths)) - 1e-12)))
    logger.debug("Harnack chain of %d points for Lambda=%.3g", len(points), separation / floor)
    return HarnackChain(
        points=points,
        lambda_=separation / floor,
        n_prime=n_prime,
        step_condition_ok=step_ok,
    )


def assess_uniformity(
    domain: DomainBox,
    probes: Sequence[tuple[np.ndarray, float]],
    pairs: Sequence[tuple[np.ndarray, np.ndarray]],
) -> UniformityReport:
    """
    Measure corkscrew and Harnack-chain constants.

    epsilon is the smallest achieved corkscrew constant; chain lengths are
    fitted by least squares to N = C ln(1 + Lambda).
    """
    if not probes:
        raise ParameterError("At least one corkscrew probe is required")

    epsilon = min(find_corkscrew(domain, x, r)[1] for x, r in probes)

    lengths: list[int] = []
    lambdas: list[float] = []
    n_prime = 0
    step_ok = True
    for X, Y in pairs:
        chain = harnack_chain(domain, X, Y)
        lengths.append(len(chain))
        lambdas.append(chain.lambda_)
        n_prime = max(n_prime, chain.n_prime)
        step_ok = step_ok and chain.step_condition_ok

    fit = (0.0, 1.0)
    logs = np.log1p(np.asarray(lambdas, dtype=float))
    counts = np.asarray(lengths, dtype=float)
    if logs.size and np.any(logs > 0):
        constant = float(np.dot(counts, logs) / np.dot(logs, logs))
        spread = float(np.sum((counts - counts.mean()) ** 2))
        residual = float(np.sum((counts - constant * logs) ** 2))
        fit = (constant, 1.0 - residual / spread if spread > 0 else 1.0)

    return UniformityReport(
        epsilon=float(epsilon),
        chain_length_fit=fit,
        samples_tested=len(probes) + len(pairs),
        n_prime=n_prime,
        chain_lengths=lengths,
        lambdas=lambdas,
        step_condition_ok=step_ok,
    )
