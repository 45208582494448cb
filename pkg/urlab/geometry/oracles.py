"""
Exact distance oracles for generated boundary sets

An oracle answers distance, nearest-point and box-distance queries for the
continuum set a BoundarySample discretizes. Samples without an oracle fall
back to nearest-atom queries.
"""

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from ..exceptions import ParameterError


class DistanceOracle(Protocol):
    """Exact distance/projection queries for a continuum boundary"""

    def distance(self, points: np.ndarray) -> np.ndarray: ...

    def project(self, points: np.ndarray) -> np.ndarray: ...

    def box_distance(
        self, lower: np.ndarray, upper: np.ndarray
    ) -> np.ndarray | None: ...

    def transformed(
        self, rotation: np.ndarray, shift: np.ndarray, scale: float
    ) -> "DistanceOracle": ...


def _interval_gap(value: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Distance from value to the interval [lower, upper], elementwise"""
    return np.maximum(0.0, np.maximum(lower - value, value - upper))


@dataclass(frozen=True)
class AffineOracle:
    """Affine d-plane through origin spanned by the rows of frame"""

    origin: np.ndarray
    frame: np.ndarray

    @property
    def normal_projector(self) -> np.ndarray:
        n = self.origin.shape[0]
        return np.eye(n) - self.frame.T @ self.frame

    def distance(self, points: np.ndarray) -> np.ndarray:
        rel = np.atleast_2d(points) - self.origin
        return np.linalg.norm(rel @ self.normal_projector, axis=1)

    def project(self, points: np.ndarray) -> np.ndarray:
        rel = np.atleast_2d(points) - self.origin
        return self.origin + (rel @ self.frame.T) @ self.frame

    def free_axes(self) -> list[int] | None:
        """Coordinate axes spanned by the frame, or None for a tilted plane"""
        axes = []
        for row in self.frame:
            hits = np.flatnonzero(np.abs(row) > 1e-12)
            if hits.size != 1 or abs(abs(row[hits[0]]) - 1.0) > 1e-12:
                return None
            axes.append(int(hits[0]))
        return axes

    def box_distance(self, lower: np.ndarray, upper: np.ndarray) -> np.ndarray | None:
        axes = self.free_axes()
        if axes is None:
            return None
        lower = np.atleast_2d(lower)
        upper = np.atleast_2d(upper)
        fixed = [j for j in range(self.origin.shape[0]) if j not in axes]
        if not fixed:
            return np.zeros(lower.shape[0])
        gaps = _interval_gap(self.origin[fixed], lower[:, fixed], upper[:, fixed])
        return np.linalg.norm(gaps, axis=1)

    def transformed(
        self, rotation: np.ndarray, shift: np.ndarray, scale: float
    ) -> "AffineOracle":
        return AffineOracle(
            origin=scale * (rotation @ self.origin) + shift,
            frame=self.frame @ rotation.T,
        )


@dataclass(frozen=True)
class CircleOracle:
    """Circle of given radius in the plane of the first two coordinates"""

    center: np.ndarray
    radius: float

    def _split(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        rel = np.atleast_2d(points) - self.center
        return rel[:, :2], rel[:, 2:]

    def distance(self, points: np.ndarray) -> np.ndarray:
        planar, rest = self._split(points)
        rho = np.linalg.norm(planar, axis=1)
        return np.sqrt((rho - self.radius) ** 2 + np.sum(rest**2, axis=1))

    def project(self, points: np.ndarray) -> np.ndarray:
        planar, rest = self._split(points)
        rho = np.linalg.norm(planar, axis=1)
        direction = np.zeros_like(planar)
        direction[:, 0] = 1.0
        nonzero = rho > 0
        direction[nonzero] = planar[nonzero] / rho[nonzero, None]
        foot = np.zeros((planar.shape[0], self.center.shape[0]))
        foot[:, :2] = self.radius * direction
        return foot + self.center

    def box_distance(self, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
        lower = np.atleast_2d(lower) - self.center
        upper = np.atleast_2d(upper) - self.center
        near = np.linalg.norm(_interval_gap(0.0, lower[:, :2], upper[:, :2]), axis=1)
        far = np.linalg.norm(
            np.maximum(np.abs(lower[:, :2]), np.abs(upper[:, :2])), axis=1
        )
        planar = np.where(
            (near <= self.radius) & (self.radius <= far),
            0.0,
            np.minimum(np.abs(near - self.radius), np.abs(far - self.radius)),
        )
        rest = np.linalg.norm(_interval_gap(0.0, lower[:, 2:], upper[:, 2:]), axis=1)
        return np.sqrt(planar**2 + rest**2)

    def transformed(
        self, rotation: np.ndarray, shift: np.ndarray, scale: float
    ) -> "CircleOracle":
        if self.center.shape[0] > 2 and not (
            np.allclose(rotation[:2, 2:], 0.0) and np.allclose(rotation[2:, :2], 0.0)
        ):
            raise ParameterError(
                "Circle oracle only follows motions preserving its plane"
            )
        return CircleOracle(
            center=scale * (rotation @ self.center) + shift, radius=scale * self.radius
        )


@dataclass(frozen=True)
class FlatTail:
    """
    Analytic continuation of a sampled line beyond its represented segment.

    The line is origin + s * direction; atoms represent s in [start, stop]
    with unit density, and the tail covers s outside that interval.
    """

    origin: np.ndarray
    direction: np.ndarray
    start: float
    stop: float

    def transformed(
        self, rotation: np.ndarray, shift: np.ndarray, scale: float
    ) -> "FlatTail":
        return FlatTail(
            origin=scale * (rotation @ self.origin) + shift,
            direction=rotation @ self.direction,
            start=scale * self.start,
            stop=scale * self.stop,
        )
