"""
Lattice fields over a domain box

Nodes sit at lower + i h. Each node is EXTERIOR (outside the domain),
DIRICHLET (on the outer box face, or within h_bc of the boundary) or
INTERIOR.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import IntEnum
from functools import cached_property
from typing import Any

import numpy as np

from ..exceptions import ParameterError
from ..geometry.domain import DomainBox

logger = logging.getLogger(__name__)


class NodeKind(IntEnum):
    """Role of a lattice node in the discrete problem"""

    EXTERIOR = 0
    DIRICHLET = 1
    INTERIOR = 2


RANKS = ("scalar", "vector", "matrix")


@dataclass(eq=False)
class GridField:
    """Values on the lattice of a DomainBox with spacing h"""

    domain: DomainBox = field(repr=False)
    h: float
    values: np.ndarray = field(repr=False)
    mask: np.ndarray = field(repr=False)
    delta: np.ndarray = field(repr=False)
    h_bc: float
    rank: str = "scalar"
    valid: np.ndarray | None = field(default=None, repr=False)
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.rank not in RANKS:
            raise ParameterError(f"Unknown field rank: {self.rank}", "rank", self.rank)
        trailing = {"scalar": (), "vector": (self.n,), "matrix": (self.n, self.n)}[self.rank]
        if self.values.shape != self.shape + trailing:
            raise ParameterError(
                "Field values do not match the lattice",
                context={"values": self.values.shape, "lattice": self.shape},
            )

    @classmethod
    def template(
        cls, domain: DomainBox, h: float, h_bc: float | None = None
    ) -> "GridField":
        """Zero scalar field with node roles computed from the domain"""
        if h <= 0:
            raise ParameterError("Grid spacing must be positive", "h", h)
        counts = np.rint(domain.extent / h).astype(int)
        if np.any(np.abs(counts * h - domain.extent) > 1e-9 * domain.extent) or np.any(counts < 2):
            raise ParameterError(
                "Box extents must be multiples of h (at least two cells)",
                "h",
                h,
                context={"extent": domain.extent.tolist()},
            )
        h_bc = h if h_bc is None else float(h_bc)
        shape = tuple(int(c) + 1 for c in counts)
        axes = [lo + h * np.arange(size) for lo, size in zip(domain.lower, shape, strict=True)]
        grids = np.meshgrid(*axes, indexing="ij")
        nodes = np.column_stack([g.reshape(-1) for g in grids])

        delta = domain.delta(nodes).reshape(shape)
        inside = domain.contains(nodes).reshape(shape)
        face = np.zeros(shape, dtype=bool)
        for axis in range(domain.n):
            index = [slice(None)] * domain.n
            index[axis] = 0
            face[tuple(index)] = True
            index[axis] = -1
            face[tuple(index)] = True

        mask = np.full(shape, NodeKind.INTERIOR, dtype=np.int8)
        band = delta < h_bc
        mask[face | band] = NodeKind.DIRICHLET
        mask[~inside & ~band] = NodeKind.EXTERIOR
        logger.debug(
            "Grid %s: %d interior, %d Dirichlet, %d exterior nodes",
            shape,
            int(np.sum(mask == NodeKind.INTERIOR)),
            int(np.sum(mask == NodeKind.DIRICHLET)),
            int(np.sum(mask == NodeKind.EXTERIOR)),
        )
        return cls(
            domain=domain,
            h=float(h),
            values=np.zeros(shape),
            mask=mask,
            delta=delta,
            h_bc=h_bc,
        )

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.mask.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @cached_property
    def nodes(self) -> np.ndarray:
        """Node coordinates, shape (size, n) in row-major order"""
        axes = [lo + self.h * np.arange(s) for lo, s in zip(self.domain.lower, self.shape, strict=True)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([g.reshape(-1) for g in grids])

    def coordinates(self) -> np.ndarray:
        """Node coordinates shaped like the lattice plus a trailing axis"""
        return self.nodes.reshape(*self.shape, self.n)

    @property
    def interior(self) -> np.ndarray:
        return self.mask == NodeKind.INTERIOR

    @property
    def dirichlet(self) -> np.ndarray:
        return self.mask == NodeKind.DIRICHLET

    @property
    def defined(self) -> np.ndarray:
        """Nodes where values are meaningful"""
        if self.valid is not None:
            return self.valid
        return self.mask != NodeKind.EXTERIOR

    def nearest_index(self, X: np.ndarray) -> tuple[int, ...]:
        X = np.asarray(X, dtype=float)
        index = np.rint((X - self.domain.lower) / self.h).astype(int)
        if np.any(index < 0) or np.any(index >= np.array(self.shape)):
            raise ParameterError("Point lies outside the grid", context={"point": X.tolist()})
        return tuple(int(i) for i in index)

    def node(self, index: tuple[int, ...]) -> np.ndarray:
        return self.domain.lower + self.h * np.asarray(index, dtype=float)

    def value_at(self, X: np.ndarray) -> Any:
        """Value at the node nearest to X"""
        return self.values[self.nearest_index(X)]

    def with_values(
        self,
        values: np.ndarray,
        rank: str = "scalar",
        valid: np.ndarray | None = None,
        **metadata: Any,
    ) -> "GridField":
        return replace(
            self,
            values=values,
            rank=rank,
            valid=valid,
            metadata={**self.metadata, **metadata},
        )

    def sample_function(self, func) -> np.ndarray:
        """Evaluate func on every node, returned in lattice shape"""
        return np.asarray(func(self.nodes), dtype=float).reshape(self.shape)
