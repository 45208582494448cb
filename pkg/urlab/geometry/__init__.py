"""
Boundary sets, their measures and distances, and uniformity diagnostics
"""

from .boundary import (
    BoundarySample,
    cantor_corners,
    dist_to_boundary,
    local_hausdorff,
    make_boundary,
    verify_ahlfors,
)
from .domain import (
    DomainBox,
    HarnackChain,
    assess_uniformity,
    find_corkscrew,
    harnack_chain,
)
from .oracles import AffineOracle, CircleOracle, DistanceOracle, FlatTail

__all__ = [
    "AffineOracle",
    "BoundarySample",
    "CircleOracle",
    "DistanceOracle",
    "DomainBox",
    "FlatTail",
    "HarnackChain",
    "assess_uniformity",
    "cantor_corners",
    "dist_to_boundary",
    "find_corkscrew",
    "harnack_chain",
    "local_hausdorff",
    "make_boundary",
    "verify_ahlfors",
]
