"""
Dyadic structures: Christ-David cubes on the boundary, Whitney cubes in the domain
"""

from .christ import Cube, CubeForest, build_christ_cubes, export_forest, packing_sum
from .whitney import WhitneyCover, WhitneyCube, build_whitney

__all__ = [
    "Cube",
    "CubeForest",
    "WhitneyCover",
    "WhitneyCube",
    "build_christ_cubes",
    "build_whitney",
    "export_forest",
    "packing_sum",
]
