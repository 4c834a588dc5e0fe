"""Exact construction and measurement of integer points and lines on x1 = x2^2 + x3^2 - x4^2."""

from .analysis import RunStats, compute_stats, incidences_fast, incidences_oracle
from .construction import ConstructionParams, Profile, count_points, enumerate_lines
from .lineset import LineSet

__all__ = [
    "ConstructionParams",
    "LineSet",
    "Profile",
    "RunStats",
    "compute_stats",
    "count_points",
    "enumerate_lines",
    "incidences_fast",
    "incidences_oracle",
]
