"""Spatially-constrained object search: query decomposition, similarity-map
fusion, frontier exploration and a benchmark simulator.

Grids cross the boundary as numpy arrays of shape [height, width]; whole
documents (worlds, episodes, results, reports) as JSON strings matching the
CLI file formats.
"""

from ._divnav import (
    LoadError,
    QueryDecomposition,
    SpatialRelation,
    VocabularyError,
    aggregate,
    clopper_pearson,
    combine,
    decompose,
    intersect,
    make_decoy_world,
    plan_path,
    report_table,
    run_episode,
)

__all__ = [
    "LoadError",
    "QueryDecomposition",
    "SpatialRelation",
    "VocabularyError",
    "aggregate",
    "clopper_pearson",
    "combine",
    "decompose",
    "intersect",
    "make_decoy_world",
    "plan_path",
    "report_table",
    "run_episode",
]
