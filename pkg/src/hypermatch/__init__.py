"""Batch-dynamic maximal matching on hypergraphs with random greedy settling."""

from .core import (
    AlreadyPresent,
    BatchKind,
    DuplicateInBatch,
    EdgeId,
    GraphStats,
    Hyperedge,
    NotPresent,
    RankExceeded,
    UpdateBatch,
    VertexId,
    validate_batch,
)
from .dynamic import DynamicMatching
from .leveled import LeveledStructure
from .parprims import PriorityAssignment, SeededRng, draw_priorities
from .setcover import DynamicSetCover, SetCoverInstance
from .static_mm import MatchResult, parallel_greedy_match, sequential_greedy_match

__all__ = [
    "AlreadyPresent",
    "BatchKind",
    "DuplicateInBatch",
    "DynamicMatching",
    "DynamicSetCover",
    "EdgeId",
    "GraphStats",
    "Hyperedge",
    "LeveledStructure",
    "MatchResult",
    "NotPresent",
    "PriorityAssignment",
    "RankExceeded",
    "SeededRng",
    "SetCoverInstance",
    "UpdateBatch",
    "VertexId",
    "draw_priorities",
    "parallel_greedy_match",
    "sequential_greedy_match",
    "validate_batch",
]
