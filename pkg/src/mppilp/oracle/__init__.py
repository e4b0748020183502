"""Independent ground truth: move enumeration, exact search and the constructive puzzle solver."""

from .moves import (
    enumerate_cycles,
    enumerate_joint_moves,
    full_occupancy_moves,
    joint_move_count,
    rotation,
)
from .puzzle import PuzzleError, solve_puzzle_constructive
from .search import (
    DEFAULT_NODE_CAP,
    SOLVED,
    UNKNOWN,
    UNSOLVABLE,
    SearchResult,
    bfs_min_makespan,
    exhaustive_optimal,
)

__all__ = [
    "DEFAULT_NODE_CAP", "SOLVED", "UNKNOWN", "UNSOLVABLE", "PuzzleError", "SearchResult",
    "bfs_min_makespan", "enumerate_cycles", "enumerate_joint_moves", "exhaustive_optimal",
    "full_occupancy_moves", "joint_move_count", "rotation", "solve_puzzle_constructive",
]
