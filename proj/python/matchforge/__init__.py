"""Optimal and greedy bipartite matching for matched-sample studies."""

from ._core import (
    Infeasible,
    InvalidInput,
    LimitExceeded,
    match_graph,
    match_units,
    oracle,
)

__all__ = [
    "Infeasible",
    "InvalidInput",
    "LimitExceeded",
    "match_graph",
    "match_units",
    "oracle",
]
