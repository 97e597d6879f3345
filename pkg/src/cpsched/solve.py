"""Top-level solve function."""

from __future__ import annotations

import time

from .engine import SearchParams, Status
from .formulation import FORMULATIONS
from .model import ProblemData
from .solution import Result


def solve(
    data: ProblemData,
    time_limit: float = 10.0,
    seed: int = 0,
    formulation: str = "standard",
    node_limit: int | None = None,
) -> Result:
    """
    Build the engine model for ``data`` and run branch-and-bound on it.

    Raises ``ValueError`` for invalid instances and formulations that cannot
    encode the instance.
    """
    if time_limit <= 0:
        raise ValueError("time_limit must be positive")
    try:
        build = FORMULATIONS[formulation]
    except KeyError:
        raise ValueError(f"unknown formulation {formulation!r}; choose from {sorted(FORMULATIONS)}") from None

    started = time.perf_counter()
    em = build(data)
    outcome = em.search(SearchParams(time_limit=time_limit, node_limit=node_limit, seed=seed))
    best = em.decode(outcome.values) if outcome.values is not None else None
    stats = outcome.stats
    return Result(
        status=outcome.status,
        best=best,
        objective=outcome.objective,
        lower_bound=outcome.lower_bound,
        runtime=time.perf_counter() - started,
        statistics={
            "nodes": stats.nodes,
            "fails": stats.fails,
            "propagations": stats.propagations,
            "solutions": stats.solutions,
            "max_depth": stats.max_depth,
            "incumbents": [list(item) for item in stats.incumbents],
            "formulation": formulation,
        },
    )


__all__ = ["solve", "Status"]
