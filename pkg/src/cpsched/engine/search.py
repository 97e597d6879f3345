"""
Depth-first branch-and-bound over a :class:`~cpsched.engine.store.Store`.

Branching order: the first unfixed boolean among the branching booleans
(value 1 first), then the present interval with the smallest unfixed start
(``start = lb`` first, ``start >= lb + 1`` second, ties to the earliest
listed interval), then the first unfixed sequencing boolean (value 1 first),
then any remaining auxiliary variable at its lower bound. Every incumbent tightens an :class:`ObjectiveBound`, so a
failure at the root after an incumbent proves it optimal.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .propagators import ObjectiveBound
from .store import Inconsistent, IntervalVar, Store


class Status(str, Enum):
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    UNKNOWN = "Unknown"


@dataclass
class SearchParams:
    time_limit: float = 10.0
    node_limit: int | None = None
    seed: int = 0


@dataclass
class SearchStats:
    nodes: int = 0
    fails: int = 0
    propagations: int = 0
    solutions: int = 0
    max_depth: int = 0
    incumbents: list[tuple[int, int]] = field(default_factory=list)  # (node, objective)


@dataclass
class SearchOutcome:
    status: Status
    objective: int | None
    lower_bound: int | None
    values: list[int] | None
    runtime: float
    stats: SearchStats


class Search:
    """
    Parameters
    ----------
    store
        Store with every propagator posted.
    objective
        Variable to minimise, or None for a satisfaction search.
    bools
        Branching booleans, tried in the given order.
    intervals
        Decision intervals; only present ones are branched on.
    aux
        Variables fixed to their lower bound last, if still open.
    sequence_bools
        Booleans branched on after the intervals, value 1 first.
    """

    def __init__(
        self,
        store: Store,
        objective: int | None,
        bools: Sequence[int],
        intervals: Sequence[IntervalVar],
        aux: Sequence[int] = (),
        params: SearchParams | None = None,
        sequence_bools: Sequence[int] = (),
    ):
        self.store = store
        self.objective = objective
        self.bools = list(bools)
        self.params = params or SearchParams()
        order = list(range(len(intervals)))
        if self.params.seed:
            random.Random(self.params.seed).shuffle(order)
        # (priority, start, presence); ties on the start lower bound go to the lowest priority
        self.intervals = [
            (rank, iv.start, iv.presence) for rank, iv in sorted(zip(order, intervals), key=lambda x: x[0])
        ]
        self.aux = list(aux)
        self.sequence_bools = list(sequence_bools)
        self.bound_prop = ObjectiveBound(objective) if objective is not None else None
        if self.bound_prop is not None:
            store.post(self.bound_prop)

    def _choose(self):
        lb, ub = self.store.lb, self.store.ub
        for var in self.bools:
            if lb[var] != ub[var]:
                return ("bool", var, lb[var])
        best = None
        best_lb = None
        for _, start, presence in self.intervals:
            if presence is not None and lb[presence] != 1:
                continue
            if lb[start] != ub[start] and (best is None or lb[start] < best_lb):
                best, best_lb = start, lb[start]
        if best is not None:
            return ("start", best, best_lb)
        for var in self.sequence_bools:
            if lb[var] != ub[var]:
                return ("bool", var, lb[var])
        for var in self.aux:
            if lb[var] != ub[var]:
                return ("start", var, lb[var])
        return None

    def _apply(self, decision, left: bool) -> None:
        kind, var, value = decision
        store = self.store
        if kind == "bool":
            store.fix(var, 1 if left else 0)
        elif left:
            store.fix(var, value)
        else:
            store.set_lb(var, value + 1)

    def _propagate_after(self, decision, left: bool) -> bool:
        store = self.store
        try:
            if self.bound_prop is not None:
                self.bound_prop.propagate(store)
            self._apply(decision, left)
        except Inconsistent:
            store.clear_queue()
            return False
        return store.propagate()

    def run(self) -> SearchOutcome:
        store = self.store
        params = self.params
        stats = SearchStats()
        started = time.perf_counter()
        deadline = started + params.time_limit
        props0 = store.n_propagations

        def outcome(status, best, best_values, lower):
            stats.propagations = store.n_propagations - props0
            return SearchOutcome(status, best, lower, best_values, time.perf_counter() - started, stats)

        if not store.propagate():
            stats.fails += 1
            return outcome(Status.INFEASIBLE, None, None, None)

        root_lb = store.lb[self.objective] if self.objective is not None else None
        best: int | None = None
        best_values: list[int] | None = None
        stack: list[tuple[int, tuple]] = []
        exhausted = False

        consistent = True
        while True:
            if consistent:
                if time.perf_counter() > deadline or (
                    params.node_limit is not None and stats.nodes >= params.node_limit
                ):
                    break
                stats.nodes += 1
                decision = self._choose()
                if decision is None:
                    value = store.lb[self.objective] if self.objective is not None else 0
                    best, best_values = value, store.lb[:]
                    stats.solutions += 1
                    stats.incumbents.append((stats.nodes, value))
                    if self.objective is None:
                        return outcome(Status.OPTIMAL, 0, best_values, 0)
                    self.bound_prop.bound = value - 1
                    consistent = False
                    continue
                stack.append((store.mark(), decision))
                stats.max_depth = max(stats.max_depth, len(stack))
                consistent = self._propagate_after(decision, True)
                if not consistent:
                    stats.fails += 1
                continue

            # backtrack: take the right branch of the deepest open decision
            if not stack:
                exhausted = True
                break
            mark, decision = stack.pop()
            store.backtrack(mark)
            consistent = self._propagate_after(decision, False)
            if not consistent:
                stats.fails += 1

        if exhausted:
            if best is None:
                return outcome(Status.INFEASIBLE, None, None, None)
            return outcome(Status.OPTIMAL, best, best_values, best)

        # limit hit: restore the root state for callers that inspect the store
        if stack:
            store.backtrack(stack[0][0])
        if best is None:
            return outcome(Status.UNKNOWN, None, None, root_lb)
        return outcome(Status.FEASIBLE, best, best_values, min(root_lb, best))
