"""
Bounds-based finite domain store with an undo trail and a propagation queue.

Integer variables are plain indices into the ``lb``/``ub`` arrays; booleans
are integer variables with domain ``[0, 1]``. Every bound change is recorded
on the trail so that :meth:`Store.backtrack` restores domains exactly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass


class Inconsistent(Exception):
    """Raised by a bound update that empties a domain."""


@dataclass(frozen=True)
class IntervalVar:
    """
    Start, end and duration variables plus an optional presence literal.

    ``presence`` is None for intervals that are always present.
    """

    start: int
    end: int
    duration: int
    presence: int | None = None
    name: str = ""


class Propagator:
    """
    Base class for monotone propagators.

    Subclasses list the variables they read in ``scope`` and shrink domains in
    :meth:`propagate` through the store's ``set_lb``/``set_ub``/``fix``.
    Idempotent propagators are not re-queued by their own changes.
    """

    kind = "Propagator"
    idempotent = False
    scope: tuple[int, ...] = ()
    index = -1  # position in the store, set by Store.post

    def propagate(self, store: Store) -> None:  # pragma: no cover - interface
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{self.kind}({', '.join(map(str, self.scope[:6]))}{'...' if len(self.scope) > 6 else ''})"


class Store:
    def __init__(self) -> None:
        self.lb: list[int] = []
        self.ub: list[int] = []
        self.names: list[str] = []
        self.trail: list[tuple[int, int, int]] = []
        self.watchers: list[list[int]] = []
        self.propagators: list[Propagator] = []
        self._queue: deque[int] = deque()
        self._queued: list[bool] = []
        self._dead: list[bool] = []
        self._current = -1
        self._constants: dict[int, int] = {}
        self.n_propagations = 0

    # variables

    def new_var(self, lb: int, ub: int, name: str = "") -> int:
        if lb > ub:
            raise ValueError(f"empty initial domain [{lb}, {ub}] for {name or 'variable'}")
        self.lb.append(lb)
        self.ub.append(ub)
        self.names.append(name)
        self.watchers.append([])
        return len(self.lb) - 1

    def new_bool(self, name: str = "") -> int:
        return self.new_var(0, 1, name)

    def constant(self, value: int) -> int:
        if value not in self._constants:
            self._constants[value] = self.new_var(value, value, f"const {value}")
        return self._constants[value]

    def new_interval(
        self,
        start: tuple[int, int],
        end: tuple[int, int],
        duration: tuple[int, int] | int,
        optional: bool = False,
        name: str = "",
    ) -> IntervalVar:
        s = self.new_var(*start, name=f"{name}.start")
        e = self.new_var(*end, name=f"{name}.end")
        if isinstance(duration, int):
            d = self.constant(duration)
        else:
            d = self.new_var(*duration, name=f"{name}.duration")
        p = self.new_bool(f"{name}.present") if optional else None
        return IntervalVar(s, e, d, p, name)

    @property
    def num_vars(self) -> int:
        return len(self.lb)

    def is_fixed(self, var: int) -> bool:
        return self.lb[var] == self.ub[var]

    def value(self, var: int) -> int:
        if self.lb[var] != self.ub[var]:
            raise ValueError(f"variable {self.names[var] or var} is not fixed")
        return self.lb[var]

    # propagators

    def post(self, propagator: Propagator) -> Propagator:
        idx = len(self.propagators)
        propagator.index = idx
        self.propagators.append(propagator)
        self._queued.append(False)
        self._dead.append(False)
        for var in set(propagator.scope):
            self.watchers[var].append(idx)
        self._enqueue(idx)
        return propagator

    def _enqueue(self, idx: int) -> None:
        if not self._queued[idx]:
            self._queued[idx] = True
            self._queue.append(idx)

    def enqueue(self, propagator: Propagator) -> None:
        self._enqueue(self.propagators.index(propagator))

    def enqueue_all(self) -> None:
        for idx in range(len(self.propagators)):
            self._enqueue(idx)

    def _notify(self, var: int) -> None:
        queued, dead = self._queued, self._dead
        current = self._current
        for idx in self.watchers[var]:
            if not queued[idx] and not dead[idx] and (idx != current or not self.propagators[idx].idempotent):
                queued[idx] = True
                self._queue.append(idx)

    def deactivate(self, propagator: Propagator) -> None:
        """Stop waking an entailed propagator until backtracking past this point."""
        idx = propagator.index
        if not self._dead[idx]:
            self._dead[idx] = True
            self.trail.append((-1 - idx, 0, 0))

    # bound updates

    def set_lb(self, var: int, value: int) -> bool:
        """Raise the lower bound; returns True when the domain changed."""
        if value <= self.lb[var]:
            return False
        if value > self.ub[var]:
            raise Inconsistent
        self.trail.append((var, self.lb[var], self.ub[var]))
        self.lb[var] = value
        self._notify(var)
        return True

    def set_ub(self, var: int, value: int) -> bool:
        if value >= self.ub[var]:
            return False
        if value < self.lb[var]:
            raise Inconsistent
        self.trail.append((var, self.lb[var], self.ub[var]))
        self.ub[var] = value
        self._notify(var)
        return True

    def fix(self, var: int, value: int) -> bool:
        lo, hi = self.lb[var], self.ub[var]
        if value < lo or value > hi:
            raise Inconsistent
        if lo == hi:
            return False
        self.trail.append((var, lo, hi))
        self.lb[var] = self.ub[var] = value
        self._notify(var)
        return True

    # trail

    def mark(self) -> int:
        return len(self.trail)

    def backtrack(self, mark: int) -> None:
        trail, lb, ub = self.trail, self.lb, self.ub
        dead = self._dead
        while len(trail) > mark:
            var, lo, hi = trail.pop()
            if var < 0:
                dead[-1 - var] = False
            else:
                lb[var] = lo
                ub[var] = hi

    # fixpoint

    def propagate(self) -> bool:
        """
        Run queued propagators until no domain changes.

        Returns False (with an emptied queue) when a domain was wiped out.
        """
        queue, queued, props = self._queue, self._queued, self.propagators
        try:
            while queue:
                idx = queue.popleft()
                queued[idx] = False
                if self._dead[idx]:
                    continue
                self._current = idx
                self.n_propagations += 1
                props[idx].propagate(self)
        except Inconsistent:
            self.clear_queue()
            return False
        finally:
            self._current = -1
        return True

    def clear_queue(self) -> None:
        for idx in self._queue:
            self._queued[idx] = False
        self._queue.clear()

    def snapshot(self) -> tuple[list[int], list[int]]:
        return self.lb[:], self.ub[:]
