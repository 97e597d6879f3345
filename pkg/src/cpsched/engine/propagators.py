"""
Propagators over the bounds store.

Literals are ``(var, value)`` pairs over boolean variables and hold when the
variable is fixed to ``value``. All propagators are monotone: they only ever
raise lower bounds or lower upper bounds, and signal failure by raising
:class:`~cpsched.engine.store.Inconsistent`.
"""

from __future__ import annotations

from typing import Sequence

from .store import Inconsistent, IntervalVar, Propagator, Store

Literal = tuple[int, int]


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


class LinkStartEnd(Propagator):
    """``end = start + duration`` while the interval is present.

    An optional interval whose bounds cannot hold the relation is made absent.
    """

    kind = "LinkStartEnd"

    def __init__(self, interval: IntervalVar):
        self.interval = interval
        scope = [interval.start, interval.end, interval.duration]
        if interval.presence is not None:
            scope.append(interval.presence)
        self.scope = tuple(scope)

    def propagate(self, store: Store) -> None:
        lb, ub = store.lb, store.ub
        iv = self.interval
        p = iv.presence
        if p is not None and ub[p] == 0:
            store.deactivate(self)
            return
        s, e, d = iv.start, iv.end, iv.duration
        e_lo = max(lb[e], lb[s] + lb[d])
        e_hi = min(ub[e], ub[s] + ub[d])
        s_lo = max(lb[s], e_lo - ub[d])
        s_hi = min(ub[s], e_hi - lb[d])
        d_lo = max(lb[d], e_lo - s_hi)
        d_hi = min(ub[d], e_hi - s_lo)

        if p is not None and lb[p] == 0:
            if e_lo > e_hi or s_lo > s_hi or d_lo > d_hi:
                store.fix(p, 0)
            return

        store.set_lb(e, e_lo)
        store.set_ub(e, e_hi)
        store.set_lb(s, s_lo)
        store.set_ub(s, s_hi)
        store.set_lb(d, d_lo)
        store.set_ub(d, d_hi)


class SumPresenceEq(Propagator):
    """Exactly ``total`` of the booleans are true."""

    kind = "SumPresenceEq"
    idempotent = True

    def __init__(self, bools: Sequence[int], total: int = 1):
        self.bools = tuple(bools)
        self.total = total
        self.scope = self.bools

    def propagate(self, store: Store) -> None:
        lb, ub = store.lb, store.ub
        ones = 0
        free = []
        for var in self.bools:
            if lb[var] == 1:
                ones += 1
            elif ub[var] == 1:
                free.append(var)
        if ones > self.total or ones + len(free) < self.total:
            raise Inconsistent
        if ones == self.total:
            for var in free:
                store.set_ub(var, 0)
        elif ones + len(free) == self.total:
            for var in free:
                store.set_lb(var, 1)


class CondEq(Propagator):
    """``guard => x == y`` on bounds; disjoint ranges falsify the guard."""

    kind = "CondEq"

    def __init__(self, guard: Literal, x: int, y: int):
        self.guard = guard
        self.x, self.y = x, y
        self.scope = (guard[0], x, y)

    def propagate(self, store: Store) -> None:
        lb, ub = store.lb, store.ub
        g, val = self.guard
        x, y = self.x, self.y
        if lb[g] == ub[g]:
            if lb[g] != val:
                store.deactivate(self)
                return
            store.set_lb(x, lb[y])
            store.set_ub(x, ub[y])
            store.set_lb(y, lb[x])
            store.set_ub(y, ub[x])
        elif lb[x] > ub[y] or lb[y] > ub[x]:
            store.fix(g, 1 - val)


class Precedence(Propagator):
    """
    ``x + delay <= y``, active once every guard literal holds.

    With a single open guard and the other guards true, a violated bound
    falsifies that guard.
    """

    kind = "Precedence"
    idempotent = True

    def __init__(self, x: int, y: int, delay: int = 0, guards: Sequence[Literal] = ()):
        self.x, self.y, self.delay = x, y, delay
        self.guards = tuple(guards)
        self.scope = (x, y, *(var for var, _ in self.guards))

    def propagate(self, store: Store) -> None:
        lb, ub = store.lb, store.ub
        open_guard = None
        for var, val in self.guards:
            if lb[var] == ub[var]:
                if lb[var] != val:
                    store.deactivate(self)
                    return
            elif open_guard is None:
                open_guard = (var, val)
            else:
                return
        x, y, delay = self.x, self.y, self.delay
        if open_guard is None:
            store.set_lb(y, lb[x] + delay)
            store.set_ub(x, ub[y] - delay)
            if ub[x] + delay <= lb[y]:
                store.deactivate(self)
        elif lb[x] + delay > ub[y]:
            store.fix(open_guard[0], 1 - open_guard[1])


class Implication(Propagator):
    """
    ``all(antecedents) => any(consequents)``, propagated as a clause.
    """

    kind = "Implication"
    idempotent = True

    def __init__(self, antecedents: Sequence[Literal], consequents: Sequence[Literal]):
        self.antecedents = tuple(antecedents)
        self.consequents = tuple(consequents)
        self.literals = tuple((v, 1 - val) for v, val in self.antecedents) + self.consequents
        self.scope = tuple(var for var, _ in self.literals)

    def propagate(self, store: Store) -> None:
        lb, ub = store.lb, store.ub
        unit = None
        for var, val in self.literals:
            if lb[var] == ub[var]:
                if lb[var] == val:
                    store.deactivate(self)
                    return
            elif unit is None:
                unit = (var, val)
            else:
                return
        if unit is None:
            raise Inconsistent
        store.fix(*unit)
        store.deactivate(self)


class LinearLeq(Propagator):
    """``sum(coef * var) <= rhs`` with bounds reasoning."""

    kind = "LinearLeq"
    idempotent = True

    def __init__(self, terms: Sequence[tuple[int, int]], rhs: int):
        self.terms = tuple((c, v) for c, v in terms if c != 0)
        self.rhs = rhs
        self.scope = tuple(v for _, v in self.terms)

    def propagate(self, store: Store) -> None:
        lb, ub = store.lb, store.ub
        mins = [c * lb[v] if c > 0 else c * ub[v] for c, v in self.terms]
        total = sum(mins)
        slack = self.rhs - total
        if slack < 0:
            raise Inconsistent
        for (c, v), own in zip(self.terms, mins):
            room = slack + own
            if c > 0:
                if c * ub[v] > room:
                    store.set_ub(v, room // c)
            elif c * lb[v] > room:
                store.set_lb(v, _ceil_div(room, c))


def linear_eq(terms: Sequence[tuple[int, int]], rhs: int) -> list[LinearLeq]:
    """Two inequalities jointly stating ``sum(coef * var) == rhs``."""
    return [LinearLeq(terms, rhs), LinearLeq([(-c, v) for c, v in terms], -rhs)]


class SpanMin(Propagator):
    """``y = min(xs)``."""

    kind = "SpanMin"

    def __init__(self, y: int, xs: Sequence[int]):
        self.y = y
        self.xs = tuple(xs)
        self.scope = (y, *self.xs)

    def propagate(self, store: Store) -> None:
        lb, ub = store.lb, store.ub
        y, xs = self.y, self.xs
        store.set_lb(y, min(lb[x] for x in xs))
        store.set_ub(y, min(ub[x] for x in xs))
        ylb, yub = lb[y], ub[y]
        support = None
        for x in xs:
            store.set_lb(x, ylb)
            if lb[x] <= yub:
                support = x if support is None else -1
        if support is None:
            raise Inconsistent
        if support >= 0:
            store.set_ub(support, yub)


class MaxOf(Propagator):
    """
    ``y = max(floor, max(coef * var + const))`` over the present terms.

    Each term is ``(coef, var, const, presence)`` with ``presence`` None for
    terms that always count. ``floor`` may be None.
    """

    kind = "SpanMax"

    def __init__(
        self,
        y: int,
        terms: Sequence[tuple[int, int, int, int | None]],
        floor: int | None = None,
    ):
        self.y = y
        self.terms = tuple(terms)
        self.floor = floor
        scope = [y]
        for _, var, _, p in self.terms:
            scope.append(var)
            if p is not None:
                scope.append(p)
        self.scope = tuple(scope)

    def propagate(self, store: Store) -> None:
        lb, ub = store.lb, store.ub
        floor = self.floor
        best_lb = floor
        best_ub = floor
        live = []
        for term in self.terms:
            c, var, k, p = term
            if p is not None and ub[p] == 0:
                continue
            if c >= 0:
                lo, hi = c * lb[var] + k, c * ub[var] + k
            else:
                lo, hi = c * ub[var] + k, c * lb[var] + k
            present = p is None or lb[p] == 1
            if present and (best_lb is None or lo > best_lb):
                best_lb = lo
            if best_ub is None or hi > best_ub:
                best_ub = hi
            live.append((term, lo, hi, present))

        if best_lb is None:
            return
        y = self.y
        store.set_lb(y, best_lb)
        store.set_ub(y, best_ub)

        yub = ub[y]
        for (c, var, k, p), lo, hi, present in live:
            if present:
                if hi > yub:
                    if c > 0:
                        store.set_ub(var, (yub - k) // c)
                    else:
                        store.set_lb(var, _ceil_div(yub - k, c))
            elif lo > yub:
                store.fix(p, 0)

        ylb = lb[y]
        if floor is not None and floor >= ylb:
            return
        support = None
        for term, lo, hi, present in live:
            if hi >= ylb:
                if support is not None:
                    return
                support = term
        if support is None:
            raise Inconsistent
        c, var, k, p = support
        if p is not None:
            store.fix(p, 1)
        if c > 0:
            store.set_lb(var, _ceil_div(ylb - k, c))
        else:
            store.set_ub(var, (ylb - k) // c)


class MaxEndEnergy(Propagator):
    """
    Redundant bound ``y >= max end`` over intervals sharing one machine.

    Present intervals run one at a time, so the last of those starting at or
    after time ``t`` ends no earlier than ``t`` plus their total duration.
    """

    kind = "SpanMax"

    def __init__(self, y: int, intervals: Sequence[IntervalVar]):
        self.y = y
        self.intervals = tuple(intervals)
        scope = [y]
        for iv in self.intervals:
            scope += [iv.start, iv.duration]
            if iv.presence is not None:
                scope.append(iv.presence)
        self.scope = tuple(scope)

    def propagate(self, store: Store) -> None:
        lb = store.lb
        items = []
        for iv in self.intervals:
            p = iv.presence
            if p is None or lb[p] == 1:
                items.append((lb[iv.start], lb[iv.duration]))
        if len(items) < 2:
            return
        items.sort(reverse=True)
        work = 0
        best = 0
        for est, dur in items:
            work += dur
            if est + work > best:
                best = est + work
        store.set_lb(self.y, best)


class Disjunctive(Propagator):
    """
    No two present intervals overlap.

    Filtering: overlap of compulsory parts, overload checking, pairwise
    detectable precedences and timetable pushes against the compulsory parts
    of the other intervals. Optional intervals never have their bounds
    pruned; they are made absent when they cannot be placed. Zero-duration
    intervals are ignored.
    """

    kind = "Disjunctive"

    def __init__(self, intervals: Sequence[IntervalVar]):
        self.intervals = tuple(intervals)
        scope = []
        for iv in self.intervals:
            scope += [iv.start, iv.end, iv.duration]
            if iv.presence is not None:
                scope.append(iv.presence)
        self.scope = tuple(scope)

    def _collect(self, store: Store):
        lb, ub = store.lb, store.ub
        present, optional = [], []
        for iv in self.intervals:
            p = iv.presence
            if p is not None and ub[p] == 0:
                continue
            dur = lb[iv.duration]
            if dur <= 0:
                continue
            est = lb[iv.start]
            lct = ub[iv.end]
            entry = (iv, est, min(ub[iv.start], lct - dur), max(lb[iv.end], est + dur), lct, dur)
            if p is None or lb[p] == 1:
                present.append(entry)
            else:
                optional.append(entry)
        return present, optional

    def propagate(self, store: Store) -> None:
        present, optional = self._collect(store)
        if len(present) + len(optional) < 2:
            return

        # compulsory parts of present intervals
        parts = sorted((lst, ect, n) for n, (_, _, lst, ect, _, _) in enumerate(present) if lst < ect)
        for (a0, b0, _), (a1, _, _) in zip(parts, parts[1:]):
            if a1 < b0:
                raise Inconsistent

        # overload: any window holding more work than its length
        if len(present) > 1:
            by_est = sorted(present, key=lambda en: -en[1])
            for lct_bound in {en[4] for en in present}:
                work = 0
                for en in by_est:
                    if en[4] <= lct_bound:
                        work += en[5]
                        if en[1] + work > lct_bound:
                            raise Inconsistent

        # detectable precedences
        n = len(present)
        for a in range(n):
            iv_a, est_a, lst_a, ect_a, lct_a, _ = present[a]
            for b in range(a + 1, n):
                iv_b, est_b, lst_b, ect_b, lct_b, _ = present[b]
                a_not_first = ect_a > lst_b
                b_not_first = ect_b > lst_a
                if a_not_first and b_not_first:
                    raise Inconsistent
                if a_not_first:
                    store.set_lb(iv_a.start, ect_b)
                    store.set_ub(iv_b.end, lst_a)
                elif b_not_first:
                    store.set_lb(iv_b.start, ect_a)
                    store.set_ub(iv_a.end, lst_b)

        # timetable pushes
        for n_self, (iv, est, lst, ect, lct, dur) in enumerate(present):
            t = est
            for a, b, owner in parts:
                if owner == n_self or b <= t:
                    continue
                if a >= t + dur:
                    break
                t = b
            if t > est:
                store.set_lb(iv.start, t)
            c = lct
            for a, b, owner in reversed(parts):
                if owner == n_self or a >= c:
                    continue
                if b <= c - dur:
                    break
                c = a
            if c < lct:
                store.set_ub(iv.end, c)

        # optional intervals: absent if they cannot be placed
        for iv, est, lst, ect, lct, dur in optional:
            t = est
            for a, b, _ in parts:
                if b <= t:
                    continue
                if a >= t + dur:
                    break
                t = b
            if t > lst:
                store.fix(iv.presence, 0)
                continue
            for _, est_b, lst_b, ect_b, _, _ in present:
                if ect > lst_b and ect_b > lst:
                    store.fix(iv.presence, 0)
                    break


class CumulativeTimetable(Propagator):
    """
    Timetable filtering of a renewable resource.

    The compulsory-part profile of present intervals may not exceed the
    capacity; start and end bounds of present intervals are pushed past
    profile segments they cannot overlap, and optional intervals that cannot
    fit anywhere are made absent.
    """

    kind = "CumulativeTimetable"

    def __init__(self, intervals: Sequence[IntervalVar], demands: Sequence[int], capacity: int):
        keep = [(iv, q) for iv, q in zip(intervals, demands) if q > 0]
        self.intervals = tuple(iv for iv, _ in keep)
        self.demands = tuple(q for _, q in keep)
        self.capacity = capacity
        scope = []
        for iv in self.intervals:
            scope += [iv.start, iv.end, iv.duration]
            if iv.presence is not None:
                scope.append(iv.presence)
        self.scope = tuple(scope)

    def propagate(self, store: Store) -> None:
        lb, ub = store.lb, store.ub
        cap = self.capacity
        entries = []
        events: dict[int, int] = {}
        for iv, q in zip(self.intervals, self.demands):
            p = iv.presence
            if p is not None and ub[p] == 0:
                continue
            present = p is None or lb[p] == 1
            if q > cap:
                if present:
                    raise Inconsistent
                store.fix(p, 0)
                continue
            dur = lb[iv.duration]
            if dur <= 0:
                continue
            est = lb[iv.start]
            lct = ub[iv.end]
            lst = min(ub[iv.start], lct - dur)
            ect = max(lb[iv.end], est + dur)
            entries.append((iv, q, est, lst, ect, lct, dur, present))
            if present and lst < ect:
                events[lst] = events.get(lst, 0) + q
                events[ect] = events.get(ect, 0) - q

        if not events:
            return

        segments = []
        height = 0
        times = sorted(events)
        for t0, t1 in zip(times, times[1:]):
            height += events[t0]
            if height > 0:
                if height > cap:
                    raise Inconsistent
                segments.append((t0, t1, height))

        for iv, q, est, lst, ect, lct, dur, present in entries:
            own = present and lst < ect
            limit = cap - q

            t = est
            for a, b, h in segments:
                if b <= t:
                    continue
                if a >= t + dur:
                    break
                if own and lst <= a and b <= ect:
                    h -= q
                if h > limit:
                    t = b
            if t > lst:
                if present:
                    raise Inconsistent
                store.fix(iv.presence, 0)
                continue

            c = lct
            for a, b, h in reversed(segments):
                if a >= c:
                    continue
                if b <= c - dur:
                    break
                if own and lst <= a and b <= ect:
                    h -= q
                if h > limit:
                    c = a
            if c < ect:
                if present:
                    raise Inconsistent
                store.fix(iv.presence, 0)
                continue

            if present:
                if t > est:
                    store.set_lb(iv.start, t)
                if c < lct:
                    store.set_ub(iv.end, c)


class Circuit(Propagator):
    """
    The selected arcs of a complete graph with self-loops form one circuit
    through node 0; nodes off the circuit take their self-loop.

    ``arcs[u][v]`` is the boolean of arc ``u -> v``. Filtering: one outgoing
    and one incoming arc per node, the dummy self-loop forces every other
    self-loop, and arcs closing a sub-circuit that misses node 0 (or misses a
    node that must be visited) are removed.
    """

    kind = "Circuit"
    idempotent = True

    def __init__(self, arcs: Sequence[Sequence[int]]):
        self.arcs = tuple(tuple(row) for row in arcs)
        self.n = len(self.arcs)
        self.cols = tuple(tuple(row[v] for row in self.arcs) for v in range(self.n))
        self.scope = tuple(var for row in self.arcs for var in row)

    def propagate(self, store: Store) -> None:
        # run to a local fixpoint so that own changes need no re-queue
        mark = -1
        while mark != len(store.trail):
            mark = len(store.trail)
            self._step(store)

    def _step(self, store: Store) -> None:
        lb, ub = store.lb, store.ub
        arcs, n = self.arcs, self.n

        for row in arcs:
            self._degree(store, row)
        for col in self.cols:
            self._degree(store, col)

        dummy = arcs[0][0]
        if lb[dummy] == 1:
            for v in range(1, n):
                store.set_lb(arcs[v][v], 1)
        elif ub[dummy] == 1 and any(ub[arcs[v][v]] == 0 for v in range(1, n)):
            store.set_ub(dummy, 0)

        succ = [-1] * n
        has_pred = [False] * n
        for u in range(n):
            row = arcs[u]
            for v in range(n):
                if v != u and lb[row[v]] == 1:
                    succ[u] = v
                    has_pred[v] = True

        seen = [False] * n
        for a in range(n):
            if succ[a] < 0 or has_pred[a]:
                continue
            chain = [a]
            u = a
            while succ[u] >= 0:
                u = succ[u]
                chain.append(u)
            for w in chain:
                seen[w] = True
            closing = arcs[u][a]
            if ub[closing] == 0:
                continue
            members = set(chain)
            if 0 not in members:
                store.set_ub(closing, 0)
            elif any(w not in members and ub[arcs[w][w]] == 0 for w in range(n)):
                store.set_ub(closing, 0)

        for a in range(n):
            if succ[a] < 0 or seen[a]:
                continue
            cycle = set()
            u = a
            while u not in cycle:
                cycle.add(u)
                seen[u] = True
                u = succ[u]
            if 0 not in cycle:
                raise Inconsistent
            for w in range(n):
                if w not in cycle:
                    store.set_lb(arcs[w][w], 1)

    @staticmethod
    def _degree(store: Store, line: Sequence[int]) -> None:
        lb, ub = store.lb, store.ub
        free = [var for var in line if ub[var]]
        if not free:
            raise Inconsistent
        if len(free) == 1:
            store.set_lb(free[0], 1)
            return
        chosen = [var for var in free if lb[var]]
        if len(chosen) > 1:
            raise Inconsistent
        if chosen:
            for var in free:
                if var != chosen[0]:
                    store.set_ub(var, 0)


class CircuitPrecedence(Propagator):
    """
    Time bounds implied by the fixed ends of a machine circuit.

    With arcs ``0 -> a1 -> ... -> ak`` fixed, every other present node runs
    after ``ak``; with ``bk -> ... -> b1 -> 0`` fixed, every other present node
    runs before ``bk``. ``intervals[u]`` belongs to node ``u``; node 0 is the
    dummy. Valid whenever consecutive nodes are linked by precedences with
    non-negative delays.
    """

    kind = "Precedence"

    def __init__(self, arcs: Sequence[Sequence[int]], intervals: Sequence[IntervalVar | None]):
        self.arcs = tuple(tuple(row) for row in arcs)
        self.intervals = tuple(intervals)
        self.n = len(self.arcs)
        scope = [var for row in self.arcs for var in row]
        for iv in self.intervals[1:]:
            scope += [iv.start, iv.end, iv.presence]
        self.scope = tuple(scope)

    def _walk(self, store: Store, forward: bool) -> list[int]:
        lb, arcs, n = store.lb, self.arcs, self.n
        chain = []
        u = 0
        while True:
            nxt = -1
            for v in range(1, n):
                if v != u and lb[arcs[u][v] if forward else arcs[v][u]] == 1:
                    nxt = v
                    break
            if nxt < 0 or nxt in chain:
                return chain
            chain.append(nxt)
            u = nxt

    def propagate(self, store: Store) -> None:
        lb, ub = store.lb, store.ub
        head = self._walk(store, True)
        tail = self._walk(store, False)
        if not head and not tail:
            return
        if head:
            members = set(head)
            after = lb[self.intervals[head[-1]].end]
            for w in range(1, self.n):
                if w in members:
                    continue
                iv = self.intervals[w]
                if lb[iv.presence] == 1:
                    store.set_lb(iv.start, after)
                elif ub[iv.presence] == 1 and after > ub[iv.start]:
                    store.fix(iv.presence, 0)
        if tail:
            members = set(tail)
            before = ub[self.intervals[tail[-1]].start]
            for w in range(1, self.n):
                if w in members:
                    continue
                iv = self.intervals[w]
                if lb[iv.presence] == 1:
                    store.set_ub(iv.end, before)
                elif ub[iv.presence] == 1 and before < lb[iv.end]:
                    store.fix(iv.presence, 0)


class ObjectiveBound(Propagator):
    """``objective <= bound``; the search lowers ``bound`` after each incumbent."""

    kind = "ObjectiveBound"
    idempotent = True

    def __init__(self, objective: int):
        self.objective = objective
        self.bound: int | None = None
        self.scope = (objective,)

    def propagate(self, store: Store) -> None:
        if self.bound is not None:
            store.set_ub(self.objective, self.bound)
