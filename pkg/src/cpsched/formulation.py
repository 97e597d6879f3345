"""
Translation of :class:`ProblemData` into an engine model.

:func:`build_model` encodes the general model: task intervals that are always
present, one optional interval per mode, resource constraints over the mode
intervals, timing constraints on the task intervals, assignment clauses, and a
circuit per machine for sequencing, setup times and consecutive pairs.
:func:`build_naive_fjsp_model` is the mode-pairwise encoding of the flexible
job shop kept for comparison.

Mode intervals reuse the start and end variables of their task, which makes
the start and end synchronisation hold by construction.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .engine import (
    Circuit,
    CircuitPrecedence,
    CondEq,
    CumulativeTimetable,
    Disjunctive,
    Implication,
    IntervalVar,
    LinearLeq,
    LinkStartEnd,
    MaxEndEnergy,
    MaxOf,
    Precedence,
    Search,
    SearchOutcome,
    SearchParams,
    SpanMin,
    Store,
    SumPresenceEq,
    linear_eq,
)
from .model import (
    ConstraintKind,
    Objective,
    ProblemData,
    ResourceKind,
    default_horizon,
    validate,
)
from .solution import Solution

BIG = 2**62


class UnsupportedModel(ValueError):
    """The instance uses a feature the requested formulation cannot encode."""


@dataclass
class ObjectiveExpr:
    var: int
    components: dict[Objective, int] = field(default_factory=dict)


@dataclass
class EngineModel:
    """
    Engine-level encoding of an instance plus the maps back to its ids.

    ``arcs[r][u][v]`` is the arc boolean of machine ``r`` between nodes ``u``
    and ``v``; node 0 is the dummy and node ``n > 0`` is mode ``nodes[r][n - 1]``.
    """

    data: ProblemData
    store: Store
    horizon: int
    formulation: str = "standard"
    task_intervals: list[IntervalVar] = field(default_factory=list)
    mode_intervals: list[IntervalVar] = field(default_factory=list)
    arcs: dict[int, list[list[int]]] = field(default_factory=dict)
    nodes: dict[int, list[int]] = field(default_factory=dict)
    job_starts: list[int] = field(default_factory=list)
    job_ends: list[int] = field(default_factory=list)
    objective: ObjectiveExpr | None = None
    branch_bools: list[int] = field(default_factory=list)
    branch_intervals: list[IntervalVar] = field(default_factory=list)
    sequence_bools: list[int] = field(default_factory=list)
    aux: list[int] = field(default_factory=list)

    @property
    def presence(self) -> list[int]:
        return [iv.presence for iv in self.mode_intervals]

    def propagator_counts(self) -> Counter:
        return Counter(p.kind for p in self.store.propagators)

    def post(self, *props) -> None:
        for prop in props:
            self.store.post(prop)

    def search(self, params: SearchParams | None = None) -> SearchOutcome:
        objective = self.objective.var if self.objective is not None else None
        engine = Search(
            self.store,
            objective,
            self.branch_bools,
            self.branch_intervals,
            self.aux,
            params,
            self.sequence_bools,
        )
        return engine.run()

    def decode(self, values: list[int]) -> Solution:
        """Solution from a full assignment of the store's variables."""
        modes, starts, ends = [], [], []
        for t, task in enumerate(self.data.tasks):
            chosen = [m for m in task.modes if values[self.mode_intervals[m].presence] == 1]
            if len(chosen) != 1:
                raise ValueError(f"assignment selects {len(chosen)} modes for task {t}")
            iv = self.task_intervals[t] if self.task_intervals else self.mode_intervals[chosen[0]]
            modes.append(chosen[0])
            starts.append(values[iv.start])
            ends.append(values[iv.end])
        return Solution.from_lists(modes, starts, ends)


def _check_valid(data: ProblemData) -> None:
    report = validate(data)
    if report.errors:
        lines = "; ".join(str(issue) for issue in report.errors)
        raise ValueError(f"invalid instance: {lines}")


def _window(lo: int, hi: int, em: EngineModel, name: str) -> int:
    """Variable over ``[lo, hi]``; an empty range makes the model fail at the root."""
    store = em.store
    if lo > hi:
        var = store.new_var(lo, lo, name)
        em.post(LinearLeq([], -1))
        return var
    return store.new_var(lo, hi, name)


def _task_bounds(data: ProblemData, horizon: int):
    """Start and end ranges of every task from windows, releases and deadlines."""
    owner = data.task_job()
    bounds = []
    for t, task in enumerate(data.tasks):
        s_lo, s_hi, e_lo, e_hi = 0, horizon, 0, horizon
        if owner[t] is not None:
            job = data.jobs[owner[t]]
            s_lo = max(s_lo, job.release)
            if job.deadline is not None:
                e_hi = min(e_hi, job.deadline)
        if task.earliest_start is not None:
            s_lo = max(s_lo, task.earliest_start)
        if task.latest_start is not None:
            s_hi = min(s_hi, task.latest_start)
        if task.earliest_end is not None:
            e_lo = max(e_lo, task.earliest_end)
        if task.latest_end is not None:
            e_hi = min(e_hi, task.latest_end)
        bounds.append((s_lo, s_hi, e_lo, e_hi))
    return bounds


def model_horizon(data: ProblemData) -> int:
    """
    Explicit horizon of ``data`` or :func:`default_horizon`.

    With a positive earliness weight the default is moved past the latest due
    date so that just-in-time completions stay reachable.
    """
    if data.horizon is not None:
        return data.horizon
    horizon = default_horizon(data)
    if data.objective.total_earliness > 0:
        horizon += max((job.due_date or 0 for job in data.jobs), default=0)
    return horizon


def build_model(data: ProblemData) -> EngineModel:
    _check_valid(data)
    horizon = model_horizon(data)
    store = Store()
    em = EngineModel(data, store, horizon)

    # task intervals
    for t, (task, (s_lo, s_hi, e_lo, e_hi)) in enumerate(zip(data.tasks, _task_bounds(data, horizon))):
        durations = [data.modes[m].duration for m in task.modes]
        start = _window(s_lo, s_hi, em, f"task {t}.start")
        end = _window(e_lo, e_hi, em, f"task {t}.end")
        dur = store.new_var(min(durations), max(durations), f"task {t}.duration")
        iv = IntervalVar(start, end, dur, None, f"task {t}")
        em.task_intervals.append(iv)
        em.post(LinkStartEnd(iv))

    # mode intervals share the task's start and end
    for m, mode in enumerate(data.modes):
        task_iv = em.task_intervals[mode.task]
        present = store.new_bool(f"mode {m}.present")
        iv = IntervalVar(task_iv.start, task_iv.end, store.constant(mode.duration), present, f"mode {m}")
        em.mode_intervals.append(iv)
        em.post(LinkStartEnd(iv))
        em.post(CondEq((present, 1), task_iv.duration, iv.duration))

    for t, task in enumerate(data.tasks):
        em.post(SumPresenceEq([em.mode_intervals[m].presence for m in task.modes], 1))

    _post_job_spans(em)
    _post_resources(em)
    _post_timing(em, em.task_intervals)
    _post_assignment(em)
    _post_sequencing(em)
    em.objective = objective_expression(data, em)

    # arcs follow from the start times in most cases, so they are branched last
    em.branch_bools = em.presence
    em.branch_intervals = list(em.task_intervals)
    em.sequence_bools = [var for r in sorted(em.arcs) for row in em.arcs[r] for var in row]
    em.aux += [em.objective.var]
    return em


def _post_job_spans(em: EngineModel) -> None:
    store, data = em.store, em.data
    for j, job in enumerate(data.jobs):
        starts = [em.task_intervals[t].start for t in job.tasks]
        ends = [em.task_intervals[t].end for t in job.tasks]
        hi = em.horizon if job.deadline is None else min(em.horizon, job.deadline)
        start = store.new_var(0, em.horizon, f"job {j}.start")
        end = _window(0, hi, em, f"job {j}.end")
        em.post(SpanMin(start, starts))
        em.post(MaxOf(end, [(1, e, 0, None) for e in ends]))
        _post_machine_load(em, end, job.tasks)
        em.job_starts.append(start)
        em.job_ends.append(end)


def _post_machine_load(em: EngineModel, end: int, tasks) -> None:
    """Redundant machine-load bounds on a variable that dominates the ends of ``tasks``."""
    data = em.data
    members = set(tasks)
    for r in data.machines():
        users = [m for m in data.modes_using(r) if data.modes[m].task in members]
        if len({data.modes[m].task for m in users}) > 1:
            em.post(MaxEndEnergy(end, [em.mode_intervals[m] for m in users]))


def _post_resources(em: EngineModel) -> None:
    data = em.data
    for r, res in enumerate(data.resources):
        users = data.modes_using(r)
        if not users:
            continue
        intervals = [em.mode_intervals[m] for m in users]
        if res.kind == ResourceKind.MACHINE:
            em.post(Disjunctive(intervals))
        elif res.kind == ResourceKind.RENEWABLE:
            em.post(CumulativeTimetable(intervals, [data.modes[m].demand(r) for m in users], res.capacity))
        else:
            terms = [(data.modes[m].demand(r), em.mode_intervals[m].presence) for m in users]
            em.post(LinearLeq(terms, res.capacity))


def _post_timing(em: EngineModel, intervals: list[IntervalVar]) -> None:
    for kind, i, k, delay in em.data.constraints.timing():
        left = intervals[i].start if kind.value.startswith("start") else intervals[i].end
        right = intervals[k].start if kind.value.endswith("start") else intervals[k].end
        em.post(Precedence(left, right, delay))


def _post_assignment(em: EngineModel) -> None:
    data = em.data
    cons = data.constraints
    presence = em.presence

    def post(pairs, compatible) -> None:
        for i, k in pairs:
            for a, b in ((i, k), (k, i)):
                for m_a in data.tasks[a].modes:
                    res_a = set(data.modes[m_a].resources)
                    support = [
                        (presence[m_b], 1)
                        for m_b in data.tasks[b].modes
                        if compatible(res_a, set(data.modes[m_b].resources))
                    ]
                    em.post(Implication([(presence[m_a], 1)], support))

    post(cons.identical_resources, lambda x, y: x == y)
    post(cons.different_resources, lambda x, y: not x & y)


def _post_sequencing(em: EngineModel) -> None:
    store, data = em.store, em.data
    presence = em.presence
    setup = data.constraints.setup_lookup()

    for r in data.machines():
        users = data.modes_using(r)
        if not users:
            continue
        n = len(users) + 1
        node_task = [None] + [data.modes[m].task for m in users]
        arcs = [
            [
                # two modes of one task are never both present
                store.new_var(0, 0, f"machine {r} arc {u}->{v}")
                if u != v and u and v and node_task[u] == node_task[v]
                else store.new_bool(f"machine {r} arc {u}->{v}")
                for v in range(n)
            ]
            for u in range(n)
        ]
        em.arcs[r] = arcs
        em.nodes[r] = users
        em.post(Circuit(arcs))
        em.post(CircuitPrecedence(arcs, [None] + [em.mode_intervals[m] for m in users]))

        for u in range(1, n):
            mu = users[u - 1]
            # selected self-loop exactly when the mode is absent
            em.post(Implication([(arcs[u][u], 1)], [(presence[mu], 0)]))
            em.post(Implication([(presence[mu], 0)], [(arcs[u][u], 1)]))
            em.post(Implication([(arcs[0][0], 1)], [(presence[mu], 0)]))
            for v in range(1, n):
                mv = users[v - 1]
                if u == v or node_task[u] == node_task[v]:
                    continue
                b = arcs[u][v]
                em.post(Implication([(b, 1)], [(presence[mu], 1)]))
                em.post(Implication([(b, 1)], [(presence[mv], 1)]))
                s = setup.get((data.modes[mu].task, data.modes[mv].task, r), 0)
                em.post(
                    Precedence(em.mode_intervals[mu].end, em.mode_intervals[mv].start, s, [(b, 1)])
                )

        node = {m: u + 1 for u, m in enumerate(users)}
        for i, k in data.constraints.consecutive:
            if r not in data.overlapping_machines(i, k):
                continue
            for mu in data.tasks[i].modes:
                for mv in data.tasks[k].modes:
                    if mu in node and mv in node:
                        em.post(
                            Implication(
                                [(presence[mu], 1), (presence[mv], 1)],
                                [(arcs[node[mu]][node[mv]], 1)],
                            )
                        )


def objective_expression(data: ProblemData, em: EngineModel) -> ObjectiveExpr:
    """
    Post the weighted objective sum and return its variable.

    Components are created only for objectives with a nonzero weight.
    """
    store = em.store
    ends = em.job_ends
    jobs = data.jobs
    comps: dict[Objective, int] = {}
    terms: list[tuple[int, int]] = []
    const = 0

    makespan_ends = [iv.end for iv in (em.task_intervals or em.mode_intervals)]
    for obj, weight in data.objective.active():
        if obj == Objective.MAKESPAN:
            var = store.new_var(0, em.horizon, "makespan")
            if em.task_intervals:
                em.post(MaxOf(var, [(1, e, 0, None) for e in makespan_ends], floor=0))
                _post_machine_load(em, var, range(data.num_tasks))
            else:
                items = [(1, iv.end, 0, iv.presence) for iv in em.mode_intervals]
                em.post(MaxOf(var, items, floor=0))
            terms.append((weight, var))
        elif obj == Objective.TOTAL_FLOW_TIME:
            var = store.new_var(-BIG, BIG, "flow_time")
            em.post(*linear_eq([(job.weight, e) for job, e in zip(jobs, ends)] + [(-1, var)],
                               sum(job.weight * job.release for job in jobs)))
            terms.append((weight, var))
        elif obj in (Objective.TOTAL_TARDINESS, Objective.TOTAL_EARLINESS):
            parts = []
            for j, (job, e) in enumerate(zip(jobs, ends)):
                part = store.new_var(0, BIG, f"job {j}.{obj.value}")
                if obj == Objective.TOTAL_TARDINESS:
                    em.post(MaxOf(part, [(1, e, -job.due_date, None)], floor=0))
                else:
                    em.post(MaxOf(part, [(-1, e, job.due_date, None)], floor=0))
                parts.append((job.weight, part))
                em.aux.append(part)
            var = store.new_var(0, BIG, obj.value)
            em.post(*linear_eq(parts + [(-1, var)], 0))
            terms.append((weight, var))
        elif obj == Objective.TARDY_JOBS:
            parts = []
            for j, (job, e) in enumerate(zip(jobs, ends)):
                late = store.new_bool(f"job {j}.tardy")
                due = store.constant(job.due_date)
                em.post(Precedence(e, due, 0, [(late, 0)]))
                em.post(Precedence(due, e, 1, [(late, 1)]))
                parts.append((job.weight, late))
                em.aux.append(late)
            var = store.new_var(0, BIG, obj.value)
            em.post(*linear_eq(parts + [(-1, var)], 0))
            terms.append((weight, var))
        else:
            items = [(job.weight, e, -job.weight * job.due_date, None) for job, e in zip(jobs, ends)]
            floor = 0 if obj == Objective.MAX_TARDINESS else None
            var = store.new_var(0 if floor == 0 else -BIG, BIG, obj.value)
            if items or floor is not None:
                em.post(MaxOf(var, items, floor=floor))
            else:
                store.fix(var, 0)
            terms.append((weight, var))
        comps[obj] = terms[-1][1]

    total = store.new_var(-BIG, BIG, "objective")
    em.post(*linear_eq(terms + [(-1, total)], -const))
    return ObjectiveExpr(total, comps)


# naive flexible job shop ----------------------------------------------------


def _check_pure_fjsp(data: ProblemData) -> None:
    cons = data.constraints
    if any(res.kind != ResourceKind.MACHINE for res in data.resources):
        raise UnsupportedModel("naive FJSP formulation supports machines only")
    for kind in ConstraintKind:
        if kind == ConstraintKind.END_BEFORE_START:
            continue
        name = "setup_times" if kind == ConstraintKind.SETUP_TIME else kind.value
        if getattr(cons, name):
            raise UnsupportedModel(f"naive FJSP formulation does not support {kind.value} constraints")
    if [obj for obj, _ in data.objective.active()] != [Objective.MAKESPAN]:
        raise UnsupportedModel("naive FJSP formulation supports the makespan objective only")
    for t, task in enumerate(data.tasks):
        if any(
            bound is not None
            for bound in (task.earliest_start, task.latest_start, task.earliest_end, task.latest_end)
        ):
            raise UnsupportedModel(f"naive FJSP formulation does not support time windows (task {t})")
    for j, job in enumerate(data.jobs):
        if job.release or job.deadline is not None:
            raise UnsupportedModel(f"naive FJSP formulation does not support release or deadline (job {j})")


def build_naive_fjsp_model(data: ProblemData) -> EngineModel:
    """
    Mode-level encoding of a flexible job shop: optional mode intervals,
    exactly one mode per task, no overlap per machine, and an end-before-start
    precedence between every mode pair of every precedence-related task pair.
    """
    _check_valid(data)
    _check_pure_fjsp(data)
    horizon = model_horizon(data)
    store = Store()
    em = EngineModel(data, store, horizon, formulation="naive-fjsp")

    for m, mode in enumerate(data.modes):
        iv = store.new_interval((0, horizon), (0, horizon), mode.duration, optional=True, name=f"mode {m}")
        em.mode_intervals.append(iv)
        em.post(LinkStartEnd(iv))
    for task in data.tasks:
        em.post(SumPresenceEq([em.mode_intervals[m].presence for m in task.modes], 1))
    for r in data.machines():
        users = data.modes_using(r)
        if users:
            em.post(Disjunctive([em.mode_intervals[m] for m in users]))
    for i, k, delay in data.constraints.end_before_start:
        for mi in data.tasks[i].modes:
            for mk in data.tasks[k].modes:
                em.post(Precedence(em.mode_intervals[mi].end, em.mode_intervals[mk].start, delay))

    em.objective = objective_expression(data, em)
    em.branch_bools = em.presence
    em.branch_intervals = list(em.mode_intervals)
    em.aux = [em.objective.var]
    return em


FORMULATIONS = {"standard": build_model, "naive-fjsp": build_naive_fjsp_model}
