"""
Solutions, solver results, and the feasibility checker.

The checker recomputes every constraint directly from :class:`ProblemData` by
simulation and shares no code with the engine's propagators, so it can act as
the ground truth for the solver.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .engine.search import Status
from .model import Objective, ProblemData, ResourceKind


@dataclass(frozen=True)
class TaskData:
    mode: int
    start: int
    end: int

    @property
    def duration(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Solution:
    tasks: tuple[TaskData, ...]

    @classmethod
    def from_lists(cls, modes: Sequence[int], starts: Sequence[int], ends: Sequence[int]) -> Solution:
        return cls(tuple(TaskData(m, s, e) for m, s, e in zip(modes, starts, ends)))

    @classmethod
    def from_starts(cls, data: ProblemData, modes: Sequence[int], starts: Sequence[int]) -> Solution:
        ends = [s + data.modes[m].duration for m, s in zip(modes, starts)]
        return cls.from_lists(modes, starts, ends)

    def job_spans(self, data: ProblemData) -> list[tuple[int, int] | None]:
        """(start, end) of every job: earliest member start, latest member end."""
        spans: list[tuple[int, int] | None] = []
        for job in data.jobs:
            members = [self.tasks[t] for t in job.tasks]
            if not members:
                spans.append(None)
                continue
            spans.append((min(t.start for t in members), max(t.end for t in members)))
        return spans

    def makespan(self) -> int:
        return max((t.end for t in self.tasks), default=0)

    def to_dict(self, data: ProblemData | None = None) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "tasks": [{"mode": t.mode, "start": t.start, "end": t.end} for t in self.tasks]
        }
        if data is not None:
            payload["jobs"] = [
                None if span is None else {"start": span[0], "end": span[1]}
                for span in self.job_spans(data)
            ]
        return payload

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> Solution:
        try:
            return cls(
                tuple(TaskData(int(t["mode"]), int(t["start"]), int(t["end"])) for t in payload["tasks"])
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed solution: {exc}") from exc


@dataclass
class Result:
    """
    Outcome of a solver run.

    ``objective`` is the best found value (None without a solution) and
    ``lower_bound`` a proven bound on the optimum.
    """

    status: Status
    best: Solution | None
    objective: int | None
    lower_bound: int | None
    runtime: float
    statistics: dict[str, Any] = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status in (Status.OPTIMAL, Status.FEASIBLE)

    def to_dict(self, data: ProblemData | None = None) -> dict[str, Any]:
        return {
            "status": self.status.value,
            "objective": self.objective,
            "lower_bound": self.lower_bound,
            "runtime": round(self.runtime, 6),
            "statistics": self.statistics,
            "solution": None if self.best is None else self.best.to_dict(data),
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> Result:
        sol = payload.get("solution")
        return cls(
            status=Status(payload["status"]),
            best=None if sol is None else Solution.from_dict(sol),
            objective=payload.get("objective"),
            lower_bound=payload.get("lower_bound"),
            runtime=float(payload.get("runtime", 0.0)),
            statistics=dict(payload.get("statistics", {})),
        )


def dumps_solution(sol: Solution, data: ProblemData | None = None) -> str:
    return json.dumps(sol.to_dict(data), indent=2) + "\n"


def loads_solution(text: str) -> Solution:
    payload = json.loads(text)
    if "solution" in payload and "tasks" not in payload:
        if payload["solution"] is None:
            raise ValueError("result file holds no solution")
        payload = payload["solution"]
    return Solution.from_dict(payload)


# checker --------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    """
    A violated constraint.

    ``measurement`` quantifies the violation (overlap length, capacity
    excess, missing delay, ...) and is always positive.
    """

    kind: str
    ids: tuple[int, ...]
    measurement: int
    message: str = ""

    def __str__(self) -> str:
        ids = ", ".join(map(str, self.ids))
        return f"{self.kind}({ids}): {self.message or 'violated'} [{self.measurement}]"


def machine_sequence(
    sol: Solution,
    occupants: Sequence[int],
    setup: Mapping[tuple[int, int, int], int],
    machine: int,
    consecutive: Sequence[tuple[int, int]] = (),
) -> list[int]:
    """
    Processing order of ``occupants`` on ``machine``: by start, then end.

    Tasks with the same start and end (only possible at zero duration) may
    appear in any order; the order with the least setup shortfall and the most
    satisfied consecutive pairs is picked.
    """
    order = sorted(occupants, key=lambda t: (sol.tasks[t].start, sol.tasks[t].end, t))
    groups = [list(g) for _, g in itertools.groupby(order, key=lambda t: (sol.tasks[t].start, sol.tasks[t].end))]
    if all(len(g) == 1 for g in groups):
        return order

    def cost(seq: list[int]) -> tuple[int, int]:
        short = 0
        for a, b in zip(seq, seq[1:]):
            short += max(0, sol.tasks[a].end + setup.get((a, b, machine), 0) - sol.tasks[b].start)
        pos = {t: n for n, t in enumerate(seq)}
        broken = sum(
            1 for i, k in consecutive if i in pos and k in pos and pos[k] != pos[i] + 1
        )
        return short, broken

    seq: list[int] = []
    for n, group in enumerate(groups):
        if len(group) == 1 or len(group) > 6:
            seq += group
            continue
        rest = [t for g in groups[n + 1 :] for t in g]
        seq += list(min(itertools.permutations(group), key=lambda p: cost(seq + list(p) + rest)))
    return seq


def check(sol: Solution, data: ProblemData) -> list[Violation]:
    """
    Every violated constraint of ``sol``; empty iff the schedule is feasible.

    Machines are checked for pairwise overlap, then along their processing
    order for setup times and consecutive pairs. Renewable profiles are swept
    over all event times.
    """
    out: list[Violation] = []

    def add(kind: str, ids: Sequence[int], amount: int, message: str = "") -> None:
        if amount > 0:
            out.append(Violation(kind, tuple(ids), amount, message))

    if len(sol.tasks) != data.num_tasks:
        add("Structure", (), abs(len(sol.tasks) - data.num_tasks), "solution size differs from task count")
        return out

    for t, (task, entry) in enumerate(zip(data.tasks, sol.tasks)):
        if entry.mode not in task.modes:
            add("ModeNotOfTask", (t, entry.mode), 1, f"mode {entry.mode} is not a mode of task {t}")
            continue
        dur = data.modes[entry.mode].duration
        if entry.end - entry.start != dur:
            add("Duration", (t,), abs(entry.end - entry.start - dur), f"expected duration {dur}")
        add("NegativeStart", (t,), -entry.start)
        if data.horizon is not None:
            add("Horizon", (t,), entry.end - data.horizon, f"ends after horizon {data.horizon}")
        if task.earliest_start is not None:
            add("EarliestStart", (t,), task.earliest_start - entry.start)
        if task.latest_start is not None:
            add("LatestStart", (t,), entry.start - task.latest_start)
        if task.earliest_end is not None:
            add("EarliestEnd", (t,), task.earliest_end - entry.end)
        if task.latest_end is not None:
            add("LatestEnd", (t,), entry.end - task.latest_end)
    if out and any(v.kind == "ModeNotOfTask" for v in out):
        return out

    for j, job in enumerate(data.jobs):
        for t in job.tasks:
            add("Release", (j, t), job.release - sol.tasks[t].start, f"job {j} released at {job.release}")
            if job.deadline is not None:
                add("Deadline", (j, t), sol.tasks[t].end - job.deadline, f"job {j} deadline {job.deadline}")

    modes = [data.modes[entry.mode] for entry in sol.tasks]
    cons = data.constraints
    setup = cons.setup_lookup()

    # machines
    for r, res in enumerate(data.resources):
        users = [t for t, mode in enumerate(modes) if r in mode.resources]
        if res.kind == ResourceKind.MACHINE:
            for a, b in itertools.combinations(users, 2):
                ta, tb = sol.tasks[a], sol.tasks[b]
                add("MachineOverlap", (r, a, b), min(ta.end, tb.end) - max(ta.start, tb.start))
            consecutive = [(i, k) for i, k in cons.consecutive if i in users and k in users]
            seq = machine_sequence(sol, users, setup, r, consecutive)
            pos = {t: n for n, t in enumerate(seq)}
            for a, b in zip(seq, seq[1:]):
                ta, tb = sol.tasks[a], sol.tasks[b]
                if min(ta.end, tb.end) - max(ta.start, tb.start) > 0:
                    continue  # reported as an overlap
                need = setup.get((a, b, r), 0)
                if ta.end > tb.start:
                    add("MachineOverlap", (r, a, b), ta.end - tb.start, "zero-duration task inside another")
                else:
                    add("SetupTime", (r, a, b), ta.end + need - tb.start, f"setup {need} required")
            for i, k in consecutive:
                gap = pos[k] - pos[i] - 1
                add(
                    "Consecutive",
                    (r, i, k),
                    gap if gap > 0 else pos[i] - pos[k] + 1,
                    f"task {k} must directly follow task {i}",
                )
        elif res.kind == ResourceKind.RENEWABLE:
            usage = [(t, modes[t].demand(r)) for t in users if modes[t].demand(r) > 0]
            peak, at = 0, None
            for time in sorted({sol.tasks[t].start for t, _ in usage}):
                load = sum(q for t, q in usage if sol.tasks[t].start <= time < sol.tasks[t].end)
                if load > peak:
                    peak, at = load, time
            if peak > res.capacity:
                active = [t for t, _ in usage if sol.tasks[t].start <= at < sol.tasks[t].end]
                add("CapacityExceeded", (r, *active), peak - res.capacity, f"load {peak} at time {at}")
        else:
            total = sum(modes[t].demand(r) for t in users)
            add("CapacityExceeded", (r,), total - res.capacity, f"total demand {total}")

    # timing
    for kind, i, k, delay in cons.timing():
        left = sol.tasks[i].start if kind.value.startswith("start") else sol.tasks[i].end
        right = sol.tasks[k].start if kind.value.endswith("start") else sol.tasks[k].end
        add(_camel(kind.value), (i, k), left + delay - right)

    # assignment
    for i, k in cons.identical_resources:
        diff = set(modes[i].resources) ^ set(modes[k].resources)
        add("IdenticalResources", (i, k), len(diff))
    for i, k in cons.different_resources:
        shared = set(modes[i].resources) & set(modes[k].resources)
        add("DifferentResources", (i, k), len(shared))

    return out


def _camel(name: str) -> str:
    return "".join(part.capitalize() for part in name.split("_"))


def is_feasible(sol: Solution, data: ProblemData) -> bool:
    return not check(sol, data)


# objectives -----------------------------------------------------------------


def objective_terms(sol: Solution, data: ProblemData) -> dict[Objective, int]:
    """Value of every objective for ``sol``, with job weights applied but not objective weights."""
    spans = sol.job_spans(data)
    makespan = sol.makespan()
    flow = tardiness = earliness = tardy = 0
    max_tardiness = max_lateness = None
    for job, span in zip(data.jobs, spans):
        if span is None:
            continue
        end = span[1]
        w = job.weight
        flow += w * (end - job.release)
        if job.due_date is None:
            continue
        late = end - job.due_date
        tardiness += w * max(late, 0)
        earliness += w * max(-late, 0)
        tardy += w * (late > 0)
        max_tardiness = max(w * max(late, 0), max_tardiness if max_tardiness is not None else 0)
        max_lateness = w * late if max_lateness is None else max(max_lateness, w * late)
    return {
        Objective.MAKESPAN: makespan,
        Objective.TOTAL_FLOW_TIME: flow,
        Objective.TOTAL_TARDINESS: tardiness,
        Objective.TOTAL_EARLINESS: earliness,
        Objective.TARDY_JOBS: tardy,
        Objective.MAX_TARDINESS: max_tardiness or 0,
        Objective.MAX_LATENESS: max_lateness or 0,
    }


def evaluate(sol: Solution, data: ProblemData) -> int:
    """Weighted objective value of ``sol``; infeasible schedules are evaluated too."""
    terms = objective_terms(sol, data)
    return sum(w * terms[obj] for obj, w in data.objective.weights().items())


def evaluate_flagged(sol: Solution, data: ProblemData) -> tuple[int, bool]:
    """Objective value together with the feasibility of ``sol``."""
    return evaluate(sol, data), is_feasible(sol, data)
