"""
Problem data for the general scheduling model.

An instance consists of jobs, resources, tasks, modes and a set of
constraints between tasks. Every task selects exactly one of its modes; a mode
fixes the processing duration and the resources (with demands) that the task
occupies. Ids are dense zero-based integers per entity type.

Instances are built step by step with :class:`Model` and frozen into an
immutable :class:`ProblemData`. :func:`validate` reports structural problems
without raising.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping, Sequence

MAX_TIME = 2**31 - 1


class ResourceKind(str, Enum):
    MACHINE = "machine"
    RENEWABLE = "renewable"
    NON_RENEWABLE = "non_renewable"


class Objective(str, Enum):
    MAKESPAN = "makespan"
    TOTAL_FLOW_TIME = "total_flow_time"
    TOTAL_TARDINESS = "total_tardiness"
    TOTAL_EARLINESS = "total_earliness"
    TARDY_JOBS = "tardy_jobs"
    MAX_TARDINESS = "max_tardiness"
    MAX_LATENESS = "max_lateness"


DUE_DATE_OBJECTIVES = (
    Objective.TOTAL_TARDINESS,
    Objective.TOTAL_EARLINESS,
    Objective.TARDY_JOBS,
    Objective.MAX_TARDINESS,
    Objective.MAX_LATENESS,
)


class ConstraintKind(str, Enum):
    START_BEFORE_START = "start_before_start"
    START_BEFORE_END = "start_before_end"
    END_BEFORE_START = "end_before_start"
    END_BEFORE_END = "end_before_end"
    IDENTICAL_RESOURCES = "identical_resources"
    DIFFERENT_RESOURCES = "different_resources"
    CONSECUTIVE = "consecutive"
    SETUP_TIME = "setup_time"


TIMING_KINDS = (
    ConstraintKind.START_BEFORE_START,
    ConstraintKind.START_BEFORE_END,
    ConstraintKind.END_BEFORE_START,
    ConstraintKind.END_BEFORE_END,
)


@dataclass(frozen=True)
class Job:
    """
    A collection of tasks whose completion drives the job-based objectives.

    Attributes:
        tasks: Ids of the tasks belonging to this job.
        release: Earliest start of every task of the job.
        deadline: Hard bound on the end of every task of the job, or None.
        due_date: Soft due date used by the tardiness family, or None.
        weight: Priority weight of the job.
    """

    tasks: tuple[int, ...] = ()
    release: int = 0
    deadline: int | None = None
    due_date: int | None = None
    weight: int = 1
    name: str = ""


@dataclass(frozen=True)
class Resource:
    kind: ResourceKind
    capacity: int = 0
    name: str = ""


@dataclass(frozen=True)
class Task:
    """
    Smallest schedulable unit. Window bounds are optional and inclusive.
    """

    modes: tuple[int, ...] = ()
    earliest_start: int | None = None
    latest_start: int | None = None
    earliest_end: int | None = None
    latest_end: int | None = None
    name: str = ""


@dataclass(frozen=True)
class Mode:
    """
    One way of processing a task.

    Attributes:
        task: Id of the task this mode belongs to.
        duration: Processing duration.
        resources: Ids of the required resources.
        demands: Demand per non-machine resource in ``resources``.
    """

    task: int
    duration: int
    resources: tuple[int, ...] = ()
    demands: Mapping[int, int] = field(default_factory=dict)

    def demand(self, resource: int) -> int:
        return self.demands.get(resource, 0)


@dataclass(frozen=True)
class ConstraintSet:
    """
    Constraint tuples between tasks.

    Timing tuples are ``(i, k, delay)``; assignment and consecutive tuples are
    ``(i, k)``; setup tuples are ``(i, k, machine, duration)``.
    """

    start_before_start: tuple[tuple[int, int, int], ...] = ()
    start_before_end: tuple[tuple[int, int, int], ...] = ()
    end_before_start: tuple[tuple[int, int, int], ...] = ()
    end_before_end: tuple[tuple[int, int, int], ...] = ()
    identical_resources: tuple[tuple[int, int], ...] = ()
    different_resources: tuple[tuple[int, int], ...] = ()
    consecutive: tuple[tuple[int, int], ...] = ()
    setup_times: tuple[tuple[int, int, int, int], ...] = ()

    def timing(self) -> Iterable[tuple[ConstraintKind, int, int, int]]:
        for kind in TIMING_KINDS:
            for i, k, delay in getattr(self, kind.value):
                yield kind, i, k, delay

    def setup_lookup(self) -> dict[tuple[int, int, int], int]:
        """Maps ``(i, k, machine)`` to the setup duration; duplicates keep the max."""
        lookup: dict[tuple[int, int, int], int] = {}
        for i, k, r, dur in self.setup_times:
            lookup[i, k, r] = max(dur, lookup.get((i, k, r), dur))
        return lookup


@dataclass(frozen=True)
class ObjectiveSpec:
    """Integer weights of the objective functions; the total is minimised."""

    makespan: int = 0
    total_flow_time: int = 0
    total_tardiness: int = 0
    total_earliness: int = 0
    tardy_jobs: int = 0
    max_tardiness: int = 0
    max_lateness: int = 0

    def weight(self, objective: Objective) -> int:
        return getattr(self, objective.value)

    def weights(self) -> dict[Objective, int]:
        return {obj: self.weight(obj) for obj in Objective}

    def active(self) -> list[tuple[Objective, int]]:
        return [(obj, w) for obj, w in self.weights().items() if w != 0]


@dataclass(frozen=True)
class ProblemData:
    jobs: tuple[Job, ...]
    resources: tuple[Resource, ...]
    tasks: tuple[Task, ...]
    modes: tuple[Mode, ...]
    constraints: ConstraintSet = ConstraintSet()
    objective: ObjectiveSpec = ObjectiveSpec(makespan=1)
    horizon: int | None = None

    @property
    def num_jobs(self) -> int:
        return len(self.jobs)

    @property
    def num_tasks(self) -> int:
        return len(self.tasks)

    @property
    def num_modes(self) -> int:
        return len(self.modes)

    @property
    def num_resources(self) -> int:
        return len(self.resources)

    def machines(self) -> list[int]:
        return self._of_kind(ResourceKind.MACHINE)

    def renewables(self) -> list[int]:
        return self._of_kind(ResourceKind.RENEWABLE)

    def non_renewables(self) -> list[int]:
        return self._of_kind(ResourceKind.NON_RENEWABLE)

    def _of_kind(self, kind: ResourceKind) -> list[int]:
        return [r for r, res in enumerate(self.resources) if res.kind == kind]

    def task_job(self) -> list[int | None]:
        """Job id of every task, or None for tasks outside any job."""
        owner: list[int | None] = [None] * len(self.tasks)
        for j, job in enumerate(self.jobs):
            for t in job.tasks:
                if 0 <= t < len(owner):
                    owner[t] = j
        return owner

    def modes_using(self, resource: int) -> list[int]:
        return [m for m, mode in enumerate(self.modes) if resource in mode.resources]

    def overlapping_machines(self, i: int, k: int) -> list[int]:
        """Machines used by some mode of task ``i`` and some mode of task ``k``."""
        machines = set(self.machines())
        left = {r for m in self.tasks[i].modes for r in self.modes[m].resources}
        right = {r for m in self.tasks[k].modes for r in self.modes[m].resources}
        return sorted(left & right & machines)

    def replace(self, **changes: Any) -> ProblemData:
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        values.update(changes)
        return ProblemData(**values)

    def to_dict(self) -> dict[str, Any]:
        return data_to_dict(self)

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> ProblemData:
        return data_from_dict(payload)


class Model:
    """
    Step-by-step builder for :class:`ProblemData`.

    Every ``add_*`` method returns the dense id of the new entity. References
    to entities that do not exist yet raise ``ValueError``.

    >>> model = Model()
    >>> machines = [model.add_machine() for _ in range(2)]
    >>> job = model.add_job()
    >>> first, second = model.add_task(job=job), model.add_task(job=job)
    >>> _ = model.add_mode(first, machines[0], duration=3)
    >>> _ = model.add_mode(second, machines[1], duration=2)
    >>> _ = model.add_end_before_start(first, second)
    >>> model.data().num_tasks
    2
    """

    def __init__(self) -> None:
        self._jobs: list[dict[str, Any]] = []
        self._resources: list[Resource] = []
        self._tasks: list[dict[str, Any]] = []
        self._modes: list[Mode] = []
        self._constraints: dict[ConstraintKind, list[tuple]] = {
            kind: [] for kind in ConstraintKind
        }
        self._objective = ObjectiveSpec(makespan=1)
        self._horizon: int | None = None

    # entities

    def add_job(
        self,
        weight: int = 1,
        release: int = 0,
        deadline: int | None = None,
        due_date: int | None = None,
        name: str = "",
    ) -> int:
        self._jobs.append(
            dict(
                tasks=[],
                release=release,
                deadline=deadline,
                due_date=due_date,
                weight=weight,
                name=name,
            )
        )
        return len(self._jobs) - 1

    def add_resource(self, kind: ResourceKind | str, capacity: int = 0, name: str = "") -> int:
        self._resources.append(Resource(ResourceKind(kind), capacity, name))
        return len(self._resources) - 1

    def add_machine(self, name: str = "") -> int:
        return self.add_resource(ResourceKind.MACHINE, 0, name)

    def add_renewable(self, capacity: int, name: str = "") -> int:
        return self.add_resource(ResourceKind.RENEWABLE, capacity, name)

    def add_non_renewable(self, capacity: int, name: str = "") -> int:
        return self.add_resource(ResourceKind.NON_RENEWABLE, capacity, name)

    def add_task(
        self,
        job: int | None = None,
        earliest_start: int | None = None,
        latest_start: int | None = None,
        earliest_end: int | None = None,
        latest_end: int | None = None,
        name: str = "",
    ) -> int:
        if job is not None:
            self._check_ref("job", job, len(self._jobs))
        task = len(self._tasks)
        self._tasks.append(
            dict(
                modes=[],
                earliest_start=earliest_start,
                latest_start=latest_start,
                earliest_end=earliest_end,
                latest_end=latest_end,
                name=name,
            )
        )
        if job is not None:
            self._jobs[job]["tasks"].append(task)
        return task

    def add_mode(
        self,
        task: int,
        resources: int | Sequence[int],
        duration: int,
        demands: int | Sequence[int] | Mapping[int, int] | None = None,
    ) -> int:
        """
        Add a processing mode to ``task``.

        ``demands`` may be a mapping from resource id, a sequence aligned with
        ``resources`` or a single integer shared by all of them. Demands on
        machines are dropped.
        """
        self._check_ref("task", task, len(self._tasks))
        res = (resources,) if isinstance(resources, int) else tuple(resources)
        for r in res:
            self._check_ref("resource", r, len(self._resources))
        if len(set(res)) != len(res):
            raise ValueError(f"duplicate resources in mode: {res}")

        if demands is None:
            raw = {r: 0 for r in res}
        elif isinstance(demands, int):
            raw = {r: demands for r in res}
        elif isinstance(demands, Mapping):
            raw = dict(demands)
            missing = set(raw) - set(res)
            if missing:
                raise ValueError(f"demands given for resources not in mode: {sorted(missing)}")
        else:
            if len(demands) != len(res):
                raise ValueError("demands must align with resources")
            raw = dict(zip(res, demands))

        kinds = [res_.kind for res_ in self._resources]
        mode_demands = {
            r: raw.get(r, 0) for r in res if kinds[r] != ResourceKind.MACHINE
        }
        self._modes.append(Mode(task, duration, res, mode_demands))
        self._tasks[task]["modes"].append(len(self._modes) - 1)
        return len(self._modes) - 1

    # constraints

    def add_constraint(self, kind: ConstraintKind | str, *args: int) -> int:
        """Add a constraint tuple; returns its index within its kind."""
        kind = ConstraintKind(kind)
        n_tasks = len(self._tasks)
        if kind in TIMING_KINDS:
            i, k, *rest = args
            if len(rest) > 1:
                raise ValueError(f"{kind.value} takes (i, k[, delay])")
            entry: tuple = (i, k, rest[0] if rest else 0)
        elif kind == ConstraintKind.SETUP_TIME:
            if len(args) != 4:
                raise ValueError("setup_time takes (i, k, machine, duration)")
            entry = tuple(args)
            self._check_ref("resource", args[2], len(self._resources))
        else:
            if len(args) != 2:
                raise ValueError(f"{kind.value} takes (i, k)")
            entry = tuple(args)

        for t in entry[:2]:
            self._check_ref("task", t, n_tasks)

        bucket = self._constraints[kind]
        if kind not in TIMING_KINDS and entry in bucket:
            return bucket.index(entry)
        bucket.append(entry)
        return len(bucket) - 1

    def add_start_before_start(self, i: int, k: int, delay: int = 0) -> int:
        return self.add_constraint(ConstraintKind.START_BEFORE_START, i, k, delay)

    def add_start_before_end(self, i: int, k: int, delay: int = 0) -> int:
        return self.add_constraint(ConstraintKind.START_BEFORE_END, i, k, delay)

    def add_end_before_start(self, i: int, k: int, delay: int = 0) -> int:
        return self.add_constraint(ConstraintKind.END_BEFORE_START, i, k, delay)

    def add_end_before_end(self, i: int, k: int, delay: int = 0) -> int:
        return self.add_constraint(ConstraintKind.END_BEFORE_END, i, k, delay)

    def add_identical_resources(self, i: int, k: int) -> int:
        return self.add_constraint(ConstraintKind.IDENTICAL_RESOURCES, i, k)

    def add_different_resources(self, i: int, k: int) -> int:
        return self.add_constraint(ConstraintKind.DIFFERENT_RESOURCES, i, k)

    def add_consecutive(self, i: int, k: int) -> int:
        return self.add_constraint(ConstraintKind.CONSECUTIVE, i, k)

    def add_setup_time(self, i: int, k: int, machine: int, duration: int) -> int:
        return self.add_constraint(ConstraintKind.SETUP_TIME, i, k, machine, duration)

    def set_objective(self, **weights: int) -> ObjectiveSpec:
        """Replace the objective weights, e.g. ``set_objective(makespan=1)``."""
        unknown = set(weights) - {obj.value for obj in Objective}
        if unknown:
            raise ValueError(f"unknown objectives: {sorted(unknown)}")
        self._objective = ObjectiveSpec(**weights)
        return self._objective

    def set_horizon(self, horizon: int | None) -> None:
        self._horizon = horizon

    def data(self) -> ProblemData:
        c = self._constraints
        return ProblemData(
            jobs=tuple(
                Job(**{**job, "tasks": tuple(job["tasks"])}) for job in self._jobs
            ),
            resources=tuple(self._resources),
            tasks=tuple(
                Task(**{**task, "modes": tuple(task["modes"])}) for task in self._tasks
            ),
            modes=tuple(self._modes),
            constraints=ConstraintSet(
                **{kind.value: tuple(c[kind]) for kind in ConstraintKind if kind != ConstraintKind.SETUP_TIME},
                setup_times=tuple(c[ConstraintKind.SETUP_TIME]),
            ),
            objective=self._objective,
            horizon=self._horizon,
        )

    # convenience for code written against the builder

    def solve(self, **params: Any):
        from .solve import solve

        return solve(self.data(), **params)

    @staticmethod
    def _check_ref(what: str, idx: int, size: int) -> None:
        if not isinstance(idx, int) or not 0 <= idx < size:
            raise ValueError(f"unknown {what} id {idx}")


# validation -----------------------------------------------------------------


@dataclass(frozen=True)
class Issue:
    severity: str  # "error" or "warning"
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.location}: {self.message}"


@dataclass
class ValidationReport:
    issues: list[Issue] = field(default_factory=list)

    @property
    def errors(self) -> list[Issue]:
        return [issue for issue in self.issues if issue.severity == "error"]

    @property
    def warnings(self) -> list[Issue]:
        return [issue for issue in self.issues if issue.severity == "warning"]

    @property
    def ok(self) -> bool:
        """True when there are no errors; warnings do not block solving."""
        return not self.errors

    def __len__(self) -> int:
        return len(self.issues)

    def __iter__(self):
        return iter(self.issues)


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def validate(data: ProblemData) -> ValidationReport:
    """
    Check every structural invariant of ``data``.

    Problems are collected as :class:`Issue` entries rather than raised. A mode
    whose demand exceeds the capacity of a resource can never be selected; this
    is an error when no mode of its task remains selectable and a warning
    otherwise.
    """
    issues: list[Issue] = []

    def error(location: str, message: str) -> None:
        issues.append(Issue("error", location, message))

    def warning(location: str, message: str) -> None:
        issues.append(Issue("warning", location, message))

    n_tasks, n_modes, n_res = len(data.tasks), len(data.modes), len(data.resources)
    objective = data.objective

    # objective
    weights = objective.weights()
    if any(not _is_int(w) or w < 0 for w in weights.values()):
        error("objective", "weights must be non-negative integers")
    if not any(w > 0 for w in weights.values() if _is_int(w)):
        error("objective", "at least one objective weight must be positive")
    needs_due = any(objective.weight(obj) > 0 for obj in DUE_DATE_OBJECTIVES)

    # resources
    for r, res in enumerate(data.resources):
        if not isinstance(res.kind, ResourceKind):
            error(f"resource {r}", f"unknown kind {res.kind!r}")
        if not _is_int(res.capacity) or res.capacity < 0:
            error(f"resource {r}", "capacity must be a non-negative integer")

    # jobs
    owner: dict[int, int] = {}
    for j, job in enumerate(data.jobs):
        loc = f"job {j}"
        if not job.tasks:
            error(loc, "job has no tasks")
        for t in job.tasks:
            if not 0 <= t < n_tasks:
                error(loc, f"unknown task id {t}")
            elif t in owner:
                error(loc, f"task {t} already belongs to job {owner[t]}")
            else:
                owner[t] = j
        if not _is_int(job.release) or job.release < 0:
            error(loc, "release must be a non-negative integer")
        if job.deadline is not None:
            if not _is_int(job.deadline) or job.deadline < 0:
                error(loc, "deadline must be a non-negative integer")
            elif _is_int(job.release) and job.release > job.deadline:
                error(loc, f"release {job.release} exceeds deadline {job.deadline}")
        if job.due_date is not None and (not _is_int(job.due_date) or job.due_date < 0):
            error(loc, "due date must be a non-negative integer")
        if not _is_int(job.weight) or job.weight < 0:
            error(loc, "weight must be a non-negative integer")
        if needs_due and job.due_date is None:
            error(loc, "due date required by a nonzero due-date objective weight")
        if (
            job.deadline is not None
            and job.due_date is not None
            and _is_int(job.deadline)
            and _is_int(job.due_date)
            and job.due_date > job.deadline
        ):
            warning(loc, f"due date {job.due_date} lies after deadline {job.deadline}")

    # tasks and modes
    mode_owner: dict[int, int] = {}
    for t, task in enumerate(data.tasks):
        loc = f"task {t}"
        if not task.modes:
            error(loc, "task has no modes")
        for m in task.modes:
            if not 0 <= m < n_modes:
                error(loc, f"unknown mode id {m}")
            elif m in mode_owner:
                error(loc, f"mode {m} already belongs to task {mode_owner[m]}")
            else:
                mode_owner[m] = t
        for lo_name, hi_name in (("earliest_start", "latest_start"), ("earliest_end", "latest_end")):
            lo, hi = getattr(task, lo_name), getattr(task, hi_name)
            for name, value in ((lo_name, lo), (hi_name, hi)):
                if value is not None and (not _is_int(value) or value < 0):
                    error(loc, f"{name} must be a non-negative integer")
            if lo is not None and hi is not None and _is_int(lo) and _is_int(hi) and lo > hi:
                error(loc, f"{lo_name} {lo} exceeds {hi_name} {hi}")

    selectable = [True] * n_modes
    for m, mode in enumerate(data.modes):
        loc = f"mode {m}"
        if not 0 <= mode.task < n_tasks:
            error(loc, f"unknown task id {mode.task}")
        elif m not in data.tasks[mode.task].modes:
            error(loc, f"mode is not listed by task {mode.task}")
        if not _is_int(mode.duration) or mode.duration < 0:
            error(loc, "duration must be a non-negative integer")
        if len(set(mode.resources)) != len(mode.resources):
            error(loc, "duplicate resources")
        expected = set()
        for r in mode.resources:
            if not 0 <= r < n_res:
                error(loc, f"unknown resource id {r}")
                continue
            if data.resources[r].kind != ResourceKind.MACHINE:
                expected.add(r)
        if set(mode.demands) != expected:
            error(loc, "demands must cover exactly the non-machine resources of the mode")
        for r, q in mode.demands.items():
            if not _is_int(q) or q < 0:
                error(loc, f"demand on resource {r} must be a non-negative integer")
            elif 0 <= r < n_res and q > data.resources[r].capacity:
                selectable[m] = False

    for t, task in enumerate(data.tasks):
        modes = [m for m in task.modes if 0 <= m < n_modes]
        bad = [m for m in modes if not selectable[m]]
        for m in bad:
            msg = f"mode {m} never selectable: demand exceeds resource capacity"
            if len(bad) == len(modes):
                error(f"task {t}", msg)
            else:
                warning(f"task {t}", msg)

    # constraints
    cons = data.constraints

    def check_task(loc: str, *tasks: int) -> bool:
        ok = True
        for t in tasks:
            if not _is_int(t) or not 0 <= t < n_tasks:
                error(loc, f"unknown task id {t}")
                ok = False
        return ok

    for kind, i, k, delay in cons.timing():
        loc = f"{kind.value} ({i}, {k})"
        check_task(loc, i, k)
        if not _is_int(delay):
            error(loc, "delay must be an integer")

    for name in ("identical_resources", "different_resources", "consecutive"):
        for i, k in getattr(cons, name):
            loc = f"{name} ({i}, {k})"
            if check_task(loc, i, k) and i == k:
                error(loc, "constraint between a task and itself")

    for i, k, r, dur in cons.setup_times:
        loc = f"setup_time ({i}, {k}, {r})"
        check_task(loc, i, k)
        if not _is_int(r) or not 0 <= r < n_res:
            error(loc, f"unknown resource id {r}")
        elif data.resources[r].kind != ResourceKind.MACHINE:
            error(loc, f"setup times require a machine, resource {r} is {data.resources[r].kind.value}")
        if not _is_int(dur) or dur < 0:
            error(loc, "setup duration must be a non-negative integer")

    if data.horizon is not None and (not _is_int(data.horizon) or data.horizon < 0):
        error("horizon", "horizon must be a non-negative integer")

    return ValidationReport(issues)


def default_horizon(data: ProblemData) -> int:
    """
    Upper bound on the end of a serial schedule.

    Sum of the longest mode duration of every task, every positive timing
    delay and every setup time, offset by the largest lower bound of any task
    window or job release.

    Raises ``OverflowError`` when the bound does not fit the engine's time type.
    """
    total = 0
    for task in data.tasks:
        total += max((data.modes[m].duration for m in task.modes), default=0)
    for _, _, _, delay in data.constraints.timing():
        total += max(delay, 0)
    for *_, dur in data.constraints.setup_times:
        total += max(dur, 0)

    offset = max((job.release for job in data.jobs), default=0)
    for task in data.tasks:
        for bound in (task.earliest_start, task.earliest_end):
            if bound is not None:
                offset = max(offset, bound)

    horizon = total + offset
    if horizon > MAX_TIME:
        raise OverflowError(f"horizon {horizon} exceeds the time type limit {MAX_TIME}")
    return horizon


# serialisation --------------------------------------------------------------


def data_to_dict(data: ProblemData) -> dict[str, Any]:
    cons = data.constraints
    return {
        "jobs": [
            {
                "tasks": list(job.tasks),
                "release": job.release,
                "deadline": job.deadline,
                "due_date": job.due_date,
                "weight": job.weight,
                "name": job.name,
            }
            for job in data.jobs
        ],
        "resources": [
            {"kind": res.kind.value, "capacity": res.capacity, "name": res.name}
            for res in data.resources
        ],
        "tasks": [
            {
                "modes": list(task.modes),
                "earliest_start": task.earliest_start,
                "latest_start": task.latest_start,
                "earliest_end": task.earliest_end,
                "latest_end": task.latest_end,
                "name": task.name,
            }
            for task in data.tasks
        ],
        "modes": [
            {
                "task": mode.task,
                "duration": mode.duration,
                "resources": list(mode.resources),
                "demands": {str(r): q for r, q in sorted(mode.demands.items())},
            }
            for mode in data.modes
        ],
        "constraints": {
            kind.value: [list(entry) for entry in getattr(cons, _field(kind))]
            for kind in ConstraintKind
        },
        "objective": {obj.value: w for obj, w in data.objective.weights().items()},
        "horizon": data.horizon,
    }


def _field(kind: ConstraintKind) -> str:
    return "setup_times" if kind == ConstraintKind.SETUP_TIME else kind.value


def _int(value: Any, where: str, optional: bool = False) -> int | None:
    if value is None and optional:
        return None
    if not _is_int(value):
        raise ValueError(f"{where}: expected an integer, got {value!r}")
    return value


def data_from_dict(payload: Mapping[str, Any]) -> ProblemData:
    """Inverse of :func:`data_to_dict`. Non-integer times are rejected."""
    try:
        jobs = tuple(
            Job(
                tasks=tuple(_int(t, f"job {j} tasks") for t in job.get("tasks", [])),
                release=_int(job.get("release", 0), f"job {j} release"),
                deadline=_int(job.get("deadline"), f"job {j} deadline", True),
                due_date=_int(job.get("due_date"), f"job {j} due_date", True),
                weight=_int(job.get("weight", 1), f"job {j} weight"),
                name=str(job.get("name", "")),
            )
            for j, job in enumerate(payload.get("jobs", []))
        )
        resources = tuple(
            Resource(
                ResourceKind(res["kind"]),
                _int(res.get("capacity", 0), f"resource {r} capacity"),
                str(res.get("name", "")),
            )
            for r, res in enumerate(payload.get("resources", []))
        )
        tasks = tuple(
            Task(
                modes=tuple(_int(m, f"task {t} modes") for m in task.get("modes", [])),
                **{
                    key: _int(task.get(key), f"task {t} {key}", True)
                    for key in ("earliest_start", "latest_start", "earliest_end", "latest_end")
                },
                name=str(task.get("name", "")),
            )
            for t, task in enumerate(payload.get("tasks", []))
        )
        modes = tuple(
            Mode(
                task=_int(mode["task"], f"mode {m} task"),
                duration=_int(mode["duration"], f"mode {m} duration"),
                resources=tuple(_int(r, f"mode {m} resources") for r in mode.get("resources", [])),
                demands={
                    int(r): _int(q, f"mode {m} demand") for r, q in mode.get("demands", {}).items()
                },
            )
            for m, mode in enumerate(payload.get("modes", []))
        )
        raw = payload.get("constraints", {})
        constraints = ConstraintSet(
            **{
                _field(kind): tuple(
                    tuple(_int(x, kind.value) for x in entry) for entry in raw.get(kind.value, [])
                )
                for kind in ConstraintKind
            }
        )
        objective = ObjectiveSpec(
            **{
                key: _int(value, f"objective {key}")
                for key, value in payload.get("objective", {"makespan": 1}).items()
            }
        )
        horizon = _int(payload.get("horizon"), "horizon", True)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed instance: {exc}") from exc

    return ProblemData(jobs, resources, tasks, modes, constraints, objective, horizon)


def dumps(data: ProblemData) -> str:
    return json.dumps(data_to_dict(data), indent=2) + "\n"


def loads(text: str) -> ProblemData:
    return data_from_dict(json.loads(text))
