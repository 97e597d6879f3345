"""
Readers and writers for benchmark instance files.

Supported formats:

``TaillardJsp``
    Header ``n_jobs n_machines``, then one line per job with
    ``machine duration`` pairs in processing order. Machines are 0-indexed.
``Fjsp``
    Brandimarte flexible job shop. Header ``n_jobs n_machines [avg]``, then one
    line per job: the number of operations, then per operation the number of
    alternatives followed by that many ``machine duration`` pairs. Machines are
    1-indexed in the file.
``PsplibSm`` / ``MmlibMm``
    PSPLIB project files. The ``PRECEDENCE RELATIONS`` section lists
    successors, ``REQUESTS/DURATIONS`` one row per mode (continuation rows omit
    the job number) and ``RESOURCEAVAILABILITIES`` the capacities. ``R``
    columns are renewable, ``N`` columns non-renewable. Activities become
    tasks outside any job; dummy activities are kept and the file horizon is
    ignored.
``NativeJson``
    The JSON serialisation of :class:`~cpsched.model.ProblemData`.
"""

from __future__ import annotations

import json
import re
from enum import Enum
from pathlib import Path

from .model import Model, ProblemData, ResourceKind, data_from_dict, dumps
from .solution import Solution, dumps_solution


class InstanceFormat(str, Enum):
    TAILLARD_JSP = "TaillardJsp"
    FJSP = "Fjsp"
    PSPLIB_SM = "PsplibSm"
    MMLIB_MM = "MmlibMm"
    NATIVE_JSON = "NativeJson"


FAMILY = {
    InstanceFormat.TAILLARD_JSP: "JSP",
    InstanceFormat.FJSP: "FJSP",
    InstanceFormat.PSPLIB_SM: "RCPSP",
    InstanceFormat.MMLIB_MM: "MMRCPSP",
    InstanceFormat.NATIVE_JSON: "native",
}

EXTENSIONS = {
    ".json": InstanceFormat.NATIVE_JSON,
    ".sm": InstanceFormat.PSPLIB_SM,
    ".mm": InstanceFormat.MMLIB_MM,
    ".fjs": InstanceFormat.FJSP,
    ".fjsp": InstanceFormat.FJSP,
    ".jsp": InstanceFormat.TAILLARD_JSP,
    ".tai": InstanceFormat.TAILLARD_JSP,
}


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _lines(text: str) -> list[tuple[int, list[str]]]:
    """Non-blank lines as (1-based line number, tokens)."""
    return [(n, line.split()) for n, line in enumerate(text.splitlines(), 1) if line.strip()]


def _ints(tokens: list[str], line: int) -> list[int]:
    try:
        return [int(tok) for tok in tokens]
    except ValueError:
        raise ParseError(f"expected integers, got {' '.join(tokens)!r}", line) from None


def detect_format(text: str, path: str | Path | None = None) -> InstanceFormat:
    """Format from the file extension, falling back to the content."""
    if path is not None:
        fmt = EXTENSIONS.get(Path(path).suffix.lower())
        if fmt is not None:
            return fmt
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return InstanceFormat.NATIVE_JSON
    if "PRECEDENCE RELATIONS" in text.upper():
        match = re.search(r"-\s*nonrenewable\s*:\s*(\d+)", text)
        multi = re.search(r"^\s*\d+\s+(\d+)\s", text.split("PRECEDENCE RELATIONS", 1)[-1], re.M)
        if (match and int(match.group(1)) > 0) or (multi and int(multi.group(1)) > 1):
            return InstanceFormat.MMLIB_MM
        return InstanceFormat.PSPLIB_SM
    rows = _lines(text)
    if not rows:
        raise ParseError("empty instance")
    header = rows[0][1]
    try:
        counts = [int(tok) for tok in header[:2]]
        if len(header) == 3:
            float(header[2])
    except ValueError:
        raise ParseError("unrecognised header", rows[0][0]) from None
    if len(header) == 3:
        return InstanceFormat.FJSP
    if len(header) == 2:
        n_machines = counts[1]
        if all(len(tokens) == 2 * n_machines for _, tokens in rows[1:]):
            return InstanceFormat.TAILLARD_JSP
        return InstanceFormat.FJSP
    raise ParseError("cannot detect the instance format", rows[0][0])


def parse(text: str | bytes, fmt: InstanceFormat | str | None = None, path: str | Path | None = None) -> ProblemData:
    if isinstance(text, bytes):
        text = text.decode()
    fmt = InstanceFormat(fmt) if fmt is not None else detect_format(text, path)
    if fmt == InstanceFormat.TAILLARD_JSP:
        return parse_taillard(text)
    if fmt == InstanceFormat.FJSP:
        return parse_fjsp(text)
    if fmt in (InstanceFormat.PSPLIB_SM, InstanceFormat.MMLIB_MM):
        return parse_psplib(text)
    try:
        return data_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def read(path: str | Path, fmt: InstanceFormat | str | None = None) -> ProblemData:
    path = Path(path)
    return parse(path.read_text(), fmt, path)


def read_with_format(path: str | Path, fmt: InstanceFormat | str | None = None) -> tuple[ProblemData, InstanceFormat]:
    path = Path(path)
    text = path.read_text()
    fmt = InstanceFormat(fmt) if fmt is not None else detect_format(text, path)
    return parse(text, fmt, path), fmt


def parse_taillard(text: str) -> ProblemData:
    rows = _lines(text)
    if not rows:
        raise ParseError("empty instance")
    line, header = rows[0]
    values = _ints(header, line)
    if len(values) != 2:
        raise ParseError("header must be 'n_jobs n_machines'", line)
    n_jobs, n_machines = values
    if len(rows) - 1 != n_jobs:
        raise ParseError(f"expected {n_jobs} job lines, found {len(rows) - 1}", rows[-1][0])

    model = Model()
    machines = [model.add_machine() for _ in range(n_machines)]
    for line, tokens in rows[1:]:
        values = _ints(tokens, line)
        if len(values) % 2:
            raise ParseError("job line must hold (machine, duration) pairs", line)
        job = model.add_job()
        prev = None
        for machine, duration in zip(values[::2], values[1::2]):
            if not 0 <= machine < n_machines:
                raise ParseError(f"machine {machine} out of range", line)
            if duration < 0:
                raise ParseError(f"negative duration {duration}", line)
            task = model.add_task(job=job)
            model.add_mode(task, machines[machine], duration)
            if prev is not None:
                model.add_end_before_start(prev, task)
            prev = task
    return model.data()


def parse_fjsp(text: str) -> ProblemData:
    rows = _lines(text)
    if not rows:
        raise ParseError("empty instance")
    line, header = rows[0]
    if len(header) not in (2, 3):
        raise ParseError("header must be 'n_jobs n_machines [avg]'", line)
    n_jobs, n_machines = _ints(header[:2], line)
    if len(rows) - 1 < n_jobs:
        raise ParseError(f"expected {n_jobs} job lines, found {len(rows) - 1}", rows[-1][0])

    model = Model()
    machines = [model.add_machine() for _ in range(n_machines)]
    for line, tokens in rows[1 : n_jobs + 1]:
        values = _ints(tokens, line)
        pos = 0

        def take() -> int:
            nonlocal pos
            if pos >= len(values):
                raise ParseError("job line ends early", line)
            pos += 1
            return values[pos - 1]

        job = model.add_job()
        prev = None
        for _ in range(take()):
            task = model.add_task(job=job)
            n_alt = take()
            if n_alt < 1:
                raise ParseError("operation without alternatives", line)
            for _ in range(n_alt):
                machine, duration = take(), take()
                if not 1 <= machine <= n_machines:
                    raise ParseError(f"machine {machine} out of range 1..{n_machines}", line)
                if duration < 0:
                    raise ParseError(f"negative duration {duration}", line)
                model.add_mode(task, machines[machine - 1], duration)
            if prev is not None:
                model.add_end_before_start(prev, task)
            prev = task
        if pos != len(values):
            raise ParseError(f"{len(values) - pos} trailing tokens", line)
    return model.data()


def _section(rows, title: str) -> int:
    for idx, (_, tokens) in enumerate(rows):
        if " ".join(tokens).upper().startswith(title):
            return idx
    raise ParseError(f"missing section {title!r}")


def _is_rule(tokens: list[str]) -> bool:
    return len(tokens) == 1 and set(tokens[0]) <= set("*-")


def parse_psplib(text: str) -> ProblemData:
    rows = _lines(text)

    # precedence relations
    start = _section(rows, "PRECEDENCE RELATIONS")
    successors: dict[int, list[int]] = {}
    n_modes: dict[int, int] = {}
    line_of: dict[int, int] = {}
    for line, tokens in rows[start + 2 :]:
        if _is_rule(tokens):
            break
        values = _ints(tokens, line)
        if len(values) < 3 or len(values) != 3 + values[2]:
            raise ParseError("precedence row must be 'job modes count successors...'", line)
        job = values[0]
        if job in successors:
            raise ParseError(f"duplicate activity {job}", line)
        successors[job] = values[3:]
        n_modes[job] = values[1]
        line_of[job] = line
    activities = sorted(successors)
    if activities != list(range(1, len(activities) + 1)):
        raise ParseError("activities must be numbered 1..n")
    n = len(activities)
    for job, succ in successors.items():
        for k in succ:
            if not 1 <= k <= n:
                raise ParseError(f"successor {k} of activity {job} does not exist", line_of[job])

    # durations and requests
    start = _section(rows, "REQUESTS/DURATIONS")
    line, head = rows[start + 1]
    columns = re.findall(r"([RND])\s*(\d+)", " ".join(head[3:]))
    if not columns:
        raise ParseError("no resource columns in requests header", line)
    modes: dict[int, list[tuple[int, list[int]]]] = {}
    current = None
    for line, tokens in rows[start + 2 :]:
        if _is_rule(tokens):
            if current is None:
                continue
            break
        values = _ints(tokens, line)
        if len(values) == 3 + len(columns):
            current = values[0]
            values = values[1:]
        elif len(values) != 2 + len(columns) or current is None:
            raise ParseError("malformed request row", line)
        if current not in successors:
            raise ParseError(f"requests for unknown activity {current}", line)
        _, duration, *demands = values
        if duration < 0:
            raise ParseError(f"negative duration {duration}", line)
        if any(q < 0 for q in demands):
            raise ParseError("negative demand", line)
        modes.setdefault(current, []).append((duration, demands))
    for job in activities:
        if len(modes.get(job, [])) != n_modes[job]:
            raise ParseError(f"activity {job} declares {n_modes[job]} modes, found {len(modes.get(job, []))}")

    # capacities
    start = _section(rows, "RESOURCEAVAILABILITIES")
    if start + 2 >= len(rows):
        raise ParseError("missing capacity row")
    line, tokens = rows[start + 2]
    caps = _ints(tokens, line)
    if len(caps) != len(columns):
        raise ParseError(f"expected {len(columns)} capacities, found {len(caps)}", line)

    model = Model()
    resources = []
    for (kind, number), cap in zip(columns, caps):
        if kind == "R":
            resources.append(model.add_renewable(cap, name=f"R{number}"))
        else:
            resources.append(model.add_non_renewable(cap, name=f"{kind}{number}"))
    tasks = [model.add_task(name=str(job)) for job in activities]
    for job in activities:
        for duration, demands in modes[job]:
            model.add_mode(tasks[job - 1], resources, duration, demands)
    for job in activities:
        for k in successors[job]:
            model.add_end_before_start(tasks[job - 1], tasks[k - 1])
    return model.data()


# writers --------------------------------------------------------------------


def write_instance(data: ProblemData) -> bytes:
    return dumps(data).encode()


def write_solution(sol: Solution, data: ProblemData | None = None) -> bytes:
    return dumps_solution(sol, data).encode()


def resource_counts(data: ProblemData) -> dict[ResourceKind, int]:
    return {kind: sum(res.kind == kind for res in data.resources) for kind in ResourceKind}
