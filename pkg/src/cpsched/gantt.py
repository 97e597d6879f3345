"""Gantt charts as standalone SVG documents."""

from __future__ import annotations

from xml.sax.saxutils import escape

from .model import ProblemData, ResourceKind
from .solution import Solution, check

PALETTE = (
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
)
NO_JOB = "#cccccc"

LANE = 18  # pixel height of one bar lane
LABEL_WIDTH = 80
MARGIN = 20
WIDTH = 800


def job_color(job: int | None) -> str:
    if job is None:
        return NO_JOB
    return PALETTE[job % len(PALETTE)]


def _lanes(bars: list[tuple[int, int, int]]) -> list[int]:
    """Greedy lane per bar so that bars in one lane never overlap."""
    lanes: list[int] = []
    lane_end: list[int] = []
    for start, end, _ in bars:
        for idx, busy_until in enumerate(lane_end):
            if busy_until <= start:
                lane_end[idx] = end
                lanes.append(idx)
                break
        else:
            lane_end.append(end)
            lanes.append(len(lane_end) - 1)
    return lanes


def gantt_svg(sol: Solution, data: ProblemData) -> str:
    """
    One row per machine and renewable resource and one bar per task on each
    resource its mode uses, coloured by job. Tasks that overlap on a
    renewable resource are stacked in separate lanes.
    """
    owner = data.task_job()
    rows = [r for r, res in enumerate(data.resources) if res.kind != ResourceKind.NON_RENEWABLE]
    per_row: dict[int, list[tuple[int, int, int]]] = {r: [] for r in rows}
    for t, item in enumerate(sol.tasks):
        for r in data.modes[item.mode].resources:
            if r in per_row:
                per_row[r].append((item.start, item.end, t))
    horizon = max([item.end for item in sol.tasks] + [1])
    scale = (WIDTH - LABEL_WIDTH - 2 * MARGIN) / horizon

    def x(time: int) -> float:
        return round(MARGIN + LABEL_WIDTH + time * scale, 2)

    body: list[str] = []
    y = MARGIN
    for r in rows:
        bars = sorted(per_row[r])
        lanes = _lanes(bars)
        height = LANE * max([lane + 1 for lane in lanes] + [1])
        name = data.resources[r].name or f"{data.resources[r].kind.value} {r}"
        body.append(f'<g class="row" data-resource="{r}">')
        body.append(f'<text x="{MARGIN}" y="{y + LANE * 0.7}" font-size="12">{escape(name)}</text>')
        body.append(
            f'<line x1="{x(0)}" y1="{y + height}" x2="{x(horizon)}" y2="{y + height}" stroke="#999"/>'
        )
        for (start, end, t), lane in zip(bars, lanes):
            top = y + lane * LANE + 2
            body.append(
                f'<rect class="bar" data-task="{t}" x="{x(start)}" y="{top}" '
                f'width="{round(max(end - start, 0) * scale, 2)}" height="{LANE - 4}" '
                f'fill="{job_color(owner[t])}" stroke="#333"><title>task {t} [{start}, {end})</title></rect>'
            )
        body.append("</g>")
        y += height + 6

    axis_y = y + 4
    body.append(f'<g class="axis"><line x1="{x(0)}" y1="{axis_y}" x2="{x(horizon)}" y2="{axis_y}" stroke="#000"/>')
    step = max(1, horizon // 10)
    for tick in range(0, horizon + 1, step):
        body.append(f'<line x1="{x(tick)}" y1="{axis_y}" x2="{x(tick)}" y2="{axis_y + 4}" stroke="#000"/>')
        body.append(f'<text x="{x(tick)}" y="{axis_y + 16}" font-size="10" text-anchor="middle">{tick}</text>')
    body.append("</g>")

    total_height = axis_y + 20 + MARGIN
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{total_height}" '
        f'viewBox="0 0 {WIDTH} {total_height}">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def write_gantt(sol: Solution, data: ProblemData) -> bytes:
    """SVG bytes for a feasible ``sol``; raises ``ValueError`` otherwise."""
    violations = check(sol, data)
    if violations:
        raise ValueError(f"cannot draw an infeasible schedule: {violations[0]}")
    return gantt_svg(sol, data).encode()
