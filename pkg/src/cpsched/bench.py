"""
Benchmark metrics and a batch harness.

Metrics are exact fractions, rendered with two decimals:

>>> format_percent(gap(110, 100))
'9.09'
>>> format_percent(rpd(99, 100))
'-1.00'
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .engine import Status
from .formats import FAMILY, read_with_format
from .model import validate
from .solve import solve

CSV_COLUMNS = ("instance", "family", "status", "ub", "lb", "bks", "gap", "rpd", "runtime_ms", "nodes")
AGGREGATE_COLUMNS = ("family", "instances", "solved", "excluded", "mean_gap", "rpd_count", "mean_rpd")
BKS_ENV = "CPSCHED_BKS_DIR"
ERROR = "Error"


def _relative(value: int, reference: int) -> Fraction:
    # zero reference: 0 when the numerator vanishes, else 100
    if reference == 0:
        return Fraction(0) if value == reference else Fraction(100)
    return Fraction(value - reference, reference) * 100


def gap(ub: int, lb: int) -> Fraction:
    """Optimality gap (ub - lb) / ub in percent."""
    if ub < lb:
        raise ValueError(f"upper bound {ub} below lower bound {lb}")
    if ub == 0:
        return Fraction(0) if lb == 0 else Fraction(100)
    return Fraction(ub - lb, ub) * 100


def rpd(ub: int, bks: int) -> Fraction:
    """Relative percentage deviation (ub - bks) / bks; negative for a new best."""
    return _relative(ub, bks)


def format_percent(value: Fraction | None) -> str:
    if value is None:
        return ""
    exact = Decimal(value.numerator) / Decimal(value.denominator)
    return str(exact.quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN))


@dataclass
class BenchRecord:
    instance: str
    family: str
    status: str
    ub: int | None = None
    lb: int | None = None
    bks: int | None = None
    runtime_ms: int = 0
    nodes: int = 0
    error: str = ""

    @property
    def solved(self) -> bool:
        return self.status in (Status.OPTIMAL.value, Status.FEASIBLE.value)

    @property
    def gap(self) -> Fraction | None:
        if not self.solved:
            return None
        # a feasible run always has a bound; a missing one counts as 0
        return gap(self.ub, self.lb if self.lb is not None else 0)

    @property
    def rpd(self) -> Fraction | None:
        if not self.solved or self.bks is None:
            return None
        return rpd(self.ub, self.bks)

    def row(self) -> list[str]:
        def cell(value):
            return "" if value is None else str(value)

        return [
            self.instance,
            self.family,
            self.status,
            cell(self.ub),
            cell(self.lb),
            cell(self.bks),
            format_percent(self.gap),
            format_percent(self.rpd),
            str(self.runtime_ms),
            str(self.nodes),
        ]


@dataclass
class FamilySummary:
    family: str
    instances: int = 0
    solved: int = 0
    excluded: int = 0
    gaps: list[Fraction] = field(default_factory=list)
    rpds: list[Fraction] = field(default_factory=list)

    @property
    def mean_gap(self) -> Fraction | None:
        return sum(self.gaps, Fraction(0)) / len(self.gaps) if self.gaps else None

    @property
    def mean_rpd(self) -> Fraction | None:
        return sum(self.rpds, Fraction(0)) / len(self.rpds) if self.rpds else None

    def row(self) -> list[str]:
        return [
            self.family,
            str(self.instances),
            str(self.solved),
            str(self.excluded),
            format_percent(self.mean_gap),
            str(len(self.rpds)),
            format_percent(self.mean_rpd),
        ]


def aggregate(records: Iterable[BenchRecord]) -> dict[str, FamilySummary]:
    """
    Mean gap and RPD per family over the feasibly solved instances. Unsolved
    instances are counted in ``excluded``; solved ones without a BKS only
    drop out of the RPD mean.
    """
    out: dict[str, FamilySummary] = {}
    for rec in records:
        summary = out.setdefault(rec.family, FamilySummary(rec.family))
        summary.instances += 1
        if not rec.solved:
            summary.excluded += 1
            continue
        summary.solved += 1
        summary.gaps.append(rec.gap)
        if rec.rpd is not None:
            summary.rpds.append(rec.rpd)
    return dict(sorted(out.items()))


# BKS tables -------------------------------------------------------------------


def parse_bks(text: str) -> dict[str, int]:
    """Two whitespace-separated columns per line: instance id and value."""
    table = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ValueError(f"BKS line {n}: expected 'instance value'")
        try:
            table[parts[0]] = int(parts[1])
        except ValueError:
            raise ValueError(f"BKS line {n}: value {parts[1]!r} is not an integer") from None
    return table


def load_bks(path: str | Path | None = None) -> dict[str, int]:
    """
    Read one BKS file, or every ``*.txt`` file of a directory. Without a
    path the directory named by ``CPSCHED_BKS_DIR`` is used, if set.
    """
    if path is None:
        path = os.environ.get(BKS_ENV)
        if not path:
            return {}
    path = Path(path)
    files = sorted(path.glob("*.txt")) if path.is_dir() else [path]
    table: dict[str, int] = {}
    for file in files:
        table.update(parse_bks(file.read_text()))
    return table


# batch ------------------------------------------------------------------------


@dataclass(frozen=True)
class BatchParams:
    time_limit: float = 10.0
    seed: int = 0
    formulation: str = "standard"
    jobs: int = 1
    replicates: int = 1


def instance_id(path: str | Path) -> str:
    return Path(path).stem


def _run_one(path: str, seed: int, replicates: int, params: BatchParams, bks: dict[str, int]) -> BenchRecord:
    name = instance_id(path)
    ident = f"{name}@{seed}" if replicates > 1 else name
    family = ""
    try:
        data, fmt = read_with_format(path)
        family = FAMILY[fmt]
        report = validate(data)
        if not report.ok:
            raise ValueError(str(report.errors[0]))
        result = solve(data, time_limit=params.time_limit, seed=seed, formulation=params.formulation)
    except Exception as exc:  # recorded, never aborts the batch
        return BenchRecord(ident, family, ERROR, bks=bks.get(name), error=f"{type(exc).__name__}: {exc}")
    return BenchRecord(
        instance=ident,
        family=family,
        status=result.status.value,
        ub=result.objective,
        lb=result.lower_bound,
        bks=bks.get(name),
        runtime_ms=round(result.runtime * 1000),
        nodes=result.statistics["nodes"],
    )


def run_batch(
    paths: Sequence[str | Path],
    params: BatchParams = BatchParams(),
    bks: dict[str, int] | None = None,
) -> list[BenchRecord]:
    """Solve every instance and return the records sorted by instance id."""
    bks = bks or {}
    tasks = [
        (str(p), params.seed + rep, params.replicates, params, bks)
        for p in paths
        for rep in range(params.replicates)
    ]
    if params.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=params.jobs) as pool:
            records = list(pool.map(_run_one, *zip(*tasks)))
    else:
        records = [_run_one(*task) for task in tasks]
    return sorted(records, key=lambda rec: rec.instance)


def to_csv(records: Iterable[BenchRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


def aggregate_csv(summaries: dict[str, FamilySummary]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(AGGREGATE_COLUMNS)
    for summary in summaries.values():
        writer.writerow(summary.row())
    return buf.getvalue()


def records_from_csv(text: str) -> list[BenchRecord]:
    """Inverse of :func:`to_csv`; gap and rpd are recomputed from the bounds."""
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")

    def num(value: str) -> int | None:
        return int(value) if value != "" else None

    return [
        BenchRecord(
            instance=row["instance"],
            family=row["family"],
            status=row["status"],
            ub=num(row["ub"]),
            lb=num(row["lb"]),
            bks=num(row["bks"]),
            runtime_ms=int(row["runtime_ms"]),
            nodes=int(row["nodes"]),
        )
        for row in reader
    ]
