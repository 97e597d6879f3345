"""
Command-line interface.

Exit codes: 0 on success (Optimal or Feasible for ``solve``), 1 on usage,
parse or validation errors, 2 when the instance is infeasible, 3 when the
solver stops without a solution or a proof, and 4 when ``check`` finds
violations.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench
from .engine import Status
from .formats import InstanceFormat, detect_format, parse, write_instance, write_solution
from .formulation import FORMULATIONS
from .gantt import write_gantt
from .model import Objective, ObjectiveSpec, ProblemData, validate
from .solution import check, loads_solution
from .solve import solve

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE, EXIT_UNKNOWN, EXIT_VIOLATIONS = 0, 1, 2, 3, 4
STATUS_EXIT = {
    Status.OPTIMAL: EXIT_OK,
    Status.FEASIBLE: EXIT_OK,
    Status.INFEASIBLE: EXIT_INFEASIBLE,
    Status.UNKNOWN: EXIT_UNKNOWN,
}


class CliError(Exception):
    pass


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _objective_term(text: str) -> tuple[str, int]:
    name, sep, weight = text.partition("=")
    if name not in {obj.value for obj in Objective}:
        choices = ", ".join(obj.value for obj in Objective)
        raise argparse.ArgumentTypeError(f"unknown objective {name!r} (choose from {choices})")
    try:
        return name, int(weight) if sep else 1
    except ValueError:
        raise argparse.ArgumentTypeError(f"weight of {name} must be an integer") from None


def _load(path: str, fmt: str | None) -> ProblemData:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse(text, fmt, path)
    except ValueError as exc:
        raise CliError(f"{path}: {exc}") from None


def _validated(data: ProblemData, path: str) -> ProblemData:
    report = validate(data)
    for issue in report.warnings:
        print(f"warning: {issue}", file=sys.stderr)
    if not report.ok:
        raise CliError(f"{path}: invalid instance: " + "; ".join(str(i) for i in report.errors))
    return data


def _write(path: str, payload: bytes) -> None:
    try:
        Path(path).write_bytes(payload)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}") from None


def cmd_solve(args) -> int:
    data = _load(args.instance, args.format)
    if args.objective:
        data = data.replace(objective=ObjectiveSpec(**dict(args.objective)))
    if args.horizon is not None:
        data = data.replace(horizon=args.horizon)
    data = _validated(data, args.instance)
    try:
        result = solve(data, time_limit=args.time_limit, seed=args.seed, formulation=args.formulation)
    except ValueError as exc:
        raise CliError(str(exc)) from None

    head = result.status.value if result.objective is None else f"{result.status.value} {result.objective}"
    print(head)
    if result.lower_bound is not None:
        print(f"bound {result.lower_bound}")
    print(f"nodes {result.statistics['nodes']}")
    print(f"runtime {result.runtime:.3f}s")
    if args.output:
        if result.best is None:
            print("no solution to write", file=sys.stderr)
        else:
            _write(args.output, write_solution(result.best, data))
    return STATUS_EXIT[result.status]


def _load_solution(path: str):
    try:
        return loads_solution(Path(path).read_text())
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    except ValueError as exc:
        raise CliError(f"{path}: {exc}") from None


def cmd_check(args) -> int:
    data = _validated(_load(args.instance, args.format), args.instance)
    violations = check(_load_solution(args.solution), data)
    for violation in violations:
        print(violation)
    if violations:
        print(f"{len(violations)} violation(s)")
        return EXIT_VIOLATIONS
    print("feasible")
    return EXIT_OK


def _instance_files(items: list[str]) -> list[Path]:
    files: list[Path] = []
    for item in items:
        path = Path(item)
        if path.is_dir():
            for child in sorted(path.iterdir()):
                if child.is_file() and not child.name.startswith("."):
                    try:
                        detect_format(child.read_text(), child)
                    except (ValueError, UnicodeDecodeError):
                        continue
                    files.append(child)
        elif path.is_file():
            files.append(path)
        else:
            raise CliError(f"no such file or directory: {item}")
    return files


def cmd_bench(args) -> int:
    files = _instance_files(args.paths)
    if not files:
        raise CliError("no instance files found")
    try:
        table = bench.load_bks(args.bks)
    except (OSError, ValueError) as exc:
        raise CliError(f"BKS: {exc}") from None
    params = bench.BatchParams(
        time_limit=args.time_limit,
        seed=args.seed,
        formulation=args.formulation,
        jobs=args.jobs,
        replicates=args.replicates,
    )
    records = bench.run_batch(files, params, table)
    for rec in records:
        if rec.error:
            print(f"{rec.instance}: {rec.error}", file=sys.stderr)
    summaries = bench.aggregate(records)
    if args.output:
        _write(args.output, bench.to_csv(records).encode())
    if args.aggregate:
        _write(args.aggregate, bench.aggregate_csv(summaries).encode())
    width = max(len("family"), *(len(s.family) for s in summaries.values()))
    print(f"{'family':<{width}}  instances  solved  excluded  mean_gap  mean_rpd")
    for s in summaries.values():
        print(
            f"{s.family:<{width}}  {s.instances:>9}  {s.solved:>6}  {s.excluded:>8}  "
            f"{bench.format_percent(s.mean_gap) or '-':>8}  {bench.format_percent(s.mean_rpd) or '-':>8}"
        )
    return EXIT_OK


def cmd_convert(args) -> int:
    data = _validated(_load(args.input, args.format), args.input)
    _write(args.output, write_instance(data))
    return EXIT_OK


def cmd_gantt(args) -> int:
    data = _validated(_load(args.instance, args.format), args.instance)
    sol = _load_solution(args.solution)
    try:
        payload = write_gantt(sol, data)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    _write(args.output, payload)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpsched", description="Constraint-programming scheduling solver.")
    sub = parser.add_subparsers(dest="command", required=True)
    formats = [fmt.value for fmt in InstanceFormat]

    def add_format(p):
        p.add_argument("--format", choices=formats, help="instance format (default: detect)")

    def add_search(p):
        p.add_argument("--time-limit", type=_positive_float, default=10.0, help="seconds (default 10)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--formulation", choices=sorted(FORMULATIONS), default="standard")

    p = sub.add_parser("solve", help="solve an instance")
    p.add_argument("instance")
    add_format(p)
    add_search(p)
    p.add_argument(
        "--objective",
        type=_objective_term,
        action="append",
        metavar="NAME[=WEIGHT]",
        help="replace the objective; repeat for weighted sums",
    )
    p.add_argument("--horizon", type=_positive_int)
    p.add_argument("--output", "-o", help="write the solution JSON here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="check a solution against an instance")
    p.add_argument("instance")
    p.add_argument("solution")
    add_format(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench", help="solve a batch and report gap and RPD")
    p.add_argument("paths", nargs="+", help="instance files or directories")
    p.add_argument("--bks", help=f"BKS file or directory (default: ${bench.BKS_ENV})")
    add_search(p)
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker processes")
    p.add_argument("--replicates", type=_positive_int, default=1, help="seeds per instance")
    p.add_argument("--output", "-o", help="per-instance CSV")
    p.add_argument("--aggregate", help="per-family CSV")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("convert", help="convert an instance to native JSON")
    p.add_argument("input")
    p.add_argument("output")
    add_format(p)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("gantt", help="draw a solution as SVG")
    p.add_argument("instance")
    p.add_argument("solution")
    p.add_argument("output")
    add_format(p)
    p.set_defaults(func=cmd_gantt)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
