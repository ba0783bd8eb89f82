"""Command-line front end.

Workloads are line-oriented text: one procedure per line as ``key=value``
pairs separated by spaces, ``#`` starting a comment. Traces render as CSV
with a fixed header, metrics as ``key=value`` lines; both are byte-stable
across runs for regression diffing.
"""

from __future__ import annotations

import argparse
import sys
from typing import IO, Sequence

from .binding import legal_orderings
from .core import Procedure, ProcedureSet, WorkClass
from .errors import (
    CycleError,
    OsAlgError,
    ParameterError,
    UnrunnableProcedureError,
    WorkloadError,
)
from .sim import Metrics, SimConfig, Trace, run

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_WORKLOAD = 2
EXIT_UNRUNNABLE = 3

_REQUIRED_KEYS = ("id", "size", "time")
_ALL_KEYS = ("id", "size", "time", "arrival", "priority", "owner", "class", "segments")


def parse_workload(text: str) -> ProcedureSet:
    """Parse workload text into an arrival-sorted procedure set."""
    procedures: list[Procedure] = []
    seen: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields: dict[str, str] = {}
        for token in line.split():
            if "=" not in token:
                raise WorkloadError(f"expected key=value, got {token!r}", lineno)
            key, value = token.split("=", 1)
            if key not in _ALL_KEYS:
                raise WorkloadError(f"unknown field {key!r}", lineno)
            if key in fields:
                raise WorkloadError(f"field {key!r} repeated", lineno)
            fields[key] = value
        for key in _REQUIRED_KEYS:
            if key not in fields:
                raise WorkloadError(f"missing field {key!r}", lineno)
        try:
            pid = int(fields["id"])
            if pid in seen:
                raise WorkloadError(
                    f"duplicate id {pid} (first on line {seen[pid]})", lineno
                )
            seen[pid] = lineno
            io_class = (
                WorkClass(fields["class"]) if "class" in fields else None
            )
            segments = (
                tuple(int(s) for s in fields["segments"].split(","))
                if "segments" in fields
                else None
            )
            procedures.append(
                Procedure(
                    id=pid,
                    size=int(fields["size"]),
                    time=int(fields["time"]),
                    arrival=int(fields.get("arrival", "0")),
                    priority=int(fields["priority"]) if "priority" in fields else None,
                    owner=fields.get("owner"),
                    io_class=io_class,
                    segments=segments,
                )
            )
        except WorkloadError:
            raise
        except ParameterError as exc:
            raise WorkloadError(str(exc), lineno) from exc
        except ValueError as exc:
            raise WorkloadError(str(exc), lineno) from exc
    ordered = sorted(procedures, key=lambda p: (p.arrival, p.id))
    return ProcedureSet(tuple(ordered))


def emit_workload(procedures: ProcedureSet) -> str:
    """Render a procedure set back to workload text."""
    lines = []
    for p in procedures:
        parts = [f"id={p.id}", f"size={p.size}", f"time={p.time}", f"arrival={p.arrival}"]
        if p.priority is not None:
            parts.append(f"priority={p.priority}")
        if p.owner is not None:
            parts.append(f"owner={p.owner}")
        if p.io_class is not None:
            parts.append(f"class={p.io_class.value}")
        if p.segments is not None:
            parts.append("segments=" + ",".join(str(s) for s in p.segments))
        lines.append(" ".join(parts))
    return "\n".join(lines) + ("\n" if lines else "")


def render_trace(trace: Trace) -> str:
    """One CSV line per event, stable field order."""
    lines = ["instant,event,pid,detail"]
    lines.extend(
        f"{e.instant},{e.kind.value},{e.pid},{e.detail_str}" for e in trace.events
    )
    return "\n".join(lines) + "\n"


def render_metrics(m: Metrics) -> str:
    lines = [
        f"makespan={m.makespan}",
        f"mean_waiting={m.mean_waiting}",
        f"mean_turnaround={m.mean_turnaround}",
        "mean_external_fragmentation="
        + (str(m.mean_external_fragmentation)
           if m.mean_external_fragmentation is not None else "-"),
        f"internal_fragmentation_total={m.internal_fragmentation_total}",
    ]
    for pid in sorted(m.waiting):
        lines.append(f"waiting.{pid}={m.waiting[pid]}")
        lines.append(f"turnaround.{pid}={m.turnaround[pid]}")
    return "\n".join(lines) + "\n"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="osalg",
        description="Compose scheduling and allocation disciplines and "
        "simulate them over a workload.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="simulate a workload")
    runp.add_argument("--workload", required=True, help="workload file path")
    runp.add_argument(
        "--scheduler",
        required=True,
        choices=["fcfs", "sjf-size", "sjf-time", "priority", "rr", "var-quantum"],
    )
    runp.add_argument(
        "--allocator",
        required=True,
        choices=["first-fit", "fixed", "buddy", "paging", "segmentation"],
    )
    runp.add_argument("--quantum", type=int, default=1, help="round robin quantum")
    runp.add_argument("--io-quantum", type=int, default=1)
    runp.add_argument("--cpu-quantum", type=int, default=4)
    runp.add_argument("--unit", type=int, help="fixed partition unit size")
    runp.add_argument("--page-size", type=int, help="page/frame size")
    runp.add_argument("--memory", type=int, default=64, help="primary capacity")
    runp.add_argument("--backing", type=int, help="backing capacity (default: memory)")
    runp.add_argument("--trace", help="trace CSV path (default: stdout)")
    runp.add_argument("--metrics", help="metrics path (default: stdout)")
    runp.add_argument("--seed", type=int, default=0, help="workload generation seed")

    orderp = sub.add_parser("orderings", help="legal binding orders")
    orderp.add_argument("--symbols", required=True, help="comma-separated symbols")
    orderp.add_argument(
        "--deps", default="", help="comma-separated a<b pairs: a binds before b"
    )
    return parser


def _cmd_run(args: argparse.Namespace, out: IO[str], err: IO[str]) -> int:
    try:
        with open(args.workload, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        print(f"error: cannot read workload: {exc}", file=err)
        return EXIT_WORKLOAD
    try:
        workload = parse_workload(text)
    except WorkloadError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_WORKLOAD
    try:
        cfg = SimConfig(
            memory_capacity=args.memory,
            backing_capacity=args.backing,
            scheduler=args.scheduler,
            quantum=args.quantum,
            io_quantum=args.io_quantum,
            cpu_quantum=args.cpu_quantum,
            allocator=args.allocator,
            unit_size=args.unit,
            page_size=args.page_size,
            seed=args.seed,
        )
    except ParameterError as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE
    try:
        trace, measured = run(workload, cfg)
    except UnrunnableProcedureError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_UNRUNNABLE
    except (ParameterError, WorkloadError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_WORKLOAD
    trace_text = render_trace(trace)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as handle:
            handle.write(trace_text)
    else:
        out.write(trace_text)
    metrics_text = render_metrics(measured)
    if args.metrics:
        with open(args.metrics, "w", encoding="utf-8") as handle:
            handle.write(metrics_text)
    else:
        out.write(metrics_text)
    return EXIT_OK


def _cmd_orderings(args: argparse.Namespace, out: IO[str], err: IO[str]) -> int:
    symbols = [s for s in args.symbols.split(",") if s]
    deps: list[tuple[str, str]] = []
    for pair in args.deps.split(","):
        pair = pair.strip()
        if not pair:
            continue
        if "<" not in pair:
            print(f"usage error: dependency {pair!r} is not of the form a<b", file=err)
            return EXIT_USAGE
        first, then = pair.split("<", 1)
        deps.append((first.strip(), then.strip()))
    try:
        orders = legal_orderings(symbols, deps)
    except CycleError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_WORKLOAD
    for order in orders:
        out.write(",".join(order) + "\n")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    out, err = sys.stdout, sys.stderr
    try:
        if args.command == "run":
            return _cmd_run(args, out, err)
        return _cmd_orderings(args, out, err)
    except OsAlgError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_WORKLOAD


if __name__ == "__main__":
    sys.exit(main())
