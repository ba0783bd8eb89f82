"""Deterministic single-processor simulator.

Drives one CPU discipline and one memory discipline over a workload of
procedures and produces an event trace plus derived metrics. The clock is
integer valued. Identical inputs produce identical traces, byte for byte
once rendered: ties between events at the same instant resolve through a
fixed kind order, and every policy in the pipeline is deterministic.

Admission requires memory: a procedure whose allocation fails triggers at
most one swap attempt, then waits in a FIFO backlog that is retried
whenever memory frees up. Swapped-out procedures are never dispatched;
they re-enter through swap-in, ahead of the backlog.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping

from . import binding as bindingmod
from .allocators import (
    MemoryState,
    PageMap,
    SegmentMap,
    SwapRecord,
    allocate as allocate_op,
    build_page_table,
    deallocate,
    default_victim,
    paginate,
    segment_alloc,
    swap_in,
    swap_out,
)
from .combinators import Discipline, Organize, Select, SortKey, compose
from .core import Extent, Procedure, ProcedureSet
from .errors import (
    AllocationFailure,
    IncompleteRunError,
    OsAlgError,
    ParameterError,
    SwapFailure,
    UnrunnableProcedureError,
)
from .schedulers import ArrivalStream, class_quantum

SCHEDULERS = ("fcfs", "sjf-size", "sjf-time", "priority", "rr", "var-quantum")
ALLOCATORS = ("first-fit", "fixed", "buddy", "paging", "segmentation")

STRICT_ENV = "OSALG_STRICT"


class EventKind(Enum):
    ARRIVE = "Arrive"
    ADMIT = "Admit"
    ALLOCATE = "Allocate"
    DISPATCH = "Dispatch"
    PREEMPT = "Preempt"
    COMPLETE = "Complete"
    SWAP_OUT = "SwapOut"
    SWAP_IN = "SwapIn"
    DEALLOCATE = "Deallocate"


# Fixed order for events sharing an instant; completions free resources
# before anything else claims them, dispatch always renders last.
_KIND_ORDER = {
    EventKind.COMPLETE: 0,
    EventKind.PREEMPT: 1,
    EventKind.DEALLOCATE: 2,
    EventKind.SWAP_IN: 3,
    EventKind.ARRIVE: 4,
    EventKind.ADMIT: 5,
    EventKind.SWAP_OUT: 6,
    EventKind.ALLOCATE: 7,
    EventKind.DISPATCH: 8,
}

Detail = tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class TraceEvent:
    instant: int
    kind: EventKind
    pid: int
    detail: Detail = ()

    @property
    def detail_str(self) -> str:
        return " ".join(f"{k}={v}" for k, v in self.detail)

    def value(self, key: str) -> str | None:
        for k, v in self.detail:
            if k == key:
                return v
        return None


@dataclass(frozen=True)
class Trace:
    """Ordered event log of one run, plus the auto-recorded binding log."""

    events: tuple[TraceEvent, ...] = ()
    binding: bindingmod.BindingGraph = field(default_factory=bindingmod.BindingGraph)

    def __iter__(self):
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def of_kind(self, kind: EventKind) -> tuple[TraceEvent, ...]:
        return tuple(e for e in self.events if e.kind is kind)


@dataclass(frozen=True)
class Metrics:
    """Per-procedure and aggregate performance numbers for one trace."""

    waiting: Mapping[int, int]
    turnaround: Mapping[int, int]
    makespan: int
    mean_waiting: Fraction
    mean_turnaround: Fraction
    external_fragmentation: tuple[Fraction, ...]
    mean_external_fragmentation: Fraction | None
    internal_fragmentation_total: int


@dataclass(frozen=True)
class SimConfig:
    """Everything a run needs besides the workload.

    The seed only matters to workload generators; the simulator itself is
    deterministic.
    """

    memory_capacity: int = 64
    backing_capacity: int | None = None  # defaults to the primary capacity
    scheduler: str = "fcfs"
    quantum: int = 1
    io_quantum: int = 1
    cpu_quantum: int = 4
    allocator: str = "first-fit"
    unit_size: int | None = None
    page_size: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.memory_capacity < 1:
            raise ParameterError("memory capacity must be >= 1")
        if self.backing_capacity is not None and self.backing_capacity < 0:
            raise ParameterError("backing capacity must be >= 0")
        if self.scheduler not in SCHEDULERS:
            raise ParameterError(f"unknown scheduler {self.scheduler!r}")
        if self.allocator not in ALLOCATORS:
            raise ParameterError(f"unknown allocator {self.allocator!r}")
        if self.scheduler == "rr" and self.quantum < 1:
            raise ParameterError("round robin quantum must be >= 1")
        if self.scheduler == "var-quantum" and (
            self.io_quantum < 1 or self.cpu_quantum < 1
        ):
            raise ParameterError("class quanta must be >= 1")
        if self.allocator == "fixed" and (self.unit_size is None or self.unit_size < 1):
            raise ParameterError("fixed allocator needs --unit >= 1")
        if self.allocator == "paging" and (self.page_size is None or self.page_size < 1):
            raise ParameterError("paging allocator needs --page-size >= 1")
        if self.allocator == "buddy" and (
            self.memory_capacity & (self.memory_capacity - 1)
        ):
            raise ParameterError("buddy allocator needs a power-of-two capacity")

    @property
    def effective_backing(self) -> int:
        return (
            self.memory_capacity
            if self.backing_capacity is None
            else self.backing_capacity
        )


def _format_extents(extents: Iterable[Extent]) -> str:
    text = "+".join(str(e) for e in extents)
    return text or "-"


class _Memory:
    """Primary/backing state pair specialised to one allocator mode."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        if cfg.allocator == "fixed":
            organizer = Organize.fixed_partition(cfg.unit_size or 1)
            self.discipline: Discipline | None = compose(Select.first_fit(), organizer)
        elif cfg.allocator == "paging":
            organizer = Organize.fixed_partition(cfg.page_size or 1)
            self.discipline = None
        elif cfg.allocator == "buddy":
            organizer = Organize.buddy()
            self.discipline = compose(Select.buddy_fit(), organizer)
        else:  # first-fit, segmentation
            organizer = Organize.identity()
            self.discipline = compose(Select.first_fit(), organizer)
        self.primary = MemoryState.initial(cfg.memory_capacity, organizer)
        self.backing = MemoryState.initial(cfg.effective_backing, Organize.identity())
        self.page_maps: dict[int, PageMap] = {}
        self.segment_maps: dict[int, SegmentMap] = {}

    def feasible(self, p: Procedure) -> bool:
        """Could p ever be made resident, given an empty primary memory?"""
        if p.size == 0:
            return True
        cfg = self.cfg
        if cfg.allocator == "fixed":
            unit = cfg.unit_size or 1
            return p.size <= unit and cfg.memory_capacity // unit >= 1
        if cfg.allocator == "paging":
            page = cfg.page_size or 1
            return -(-p.size // page) <= cfg.memory_capacity // page
        if cfg.allocator == "buddy":
            block = 1 << (p.size - 1).bit_length()
            return block <= cfg.memory_capacity
        return p.size <= cfg.memory_capacity

    def segment_spec(self, p: Procedure) -> tuple[int, ...]:
        if p.segments is not None:
            return p.segments
        return (p.size,) if p.size else ()

    def allocate(self, p: Procedure) -> tuple[tuple[Extent, ...], Detail]:
        """Grant memory to p; returns its extents and trace detail."""
        int_frag = 0
        extra: list[tuple[str, str]] = []
        if self.cfg.allocator == "paging":
            pagination = paginate(p, self.cfg.page_size or 1)
            page_map, self.primary = build_page_table(pagination, self.primary)
            self.page_maps[p.id] = page_map
            int_frag = pagination.internal_fragmentation
            if page_map.entries:
                extra.append(
                    ("pages", "+".join(f"{pg}:{fr}" for pg, fr in page_map.entries))
                )
        elif self.cfg.allocator == "segmentation":
            assert self.discipline is not None
            seg_map, self.primary = segment_alloc(
                p, self.segment_spec(p), self.discipline, self.primary
            )
            self.segment_maps[p.id] = seg_map
            if seg_map.segments:
                extra.append(
                    (
                        "segments",
                        "+".join(f"{length}@{base}" for _, length, base in seg_map.segments),
                    )
                )
        else:
            assert self.discipline is not None
            if self.cfg.allocator == "fixed" and p.size > 0:
                int_frag = (self.cfg.unit_size or 0) - p.size
            self.primary, _ = allocate_op(self.discipline, self.primary, p)
        extents = self.primary.extents_of(p.id)
        detail = [("extents", _format_extents(extents))]
        detail.extend(extra)
        detail.append(("ext_frag", self.frag_sample()))
        detail.append(("int_frag", str(int_frag)))
        return extents, tuple(detail)

    def release(self, pid: int) -> tuple[Extent, ...]:
        extents = self.primary.extents_of(pid)
        self.primary = deallocate(self.primary, pid)
        self.page_maps.pop(pid, None)
        self.segment_maps.pop(pid, None)
        return extents

    def swap_out_victim(
        self, candidates: list[Procedure]
    ) -> tuple[SwapRecord, tuple[Extent, ...]]:
        held = {p.id: self.primary.extents_of(p.id) for p in candidates}
        self.primary, self.backing, record = swap_out(
            self.primary, self.backing, candidates, default_victim
        )
        self.page_maps.pop(record.pid, None)
        self.segment_maps.pop(record.pid, None)
        return record, held[record.pid]

    def swap_in_record(self, record: SwapRecord, p: Procedure) -> tuple[Extent, ...]:
        if self.cfg.allocator == "paging":
            # residency may land in different frames: rebuild the table
            backing2 = deallocate(self.backing, record.pid)
            pagination = paginate(p, self.cfg.page_size or 1)
            page_map, self.primary = build_page_table(pagination, self.primary)
            self.backing = backing2
            self.page_maps[p.id] = page_map
            return self.primary.extents_of(p.id)
        self.primary, self.backing, granted = swap_in(
            self.primary, self.backing, record
        )
        return granted

    def frag_sample(self) -> str:
        total = self.primary.free_size
        if total == 0:
            return "-"
        return str(Fraction(self.primary.largest_free(), total))

    def check(self) -> None:
        self.primary.check_invariants()
        self.backing.check_invariants()


class _Picker:
    """Dispatch policy: which ready procedure runs next, and how long."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        name = cfg.scheduler
        if name == "fcfs":
            self.discipline = compose(Select.identity(1), Organize.identity())
        elif name == "sjf-size":
            self.discipline = compose(Select.identity(1), Organize.sort(SortKey.SIZE))
        elif name == "sjf-time":
            self.discipline = compose(Select.identity(1), Organize.sort(SortKey.TIME))
        elif name == "priority":
            self.discipline = compose(Select.argmax_priority(), Organize.identity())
        else:
            self.discipline = None
        if name == "var-quantum":
            self.quantum_of = class_quantum(cfg.io_quantum, cfg.cpu_quantum)
        elif name == "rr":
            self.quantum_of = lambda p: cfg.quantum
        else:
            self.quantum_of = None

    def pick(self, ready: list[Procedure], remaining: Mapping[int, int]) -> tuple[Procedure, int]:
        if self.quantum_of is not None:
            chosen = ready[0]  # rotation order
            return chosen, min(self.quantum_of(chosen), remaining[chosen.id])
        assert self.discipline is not None
        view = sorted(ready, key=lambda p: (p.arrival, p.id))
        chosen = self.discipline.apply(view)
        return chosen, remaining[chosen.id]


class _TraceBuilder:
    """Buffers events per instant and flushes them in the fixed kind order."""

    def __init__(self) -> None:
        self.done: list[TraceEvent] = []
        self.buffer: list[tuple[int, int, TraceEvent]] = []
        self.open_instant: int | None = None
        self.seq = 0

    def emit(self, instant: int, kind: EventKind, pid: int, detail: Detail = ()) -> None:
        if self.open_instant is not None and instant < self.open_instant:
            raise OsAlgError(f"event at {instant} after instant {self.open_instant}")
        if self.open_instant is None or instant > self.open_instant:
            self.flush()
            self.open_instant = instant
        self.buffer.append(
            (_KIND_ORDER[kind], self.seq, TraceEvent(instant, kind, pid, detail))
        )
        self.seq += 1

    def flush(self) -> None:
        self.buffer.sort(key=lambda item: (item[0], item[1]))
        self.done.extend(event for _, _, event in self.buffer)
        self.buffer.clear()

    def finish(self) -> tuple[TraceEvent, ...]:
        self.flush()
        return tuple(self.done)


class _Simulation:
    def __init__(self, stream: ArrivalStream, cfg: SimConfig, strict: bool):
        self.cfg = cfg
        self.strict = strict
        self.stream = stream
        self.memory = _Memory(cfg)
        self.picker = _Picker(cfg)
        self.trace = _TraceBuilder()
        self.clock = 0
        self.procs: dict[int, Procedure] = {}
        self.remaining: dict[int, int] = {}
        self.ready: list[Procedure] = []
        self.backlog: list[Procedure] = []
        self.swapped: list[SwapRecord] = []
        self.running: tuple[int, int, int] | None = None  # pid, start, end
        self.holdover: Procedure | None = None  # preempted, rejoins after arrivals
        self.cpu_frontier = 0  # first CPU instant not yet assigned
        self.graph = bindingmod.BindingGraph()
        symbol = {
            "fixed": "frames",
            "paging": "frames",
            "buddy": "buddy-tree",
        }.get(cfg.allocator, "free-list")
        self.graph = bindingmod.record(self.graph, symbol, bindingmod.EventKind.BIND, 0)

    def emit(self, instant: int, kind: EventKind, pid: int, detail: Detail = ()) -> None:
        self.trace.emit(instant, kind, pid, detail)
        if self.strict:
            self.memory.check()
            violations = bindingmod.validate(self.graph)
            if violations:
                raise OsAlgError(f"binding violations: {violations}")

    # -- admission ---------------------------------------------------

    def arrive(self, p: Procedure) -> None:
        if not self.memory.feasible(p):
            raise UnrunnableProcedureError(
                f"procedure {p.id} (size {p.size}) can never be resident under "
                f"{self.cfg.allocator} in {self.cfg.memory_capacity} units"
            )
        if self.cfg.scheduler == "priority" and p.priority is None:
            raise ParameterError(f"procedure {p.id} has no priority")
        self.procs[p.id] = p
        self.remaining[p.id] = p.time
        detail: list[tuple[str, str]] = [("size", str(p.size)), ("time", str(p.time))]
        if p.priority is not None:
            detail.append(("priority", str(p.priority)))
        if p.owner is not None:
            detail.append(("owner", p.owner))
        if p.io_class is not None:
            detail.append(("class", p.io_class.value))
        self.emit(p.arrival, EventKind.ARRIVE, p.id, tuple(detail))
        if not self.try_admit(p, p.arrival):
            self.backlog.append(p)

    def try_admit(self, p: Procedure, at: int) -> bool:
        try:
            _, detail = self.memory.allocate(p)
        except AllocationFailure:
            if not self.swap_attempt(at):
                return False
            try:
                _, detail = self.memory.allocate(p)
            except AllocationFailure:
                return False
        self.emit(at, EventKind.ADMIT, p.id)
        self.emit(at, EventKind.ALLOCATE, p.id, detail)
        self.record_allocation_bindings(p, at)
        self.ready.append(p)
        return True

    def swap_attempt(self, at: int) -> bool:
        # the running procedure stays resident; a just-preempted one is an
        # ordinary candidate even before it rejoins the queue
        candidates = list(self.ready)
        if self.holdover is not None:
            candidates.append(self.holdover)
        if not candidates:
            return False
        try:
            record, freed = self.memory.swap_out_victim(candidates)
        except SwapFailure:
            return False
        self.swapped.append(record)
        self.ready = [q for q in self.ready if q.id != record.pid]
        if self.holdover is not None and self.holdover.id == record.pid:
            self.holdover = None
        self.emit(
            at,
            EventKind.SWAP_OUT,
            record.pid,
            (
                ("extents", _format_extents(freed)),
                ("backing", _format_extents(record.backing_extents)),
            ),
        )
        return True

    def record_allocation_bindings(self, p: Procedure, at: int) -> None:
        if self.cfg.allocator != "paging":
            return
        pages = f"pages:{p.id}"
        table = f"page-table:{p.id}"
        self.graph = bindingmod.record(self.graph, pages, bindingmod.EventKind.BIND, at)
        self.graph = bindingmod.record(self.graph, table, bindingmod.EventKind.BIND, at)
        self.graph = self.graph.with_dependency("frames", table)
        self.graph = self.graph.with_dependency(pages, table)

    # -- reclamation -------------------------------------------------

    def reclaim(self, at: int) -> None:
        """Re-admit swapped-out procedures, then the backlog, FIFO each."""
        while self.swapped:
            record = self.swapped[0]
            p = self.procs[record.pid]
            try:
                granted = self.memory.swap_in_record(record, p)
            except AllocationFailure:
                break
            self.swapped.pop(0)
            self.emit(
                at, EventKind.SWAP_IN, p.id, (("extents", _format_extents(granted)),)
            )
            self.record_allocation_bindings(p, at)
            self.ready.append(p)
        while self.backlog:
            if not self.try_admit(self.backlog[0], at):
                break
            self.backlog.pop(0)

    # -- dispatch ----------------------------------------------------

    def pump_arrivals(self, limit: int, inclusive: bool) -> None:
        while True:
            head = self.stream.peek()
            if head is None:
                return
            if head.arrival > limit or (head.arrival == limit and not inclusive):
                return
            for p in self.stream.take_until(head.arrival):
                self.arrive(p)

    def dispatch(self) -> None:
        chosen, run = self.picker.pick(self.ready, self.remaining)
        self.ready.remove(chosen)
        if self.strict:
            if self.clock < self.cpu_frontier:
                raise OsAlgError(
                    f"CPU instant {self.clock} would be assigned twice"
                )
            if not self.memory.primary.holds(chosen.id):
                raise OsAlgError(f"dispatch of non-resident procedure {chosen.id}")
        self.cpu_frontier = self.clock + run
        self.emit(self.clock, EventKind.DISPATCH, chosen.id, (("run", str(run)),))
        if self.cfg.allocator == "paging":
            self.graph = bindingmod.record(
                self.graph,
                f"page-table:{chosen.id}",
                bindingmod.EventKind.USE,
                self.clock,
            )
        self.running = (chosen.id, self.clock, self.clock + run)

    def finish_slice(self) -> None:
        assert self.running is not None
        pid, start, end = self.running
        self.running = None
        self.remaining[pid] -= end - start
        if self.remaining[pid] == 0:
            self.emit(end, EventKind.COMPLETE, pid)
            freed = self.memory.release(pid)
            self.emit(
                end, EventKind.DEALLOCATE, pid, (("extents", _format_extents(freed)),)
            )
            self.reclaim(end)
        else:
            self.emit(end, EventKind.PREEMPT, pid, (("left", str(self.remaining[pid])),))
            self.holdover = self.procs[pid]

    def run(self) -> Trace:
        while True:
            if self.running is not None:
                _, _, end = self.running
                self.pump_arrivals(end, inclusive=False)
                self.clock = end
                self.finish_slice()
                continue
            self.pump_arrivals(self.clock, inclusive=True)
            if self.holdover is not None:
                self.ready.append(self.holdover)  # arrivals joined first
                self.holdover = None
            if self.ready:
                self.dispatch()
                continue
            head = self.stream.peek()
            if head is not None:
                self.clock = max(self.clock, head.arrival)
                continue
            if self.swapped or self.backlog:
                self.reclaim(self.clock)
                if self.ready:
                    continue
                raise OsAlgError("simulation stuck: nothing ready, memory idle")
            break
        events = self.trace.finish()
        if self.strict:
            violations = bindingmod.validate(self.graph)
            if violations:
                raise OsAlgError(f"binding violations: {violations}")
        return Trace(events=events, binding=self.graph)


def run(
    workload: ProcedureSet | Iterable[Procedure] | ArrivalStream,
    cfg: SimConfig,
    strict: bool | None = None,
) -> tuple[Trace, Metrics]:
    """Simulate the workload under the configuration.

    `strict` turns on per-event invariant checking; unset, it follows the
    OSALG_STRICT environment variable.
    """
    if strict is None:
        strict = os.environ.get(STRICT_ENV, "") == "1"
    if isinstance(workload, ArrivalStream):
        stream = workload
    else:
        members = sorted(workload, key=lambda p: (p.arrival, p.id))
        stream = ArrivalStream(members)
    sim = _Simulation(stream, cfg, strict)
    trace = sim.run()
    return trace, metrics(trace)


def metrics(t: Trace) -> Metrics:
    """Waiting, turnaround, makespan, and fragmentation numbers.

    Requires a complete trace: every arrived procedure must have
    completed.
    """
    arrivals: dict[int, int] = {}
    times: dict[int, int] = {}
    completions: dict[int, int] = {}
    frag_samples: list[Fraction] = []
    int_frag = 0
    for e in t.events:
        if e.kind is EventKind.ARRIVE:
            arrivals[e.pid] = e.instant
            times[e.pid] = int(e.value("time") or 0)
        elif e.kind is EventKind.COMPLETE:
            completions[e.pid] = e.instant
        elif e.kind is EventKind.ALLOCATE:
            sample = e.value("ext_frag")
            if sample and sample != "-":
                frag_samples.append(Fraction(sample))
            int_frag += int(e.value("int_frag") or 0)
    unfinished = sorted(set(arrivals) - set(completions))
    if unfinished:
        raise IncompleteRunError(f"procedures never completed: {unfinished}")
    turnaround = {pid: completions[pid] - arrivals[pid] for pid in sorted(arrivals)}
    waiting = {pid: turnaround[pid] - times[pid] for pid in sorted(arrivals)}
    count = len(arrivals)
    mean_wait = Fraction(sum(waiting.values()), count) if count else Fraction(0)
    mean_turn = Fraction(sum(turnaround.values()), count) if count else Fraction(0)
    mean_frag = (
        sum(frag_samples, Fraction(0)) / len(frag_samples) if frag_samples else None
    )
    return Metrics(
        waiting=waiting,
        turnaround=turnaround,
        makespan=max(completions.values(), default=0),
        mean_waiting=mean_wait,
        mean_turnaround=mean_turn,
        external_fragmentation=tuple(frag_samples),
        mean_external_fragmentation=mean_frag,
        internal_fragmentation_total=int_frag,
    )
