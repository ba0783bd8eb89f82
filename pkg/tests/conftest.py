"""Shared workload builders and the regression run matrix."""

from __future__ import annotations

import random

from osalg import Procedure, ProcedureSet, SimConfig, WorkClass


def proc(pid, size=1, time=1, arrival=0, priority=None, owner=None,
         io_class=None, segments=None):
    return Procedure(
        id=pid, size=size, time=time, arrival=arrival, priority=priority,
        owner=owner, io_class=io_class, segments=segments,
    )


def random_batch(rng: random.Random, n: int, max_size: int = 8,
                 max_time: int = 9, with_priority: bool = False) -> ProcedureSet:
    """A batch workload: everything arrives at instant 0."""
    members = [
        proc(
            pid=i + 1,
            size=rng.randint(0, max_size),
            time=rng.randint(1, max_time),
            priority=rng.randint(0, 9) if with_priority else None,
        )
        for i in range(n)
    ]
    return ProcedureSet(tuple(members))


def random_arrivals(rng: random.Random, n: int, max_size: int = 8,
                    max_time: int = 9, spread: int = 20,
                    with_priority: bool = False,
                    with_class: bool = False) -> ProcedureSet:
    """A staggered workload sorted by (arrival, id)."""
    arrivals = sorted(rng.randint(0, spread) for _ in range(n))
    members = [
        proc(
            pid=i + 1,
            size=rng.randint(0, max_size),
            time=rng.randint(1, max_time),
            arrival=arrivals[i],
            priority=rng.randint(0, 9) if with_priority else None,
            io_class=(
                rng.choice([WorkClass.IO_BOUND, WorkClass.CPU_BOUND])
                if with_class
                else None
            ),
        )
        for i in range(n)
    ]
    return ProcedureSet(tuple(members))


def regression_runs() -> list[tuple[str, ProcedureSet, SimConfig]]:
    """Fixed workload/config pairs exercised by determinism and
    conservation checks."""
    rng = random.Random(20130802)
    runs: list[tuple[str, ProcedureSet, SimConfig]] = []

    two_job = ProcedureSet.of(proc(1, size=4, time=3), proc(2, size=4, time=2))
    runs.append(("two-job-fcfs-first-fit", two_job,
                 SimConfig(memory_capacity=16, scheduler="fcfs",
                           allocator="first-fit")))

    batch = random_batch(rng, 12)
    runs.append(("batch-sjf-time-buddy", batch,
                 SimConfig(memory_capacity=32, scheduler="sjf-time",
                           allocator="buddy")))

    staggered = random_arrivals(rng, 10, with_priority=True)
    runs.append(("staggered-priority-paging", staggered,
                 SimConfig(memory_capacity=32, scheduler="priority",
                           allocator="paging", page_size=4)))

    rr_load = random_arrivals(rng, 8, max_size=4)
    runs.append(("staggered-rr-fixed", rr_load,
                 SimConfig(memory_capacity=24, scheduler="rr", quantum=2,
                           allocator="fixed", unit_size=4)))

    segmented = ProcedureSet.of(
        proc(1, size=10, time=4, segments=(4, 6)),
        proc(2, size=6, time=3, arrival=1, segments=(2, 2, 2)),
        proc(3, size=5, time=2, arrival=2),
        proc(4, size=3, time=5, arrival=2, io_class=WorkClass.IO_BOUND),
    )
    runs.append(("segments-var-quantum", segmented,
                 SimConfig(memory_capacity=16, scheduler="var-quantum",
                           io_quantum=1, cpu_quantum=3,
                           allocator="segmentation")))

    # tight memory forces swapping
    swappy = ProcedureSet.of(
        proc(1, size=4, time=6, arrival=0, priority=5),
        proc(2, size=4, time=6, arrival=0, priority=1),
        proc(3, size=4, time=2, arrival=1, priority=9),
    )
    runs.append(("tight-memory-swap", swappy,
                 SimConfig(memory_capacity=8, backing_capacity=8,
                           scheduler="fcfs", allocator="first-fit")))

    sjf_size = random_arrivals(rng, 9, max_size=6)
    runs.append(("staggered-sjf-size-tight", sjf_size,
                 SimConfig(memory_capacity=8, backing_capacity=16,
                           scheduler="sjf-size", allocator="first-fit")))
    return runs
