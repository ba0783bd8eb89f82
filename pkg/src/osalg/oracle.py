"""Brute-force reference implementations used as ground truth in tests.

Everything here is deliberately independent of the combinator machinery:
schedules come from exhaustive permutation enumeration or direct queue
replay, buddy placements from a textbook free-list allocator. Results are
plain tuples over core types so nothing leaks back from the code paths
they are meant to check.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Callable, Iterable, Sequence

from .core import Procedure, ProcedureSet
from .errors import AllocationFailure, NotFoundError, ParameterError

MAX_ENUMERATION = 8  # factorial enumeration stays under a second


@dataclass(frozen=True)
class OracleResult:
    """Outcome of an exhaustive search: the best value and its cost."""

    order: tuple[int, ...]  # procedure ids in dispatch order
    slices: tuple[tuple[int, int, int], ...]  # (pid, start, length)
    cost: int


def _replay(order: Sequence[Procedure]) -> tuple[tuple[tuple[int, int, int], ...], int]:
    clock = 0
    slices = []
    total_wait = 0
    for p in order:
        start = max(clock, p.arrival)
        total_wait += start - p.arrival
        slices.append((p.id, start, p.time))
        clock = start + p.time
    return tuple(slices), total_wait


def brute_schedule(
    procedures: ProcedureSet | Sequence[Procedure], objective: str = "total-wait"
) -> OracleResult:
    """Enumerate every dispatch order and return a minimum total-wait one.

    Ties resolve to the lexicographically smallest id order. Limited to
    8 procedures.
    """
    if objective != "total-wait":
        raise ParameterError(f"unknown objective {objective!r}")
    members = tuple(procedures)
    if len(members) > MAX_ENUMERATION:
        raise ParameterError(
            f"enumeration limited to {MAX_ENUMERATION} procedures, got {len(members)}"
        )
    best: OracleResult | None = None
    for perm in permutations(members):
        slices, cost = _replay(perm)
        ids = tuple(p.id for p in perm)
        if best is None or cost < best.cost or (cost == best.cost and ids < best.order):
            best = OracleResult(order=ids, slices=slices, cost=cost)
    if best is None:
        return OracleResult(order=(), slices=(), cost=0)
    return best


def reference_buddy(
    capacity: int, ops: Iterable[tuple] = ()
) -> "ReferenceBuddy":
    """Replay allocate/free ops on a textbook free-list buddy allocator.

    Ops are ``("alloc", key, size)`` or ``("free", key)``. Returns the
    allocator so callers can inspect placements and the final free lists.
    """
    allocator = ReferenceBuddy(capacity)
    for op in ops:
        if op[0] == "alloc":
            allocator.alloc(op[1], op[2])
        elif op[0] == "free":
            allocator.free(op[1])
        else:
            raise ParameterError(f"unknown op {op[0]!r}")
    return allocator


class ReferenceBuddy:
    """Free-list buddy allocator: power-of-two blocks, eager sibling merge.

    Placement policy: the lowest-addressed free block large enough, split
    repeatedly keeping the lower half. Blocks are (start, size) pairs.
    """

    def __init__(self, capacity: int):
        if capacity < 1 or capacity & (capacity - 1):
            raise ParameterError(f"capacity must be a power of two, got {capacity}")
        self.capacity = capacity
        self.free_blocks: list[tuple[int, int]] = [(0, capacity)]
        self.placements: dict[object, tuple[int, int]] = {}

    def alloc(self, key: object, size: int) -> tuple[int, int]:
        if size < 1:
            raise ParameterError(f"size must be >= 1, got {size}")
        block_size = 1 << (size - 1).bit_length()
        candidates = [b for b in self.free_blocks if b[1] >= block_size]
        if not candidates:
            raise AllocationFailure(f"no free block of {block_size} units")
        start, have = min(candidates)
        self.free_blocks.remove((start, have))
        while have > block_size:
            have //= 2
            self.free_blocks.append((start + have, have))
        self.free_blocks.sort()
        self.placements[key] = (start, block_size)
        return (start, block_size)

    def free(self, key: object) -> None:
        if key not in self.placements:
            raise NotFoundError(f"unknown placement {key!r}")
        start, size = self.placements.pop(key)
        while size < self.capacity:
            buddy = (start ^ size, size)
            if buddy not in self.free_blocks:
                break
            self.free_blocks.remove(buddy)
            start = min(start, buddy[0])
            size *= 2
        self.free_blocks.append((start, size))
        self.free_blocks.sort()

    def free_extent_pairs(self) -> list[tuple[int, int]]:
        """Free blocks as (start, end) pairs in address order."""
        return [(s, s + n) for s, n in self.free_blocks]


def replay_rr(
    procedures: ProcedureSet | Sequence[Procedure],
    quantum: int | Callable[[Procedure], int],
) -> tuple[tuple[int, int, int], ...]:
    """Queue-based round robin replay, one slice tuple per turn.

    Arrivals occurring at or before a turn's end join the queue before
    the preempted procedure re-enters it. A constant quantum reproduces
    the fixed-quantum discipline; a callable gives per-procedure quanta.
    """
    quantum_of = quantum if callable(quantum) else (lambda p: quantum)
    pending = sorted(procedures, key=lambda p: (p.arrival, p.id))
    for p in pending:
        if quantum_of(p) < 1:
            raise ParameterError(f"quantum must be >= 1 for procedure {p.id}")
    remaining = {p.id: p.time for p in pending}
    queue: list[Procedure] = []
    slices: list[tuple[int, int, int]] = []
    clock = 0

    def admit_until(now: int) -> None:
        while pending and pending[0].arrival <= now:
            queue.append(pending.pop(0))

    admit_until(clock)
    while queue or pending:
        if not queue:
            clock = pending[0].arrival
            admit_until(clock)
            continue
        p = queue.pop(0)
        run = min(quantum_of(p), remaining[p.id])
        slices.append((p.id, clock, run))
        clock += run
        remaining[p.id] -= run
        admit_until(clock)
        if remaining[p.id] > 0:
            queue.append(p)
    return tuple(slices)
