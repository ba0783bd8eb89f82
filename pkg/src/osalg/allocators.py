"""Memory disciplines: contiguous allocation, fixed units, buddy blocks,
paging, segmentation, virtualization chains, deallocation, swapping, and
ownership partitioning.

A ``MemoryState`` is a pure value: every operation returns a new state,
and at all times the allocated extents, the free extents, and any
partition residue tile ``[0, capacity)`` exactly, pairwise disjoint.
Extent sharing is rejected outright; temporal coordination of shared
writes is out of scope.

Address virtualization is a chain of injective partial maps: a resource
set bound to an intermediate set that is in turn bound to the physical
one. ``translate`` walks such a chain and reports the faulting hop when
an address is unmapped.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Iterable, Mapping, Sequence

from .combinators import (
    BuddyTree,
    Discipline,
    Organize,
    OrganizeTag,
    SelectTag,
    organize_buddy,
    organize_fixed_partition,
    select_first_fit,
)
from .core import Extent, Procedure, ResourceSet
from .errors import (
    AllocationFailure,
    NotFoundError,
    ParameterError,
    SwapFailure,
    TranslationFault,
)

VictimPolicy = Callable[[Sequence[Procedure]], Procedure]


def _coalesce(extents: Iterable[Extent]) -> tuple[Extent, ...]:
    """Merge adjacent extents into maximal runs, address ordered."""
    merged: list[Extent] = []
    for e in sorted(extents, key=lambda x: x.start):
        if e.size == 0:
            continue
        if merged and merged[-1].end == e.start:
            merged[-1] = Extent(merged[-1].start, e.end)
        else:
            merged.append(e)
    return tuple(merged)


@dataclass(frozen=True)
class MemoryState:
    """Allocation bookkeeping for one finite reusable resource set.

    `organizer` fixes the structure of the free space: identity keeps a
    coalesced free-extent list, fixed partitioning keeps whole allocation
    units, the buddy organizer keeps the block tree (mirrored into `free`
    for uniform accounting). `allocated` maps procedure ids to the
    extents they hold.
    """

    resource: ResourceSet
    organizer: Organize
    allocated: Mapping[int, tuple[Extent, ...]]
    free: tuple[Extent, ...]
    buddy: BuddyTree | None = None
    residue: Extent | None = None

    @staticmethod
    def initial(capacity: int, organizer: Organize | None = None) -> "MemoryState":
        """An empty memory of `capacity` units under the given organizer."""
        organizer = organizer or Organize.identity()
        resource = ResourceSet.memory(capacity)
        if organizer.tag is OrganizeTag.IDENTITY:
            free = (Extent(0, capacity),) if capacity else ()
            return MemoryState(resource, organizer, {}, free)
        if organizer.tag is OrganizeTag.FIXED_PARTITION:
            assert organizer.unit_size is not None
            partition = organize_fixed_partition(resource, organizer.unit_size)
            return MemoryState(
                resource, organizer, {}, partition.units, residue=partition.residue
            )
        if organizer.tag is OrganizeTag.BUDDY_TREE:
            tree = organize_buddy(resource)
            return MemoryState(resource, organizer, {}, tree.free_extents(), buddy=tree)
        raise ParameterError(f"memory cannot be organized by {organizer.tag.value}")

    @property
    def capacity(self) -> int:
        return self.resource.capacity or 0

    @property
    def unit_size(self) -> int | None:
        return self.organizer.unit_size

    def holds(self, pid: int) -> bool:
        return pid in self.allocated

    def extents_of(self, pid: int) -> tuple[Extent, ...]:
        if pid not in self.allocated:
            raise NotFoundError(f"procedure {pid} holds no memory")
        return self.allocated[pid]

    @property
    def free_size(self) -> int:
        return sum(e.size for e in self.free)

    @property
    def allocated_size(self) -> int:
        return sum(e.size for exts in self.allocated.values() for e in exts)

    def largest_free(self) -> int:
        return max((e.size for e in self.free), default=0)

    def check_invariants(self) -> None:
        """Conservation and disjointness; raises ParameterError on breach."""
        pieces = list(self.free)
        pieces.extend(e for exts in self.allocated.values() for e in exts)
        if self.residue is not None:
            pieces.append(self.residue)
        pieces = [e for e in pieces if e.size > 0]
        pieces.sort(key=lambda e: e.start)
        covered = 0
        for e in pieces:
            if e.start < covered:
                raise ParameterError(f"extent {e} overlaps a previous one")
            if e.start > covered:
                raise ParameterError(f"gap before {e}: units uncovered")
            if e.end > self.capacity:
                raise ParameterError(f"extent {e} beyond capacity {self.capacity}")
            covered = e.end
        if covered != self.capacity:
            raise ParameterError(
                f"covered {covered} of {self.capacity} units: conservation broken"
            )
        if self.buddy is not None and set(self.buddy.free_extents()) != set(self.free):
            raise ParameterError("buddy tree and free list disagree")


def _register(m: MemoryState, pid: int, extents: tuple[Extent, ...]) -> MemoryState:
    allocated = dict(m.allocated)
    allocated[pid] = allocated.get(pid, ()) + extents
    return replace(m, allocated=allocated)


def _carve(m: MemoryState, q: int) -> tuple[Extent, MemoryState]:
    """First-fit carve of a q-unit extent from an identity-organized state."""
    grant = select_first_fit(m.free, q)
    free: list[Extent] = []
    for e in m.free:
        if e.start == grant.start:
            if grant.end < e.end:
                free.append(Extent(grant.end, e.end))
        else:
            free.append(e)
    return grant, replace(m, free=tuple(free))


def _take_units(m: MemoryState, count: int) -> tuple[tuple[Extent, ...], MemoryState]:
    """Take the `count` lowest-addressed free allocation units whole."""
    if count > len(m.free):
        raise AllocationFailure(f"{count} units needed, {len(m.free)} free")
    taken = m.free[:count]
    return taken, replace(m, free=m.free[count:])


def _grant(
    m: MemoryState, pid: int, q: int, segments: tuple[int, ...] | None = None,
    pages: int | None = None,
) -> tuple[MemoryState, tuple[Extent, ...]]:
    """Grant q units to pid under the state's own organization."""
    if m.holds(pid):
        raise ParameterError(f"procedure {pid} already holds memory")
    if q == 0 and pages is None:
        return _register(m, pid, ()), ()
    if m.organizer.tag is OrganizeTag.BUDDY_TREE:
        assert m.buddy is not None
        extent, tree = m.buddy.allocate(q)
        m2 = replace(m, buddy=tree, free=tree.free_extents())
        return _register(m2, pid, (extent,)), (extent,)
    if m.organizer.tag is OrganizeTag.FIXED_PARTITION:
        unit = m.unit_size or 0
        if pages is not None:
            taken, m2 = _take_units(m, pages)
            return _register(m2, pid, taken), taken
        if q > unit:
            raise AllocationFailure(f"demand {q} exceeds the {unit}-unit partitions")
        select_first_fit(m.free, q)  # fails when no unit is free
        taken, m2 = _take_units(m, 1)
        return _register(m2, pid, taken), taken
    if segments:
        state = m
        granted: list[Extent] = []
        for length in segments:
            extent, state = _carve(state, length)
            granted.append(extent)
        return _register(state, pid, tuple(granted)), tuple(granted)
    extent, m2 = _carve(m, q)
    return _register(m2, pid, (extent,)), (extent,)


def allocate(
    d: Discipline, m: MemoryState, p: Procedure
) -> tuple[MemoryState, tuple[Extent, ...]]:
    """Assign an extent (or whole allocation unit, or buddy block) of total
    size >= p.size to p, under the discipline d.

    The discipline must organize the set the same way the state does;
    paging and segmentation have their own entry points
    (:func:`build_page_table`, :func:`segment_alloc`).
    """
    if d.organize.tag is not m.organizer.tag:
        raise ParameterError(
            f"discipline organizes by {d.organize.tag.value}, "
            f"memory by {m.organizer.tag.value}"
        )
    if (
        d.organize.tag is OrganizeTag.FIXED_PARTITION
        and d.organize.unit_size != m.unit_size
    ):
        raise ParameterError("discipline and memory disagree on unit size")
    if d.select.tag not in (SelectTag.FIRST_FIT, SelectTag.BUDDY_FIT):
        raise ParameterError(f"{d.select.tag.value} selection does not allocate memory")
    return _grant(m, p.id, p.size)


def deallocate(m: MemoryState, pid: int) -> MemoryState:
    """Return pid's extents to the free space, merging where the
    organization allows: adjacent runs coalesce, buddy siblings merge."""
    extents = m.extents_of(pid)
    allocated = dict(m.allocated)
    del allocated[pid]
    if m.organizer.tag is OrganizeTag.BUDDY_TREE:
        assert m.buddy is not None
        tree = m.buddy
        for e in extents:
            tree = tree.release(e)
        return replace(m, allocated=allocated, buddy=tree, free=tree.free_extents())
    if m.organizer.tag is OrganizeTag.FIXED_PARTITION:
        free = tuple(sorted(m.free + extents, key=lambda e: e.start))
        return replace(m, allocated=allocated, free=free)
    return replace(m, allocated=allocated, free=_coalesce(m.free + extents))


@dataclass(frozen=True)
class Page:
    """One fixed-size chunk of a procedure's memory demand."""

    number: int
    length: int  # units actually used; only the last page may fall short


@dataclass(frozen=True)
class Pagination:
    """A procedure's demand cut into equal chunks."""

    pid: int
    page_size: int
    pages: tuple[Page, ...]

    @property
    def page_count(self) -> int:
        return len(self.pages)

    @property
    def internal_fragmentation(self) -> int:
        return self.page_count * self.page_size - sum(p.length for p in self.pages)


def paginate(p: Procedure, page_size: int) -> Pagination:
    """Cut p's memory demand into ceil(size / page_size) pages."""
    if page_size < 1:
        raise ParameterError(f"page size must be >= 1, got {page_size}")
    count = -(-p.size // page_size)
    pages = tuple(
        Page(i, min(page_size, p.size - i * page_size)) for i in range(count)
    )
    return Pagination(pid=p.id, page_size=page_size, pages=pages)


@dataclass(frozen=True)
class PageMap:
    """Injective binding of page numbers to frame numbers."""

    page_size: int
    entries: tuple[tuple[int, int], ...]  # (page, frame), ascending by page

    def __post_init__(self) -> None:
        pages = [page for page, _ in self.entries]
        frames = [frame for _, frame in self.entries]
        if pages != list(range(len(pages))):
            raise ParameterError("page numbers must be exactly 0..count-1")
        if len(set(frames)) != len(frames):
            raise ParameterError("two pages may not share a frame")

    @property
    def page_count(self) -> int:
        return len(self.entries)

    def frame_of(self, page: int) -> int:
        for p, f in self.entries:
            if p == page:
                return f
        raise TranslationFault(page, 1)

    def translate(self, logical: int) -> int:
        """Physical address of a logical one: frame base plus offset."""
        if logical < 0 or logical >= self.page_count * self.page_size:
            raise TranslationFault(logical, 1)
        page, offset = divmod(logical, self.page_size)
        return self.frame_of(page) * self.page_size + offset

    def to_layer(self, limit: int | None = None) -> "BindingLayer":
        """The map expanded to one address binding per logical unit."""
        span = self.page_count * self.page_size
        if limit is not None:
            span = min(span, limit)
        return BindingLayer({a: self.translate(a) for a in range(span)})


def build_page_table(
    pages: Pagination, m: MemoryState
) -> tuple[PageMap, MemoryState]:
    """Bind pages to the lowest free frames of a framed memory.

    Framing (fixed partitioning of memory) and pagination (fixed chunking
    of the demand) are independent; either may exist first. Building the
    table requires both, plus enough free frames.
    """
    if m.organizer.tag is not OrganizeTag.FIXED_PARTITION:
        raise ParameterError("page tables need a fixed-partitioned memory")
    if pages.page_size != m.unit_size:
        raise ParameterError(
            f"page size {pages.page_size} does not match frame size {m.unit_size}"
        )
    if pages.page_count > len(m.free):
        raise AllocationFailure(
            f"{pages.page_count} frames needed, {len(m.free)} free"
        )
    unit = m.unit_size or 1
    m2, granted = _grant(m, pages.pid, sum(p.length for p in pages.pages),
                         pages=pages.page_count)
    entries = tuple(
        (page.number, extent.start // unit)
        for page, extent in zip(pages.pages, granted)
    )
    return PageMap(page_size=pages.page_size, entries=entries), m2


@dataclass(frozen=True)
class SegmentMap:
    """Placement of a procedure's variable-sized chunks."""

    pid: int
    segments: tuple[tuple[int, int, int], ...]  # (segment id, length, base)

    def base_of(self, segment: int) -> int:
        for sid, _, base in self.segments:
            if sid == segment:
                return base
        raise NotFoundError(f"no segment {segment}")


def segment_alloc(
    p: Procedure,
    spec: Sequence[int],
    d: Discipline,
    m: MemoryState,
) -> tuple[SegmentMap, MemoryState]:
    """Place each segment independently through d, all or nothing.

    Segment lengths must each be >= 1 and sum to p's size. Any segment
    failing to fit rolls the whole operation back.
    """
    lengths = tuple(spec)
    if any(s < 1 for s in lengths):
        raise ParameterError("segment lengths must each be >= 1")
    if sum(lengths) != p.size:
        raise ParameterError(
            f"segments sum to {sum(lengths)}, procedure size is {p.size}"
        )
    if d.organize.tag is not OrganizeTag.IDENTITY or m.organizer.tag is not OrganizeTag.IDENTITY:
        raise ParameterError("segments place into an identity-organized memory")
    m2, granted = _grant(m, p.id, p.size, segments=lengths)
    segments = tuple(
        (i, length, extent.start)
        for i, (length, extent) in enumerate(zip(lengths, granted))
    )
    return SegmentMap(pid=p.id, segments=segments), m2


@dataclass(frozen=True)
class BindingLayer:
    """One virtualization hop: an injective partial map of addresses."""

    mapping: Mapping[int, int]

    def __post_init__(self) -> None:
        values = list(self.mapping.values())
        if len(set(values)) != len(values):
            raise ParameterError("binding layer must be injective")

    def lookup(self, address: int) -> int | None:
        return self.mapping.get(address)

    def __len__(self) -> int:
        return len(self.mapping)


def translate(address: int, chain: Sequence[BindingLayer]) -> int:
    """Image of an address through a chain of binding layers.

    An empty chain is the identity. An unmapped address raises a
    TranslationFault naming the 1-indexed faulting layer.
    """
    current = address
    for i, layer in enumerate(chain, start=1):
        bound = layer.lookup(current)
        if bound is None:
            raise TranslationFault(current, i)
        current = bound
    return current


@dataclass(frozen=True)
class SwapRecord:
    """Where a swapped-out procedure's contents live in the backing store."""

    pid: int
    size: int
    backing_extents: tuple[Extent, ...]
    units_held: int | None = None  # frame/unit count under fixed partitioning
    segments: tuple[int, ...] | None = None  # re-grant shape when segmented


def default_victim(candidates: Sequence[Procedure]) -> Procedure:
    """Lowest priority first (none counts lowest), then largest size,
    then highest id."""
    if not candidates:
        raise SwapFailure("no swappable resident procedure")
    key = lambda p: (p.priority if p.priority is not None else -1, -p.size, -p.id)
    return min(candidates, key=key)


def swap_out(
    m: MemoryState,
    backing: MemoryState,
    residents: Sequence[Procedure],
    policy: VictimPolicy = default_victim,
) -> tuple[MemoryState, MemoryState, SwapRecord]:
    """Evict one resident procedure's extents to the backing store.

    The victim comes from `policy` over the residents actually holding
    memory. Its contents are first-fit placed in the backing store; a
    full backing store fails the swap with the primary state unchanged.
    """
    candidates = [p for p in residents if m.holds(p.id)]
    if not candidates:
        raise SwapFailure("no swappable resident procedure")
    victim = policy(candidates)
    try:
        backing2, granted = _grant(backing, victim.id, victim.size)
    except AllocationFailure as exc:
        raise SwapFailure(f"backing store cannot hold procedure {victim.id}") from exc
    held = m.extents_of(victim.id)
    record = SwapRecord(
        pid=victim.id,
        size=victim.size,
        backing_extents=granted,
        units_held=(
            len(held) if m.organizer.tag is OrganizeTag.FIXED_PARTITION else None
        ),
        segments=victim.segments,
    )
    return deallocate(m, victim.id), backing2, record


def swap_in(
    m: MemoryState, backing: MemoryState, record: SwapRecord
) -> tuple[MemoryState, MemoryState, tuple[Extent, ...]]:
    """Restore a swapped-out procedure to primary memory.

    Residency may land at different addresses; the grant repeats the
    shape recorded at swap-out. Insufficient primary space raises
    AllocationFailure, which is retriable once memory frees up.
    """
    if m.organizer.tag is OrganizeTag.FIXED_PARTITION:
        m2, granted = _grant(m, record.pid, record.size, pages=record.units_held)
    else:
        m2, granted = _grant(m, record.pid, record.size, segments=record.segments)
    backing2 = deallocate(backing, record.pid)
    return m2, backing2, granted


def partition_by_owner(
    m: MemoryState, owners: Mapping[int, str]
) -> dict[str, tuple[Extent, ...]]:
    """Group allocated extents into equivalence classes by owner tag."""
    classes: dict[str, list[Extent]] = {}
    for pid, extents in m.allocated.items():
        owner = owners.get(pid)
        if owner is None:
            raise ParameterError(f"procedure {pid} has no owner")
        classes.setdefault(owner, []).extend(extents)
    return {
        owner: tuple(sorted(extents, key=lambda e: e.start))
        for owner, extents in classes.items()
    }
