"""The select/organize algebra.

An ``Organize`` reshapes a set without creating or destroying members:
identity keeps the order, sort reorders procedures by a projection,
fixed-size partitioning cuts memory into equal allocation units, and the
buddy organizer views it as a binary tree of power-of-two blocks. A
``Select`` returns a member (or extent of members) of the organized set.
Composing one of each yields a ``Discipline``, the executable form of a
resource-management algorithm: first-come-first-served is identity
selection over an identity organization, shortest-job-first is identity
selection over a sort, buddy allocation is tree-fit selection over the
buddy organization.

Organize always runs before select, and either half may be constructed
first: disciplines are plain values.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Iterable, Sequence

from .core import Extent, Procedure, ProcedureSet, ResourceKind, ResourceSet
from .errors import (
    AllocationFailure,
    BoundsError,
    CompositionError,
    NotFoundError,
    ParameterError,
)


class SortKey(Enum):
    """Projection an organize_sort orders by."""

    SIZE = "size"
    TIME = "time"
    PRIORITY = "priority"

    def value_of(self, p: Procedure) -> int:
        if not isinstance(p, Procedure):
            raise ParameterError(f"sort keys apply to procedures, got {type(p).__name__}")
        if self is SortKey.PRIORITY:
            if p.priority is None:
                raise ParameterError(f"procedure {p.id} has no priority")
            return p.priority
        return p.size if self is SortKey.SIZE else p.time


@dataclass(frozen=True)
class PartitionedSet:
    """Memory cut into equal allocation units plus an unusable residue."""

    units: tuple[Extent, ...]
    unit_size: int
    residue: Extent | None = None

    def __iter__(self):
        return iter(self.units)

    def __len__(self) -> int:
        return len(self.units)


@dataclass(frozen=True)
class BuddyNode:
    """One block of a buddy tree.

    A childless node is a whole block: a free block when ``used`` is
    false, an allocated one when true. A node with children is split and
    the children carry the state.
    """

    extent: Extent
    used: bool = False
    left: "BuddyNode | None" = None
    right: "BuddyNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def split_extents(self) -> tuple[Extent, Extent]:
        """The two half extents any non-unit block divides into."""
        if self.extent.size < 2:
            raise ParameterError("unit blocks do not split")
        mid = self.extent.start + self.extent.size // 2
        return Extent(self.extent.start, mid), Extent(mid, self.extent.end)


@dataclass(frozen=True)
class BuddyTree:
    """A persistent binary buddy tree over ``[0, capacity)``.

    Mutating operations return a new tree; eager sibling merging keeps
    the invariant that no two free sibling blocks coexist.
    """

    capacity: int
    root: BuddyNode

    @property
    def depth(self) -> int:
        """Levels between the root block and unit blocks."""
        return self.capacity.bit_length() - 1

    def block_size_for(self, q: int) -> int:
        """Smallest power of two holding a demand of q units."""
        if q < 1:
            raise ParameterError(f"demand must be >= 1, got {q}")
        return 1 << (q - 1).bit_length()

    def allocate(self, q: int) -> tuple[Extent, "BuddyTree"]:
        """Mark the leftmost fitting block used; split larger free blocks.

        Raises AllocationFailure when no free block can hold q units.
        """
        block = self.block_size_for(q)
        if block > self.capacity:
            raise AllocationFailure(f"demand {q} exceeds capacity {self.capacity}")
        result = _buddy_alloc(self.root, block)
        if result is None:
            raise AllocationFailure(f"no free block of {block} units")
        node, extent = result
        return extent, BuddyTree(self.capacity, node)

    def release(self, extent: Extent) -> "BuddyTree":
        """Free an allocated block, merging free siblings all the way up."""
        node = _buddy_free(self.root, extent)
        if node is None:
            raise NotFoundError(f"no allocated block {extent}")
        return BuddyTree(self.capacity, node)

    def free_extents(self) -> tuple[Extent, ...]:
        return tuple(e for e, used in _buddy_leaves(self.root) if not used)

    def used_extents(self) -> tuple[Extent, ...]:
        return tuple(e for e, used in _buddy_leaves(self.root) if used)


def _buddy_alloc(node: BuddyNode, block: int) -> tuple[BuddyNode, Extent] | None:
    if node.used or node.extent.size < block:
        return None
    if node.is_leaf:
        if node.extent.size == block:
            return replace(node, used=True), node.extent
        left_ext, right_ext = node.split_extents()
        sub = _buddy_alloc(BuddyNode(left_ext), block)
        assert sub is not None  # fresh free half always fits a smaller block
        child, extent = sub
        return BuddyNode(node.extent, left=child, right=BuddyNode(right_ext)), extent
    for side in ("left", "right"):
        child = getattr(node, side)
        sub = _buddy_alloc(child, block)
        if sub is not None:
            return replace(node, **{side: sub[0]}), sub[1]
    return None


def _buddy_free(node: BuddyNode, extent: Extent) -> BuddyNode | None:
    if node.is_leaf:
        if node.used and node.extent == extent:
            return BuddyNode(node.extent)
        return None
    assert node.left is not None and node.right is not None
    for side in ("left", "right"):
        child = getattr(node, side)
        if child.extent.encloses(extent):
            freed = _buddy_free(child, extent)
            if freed is None:
                return None
            merged = replace(node, **{side: freed})
            left, right = merged.left, merged.right
            if left.is_leaf and right.is_leaf and not left.used and not right.used:
                return BuddyNode(node.extent)  # merge free siblings
            return merged
    return None


def _buddy_leaves(node: BuddyNode) -> Iterable[tuple[Extent, bool]]:
    if node.is_leaf:
        yield node.extent, node.used
    else:
        yield from _buddy_leaves(node.left)
        yield from _buddy_leaves(node.right)


def _members(x: Any) -> tuple:
    """Materialize the members of a set-like value in its current order."""
    if isinstance(x, ProcedureSet):
        return x.members
    if isinstance(x, ResourceSet):
        if x.kind is not ResourceKind.FINITE_REUSABLE:
            raise ParameterError("cannot materialize an infinite resource set")
        return x.units
    if isinstance(x, PartitionedSet):
        return x.units
    return tuple(x)


def organize_identity(x: Any) -> tuple:
    """Leave the set as found: output order equals input order."""
    return _members(x)


def organize_sort(procedures: Any, key: SortKey | str) -> tuple[Procedure, ...]:
    """Stable ascending sort by the key projection, ids breaking ties."""
    key = SortKey(key) if not isinstance(key, SortKey) else key
    members = _members(procedures)
    return tuple(sorted(members, key=lambda p: (key.value_of(p), p.id)))


def organize_fixed_partition(resource: ResourceSet, unit_size: int) -> PartitionedSet:
    """Cut memory into equal allocation units, address ordered.

    A trailing remainder smaller than one unit is recorded as unusable
    residue rather than becoming an odd-sized unit.
    """
    if unit_size < 1:
        raise ParameterError(f"unit size must be >= 1, got {unit_size}")
    if resource.kind is not ResourceKind.FINITE_REUSABLE:
        raise ParameterError("only finite resource sets partition")
    capacity = resource.capacity or 0
    count = capacity // unit_size
    units = tuple(
        Extent(i * unit_size, (i + 1) * unit_size) for i in range(count)
    )
    cut = count * unit_size
    residue = Extent(cut, capacity) if cut < capacity else None
    return PartitionedSet(units=units, unit_size=unit_size, residue=residue)


def organize_buddy(resource: ResourceSet) -> BuddyTree:
    """View memory as a binary tree of power-of-two blocks, all free."""
    if resource.kind is not ResourceKind.FINITE_REUSABLE:
        raise ParameterError("only finite resource sets organize into a buddy tree")
    capacity = resource.capacity or 0
    if capacity < 1 or capacity & (capacity - 1):
        raise ParameterError(f"buddy capacity must be a power of two, got {capacity}")
    return BuddyTree(capacity, BuddyNode(Extent(0, capacity)))


def select_identity(organized: Any, i: int) -> Any:
    """The i-th member of the organized set, 1-indexed."""
    members = _members(organized)
    if not 1 <= i <= len(members):
        raise BoundsError(f"index {i} outside 1..{len(members)}")
    return members[i - 1]


def select_first_fit(free_extents: Sequence[Extent], q: int) -> Extent:
    """The q-unit prefix of the lowest-addressed free extent holding q."""
    if q < 1:
        raise ParameterError(f"demand must be >= 1, got {q}")
    for free in free_extents:
        if free.size >= q:
            return Extent(free.start, free.start + q)
    raise AllocationFailure(f"no free extent of {q} units")


def select_buddy(tree: BuddyTree, q: int) -> tuple[Extent, BuddyTree]:
    """Allocate from a buddy tree; returns the block and the new tree."""
    return tree.allocate(q)


def select_argmax_priority(organized: Any) -> Procedure:
    """The highest-priority member, lowest id breaking ties."""
    members = _members(organized)
    if not members:
        raise BoundsError("empty set has no members to select")
    for p in members:
        if not isinstance(p, Procedure) or p.priority is None:
            raise ParameterError("priority selection needs priorities on every member")
    return max(members, key=lambda p: (p.priority, -p.id))


class OrganizeTag(Enum):
    IDENTITY = "identity"
    SORT = "sort"
    FIXED_PARTITION = "fixed-partition"
    BUDDY_TREE = "buddy-tree"


class SelectTag(Enum):
    IDENTITY = "identity"
    FIRST_FIT = "first-fit"
    BUDDY_FIT = "buddy-fit"
    ARGMAX_PRIORITY = "argmax-priority"


# Set shapes each select knows how to consume.
_COMPATIBLE = {
    SelectTag.IDENTITY: {
        OrganizeTag.IDENTITY,
        OrganizeTag.SORT,
        OrganizeTag.FIXED_PARTITION,
    },
    SelectTag.FIRST_FIT: {OrganizeTag.IDENTITY, OrganizeTag.FIXED_PARTITION},
    SelectTag.BUDDY_FIT: {OrganizeTag.BUDDY_TREE},
    SelectTag.ARGMAX_PRIORITY: {OrganizeTag.IDENTITY, OrganizeTag.SORT},
}


@dataclass(frozen=True)
class Organize:
    """A tagged organize operation, applicable as a callable."""

    tag: OrganizeTag
    key: SortKey | None = None
    unit_size: int | None = None

    @staticmethod
    def identity() -> "Organize":
        return Organize(OrganizeTag.IDENTITY)

    @staticmethod
    def sort(key: SortKey | str) -> "Organize":
        return Organize(OrganizeTag.SORT, key=SortKey(key))

    @staticmethod
    def fixed_partition(unit_size: int) -> "Organize":
        if unit_size < 1:
            raise ParameterError(f"unit size must be >= 1, got {unit_size}")
        return Organize(OrganizeTag.FIXED_PARTITION, unit_size=unit_size)

    @staticmethod
    def buddy() -> "Organize":
        return Organize(OrganizeTag.BUDDY_TREE)

    def __call__(self, x: Any) -> Any:
        if self.tag is OrganizeTag.IDENTITY:
            return organize_identity(x)
        if self.tag is OrganizeTag.SORT:
            assert self.key is not None
            return organize_sort(x, self.key)
        if self.tag is OrganizeTag.FIXED_PARTITION:
            assert self.unit_size is not None
            return organize_fixed_partition(x, self.unit_size)
        return organize_buddy(x)


@dataclass(frozen=True)
class Select:
    """A tagged select operation, applicable as a callable."""

    tag: SelectTag
    index: int | None = None

    @staticmethod
    def identity(i: int) -> "Select":
        if i < 1:
            raise ParameterError(f"selection index must be >= 1, got {i}")
        return Select(SelectTag.IDENTITY, index=i)

    @staticmethod
    def first_fit() -> "Select":
        return Select(SelectTag.FIRST_FIT)

    @staticmethod
    def buddy_fit() -> "Select":
        return Select(SelectTag.BUDDY_FIT)

    @staticmethod
    def argmax_priority() -> "Select":
        return Select(SelectTag.ARGMAX_PRIORITY)

    def __call__(self, organized: Any, demand: int | None = None) -> Any:
        if self.tag is SelectTag.IDENTITY:
            assert self.index is not None
            return select_identity(organized, self.index)
        if self.tag is SelectTag.FIRST_FIT:
            if demand is None:
                raise ParameterError("first-fit selection needs a demand")
            return select_first_fit(_members(organized), demand)
        if self.tag is SelectTag.BUDDY_FIT:
            if demand is None:
                raise ParameterError("buddy selection needs a demand")
            return select_buddy(organized, demand)
        return select_argmax_priority(organized)


@dataclass(frozen=True)
class Discipline:
    """A composed (select, organize) pair; organize always runs first."""

    select: Select
    organize: Organize

    def apply(self, x: Any, demand: int | None = None) -> Any:
        return self.select(self.organize(x), demand)


def compose(select: Select, organize: Organize) -> Discipline:
    """Pair a select with an organize, rejecting shape mismatches."""
    if organize.tag not in _COMPATIBLE[select.tag]:
        raise CompositionError(
            f"{select.tag.value} selection cannot consume a "
            f"{organize.tag.value} organization"
        )
    return Discipline(select=select, organize=organize)
