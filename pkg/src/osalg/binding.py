"""Binding-before-use validation.

The graph records Bind and Use events against a non-decreasing clock and
checks them after the fact: a use of a symbol is only legal when some
binding of that symbol sits at an earlier or equal instant, and declared
dependencies constrain the order in which bindings themselves may appear.
Undeclared bindings are independent and may land in any order. Violations
are data, not errors.

The classic memory-management instance: framing memory and paginating a
program are independent bindings, and both must exist before the page
table that binds pages to frames is built and used.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Sequence

from .errors import ClockError, CycleError


class EventKind(Enum):
    BIND = "Bind"
    USE = "Use"


@dataclass(frozen=True)
class BindingEvent:
    symbol: str
    kind: EventKind
    instant: int


@dataclass(frozen=True)
class Violation:
    """One breach of the binding rules, located at an event or a pair of
    symbols."""

    kind: str  # "use-before-bind" | "dependency-order"
    symbol: str
    instant: int | None = None
    required: str | None = None  # the symbol that had to be bound first

    def __str__(self) -> str:
        if self.kind == "use-before-bind":
            return f"{self.symbol} used at {self.instant} with no prior binding"
        return f"{self.required} must be bound before {self.symbol}"


@dataclass(frozen=True)
class BindingGraph:
    """Append-only log of binding/use events plus a dependency relation.

    A dependency pair (a, b) reads: a must be bound before b is bound.
    Rebinding is allowed; the latest binding at or before a use governs.
    """

    events: tuple[BindingEvent, ...] = ()
    dependencies: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self) -> None:
        instants = [e.instant for e in self.events]
        if any(b < a for a, b in zip(instants, instants[1:])):
            raise ClockError("event instants must be non-decreasing")
        symbols = {s for pair in self.dependencies for s in pair}
        _topological_orders(tuple(sorted(symbols)), self.dependencies, check_only=True)

    def with_dependency(self, first: str, then: str) -> "BindingGraph":
        """Declare that `first` must be bound before `then`."""
        deps = frozenset(self.dependencies | {(first, then)})
        return replace(self, dependencies=deps)


def record(
    g: BindingGraph, symbol: str, kind: EventKind | str, instant: int
) -> BindingGraph:
    """Append one event; instants may never decrease."""
    kind = EventKind(kind) if not isinstance(kind, EventKind) else kind
    if g.events and instant < g.events[-1].instant:
        raise ClockError(
            f"instant {instant} precedes last recorded {g.events[-1].instant}"
        )
    return replace(g, events=g.events + (BindingEvent(symbol, kind, instant),))


def validate(g: BindingGraph) -> list[Violation]:
    """Every breach of bind-before-use and of the dependency order.

    A use at instant t is legal when some binding of the same symbol
    exists at an instant <= t, so binding and using at the same instant
    is allowed. A dependency (a, b) is violated when b's first binding
    strictly precedes a's, or when b is bound and a never is.
    """
    violations: list[Violation] = []
    first_bind: dict[str, int] = {}
    for e in g.events:
        if e.kind is EventKind.BIND:
            first_bind.setdefault(e.symbol, e.instant)
    for e in g.events:
        if e.kind is EventKind.USE:
            bound = e.symbol in first_bind and first_bind[e.symbol] <= e.instant
            if not bound:
                violations.append(
                    Violation("use-before-bind", e.symbol, instant=e.instant)
                )
    for first, then in sorted(g.dependencies):
        if then not in first_bind:
            continue
        if first not in first_bind or first_bind[then] < first_bind[first]:
            violations.append(Violation("dependency-order", then, required=first))
    return violations


def legal_orderings(
    symbols: Iterable[str], dependencies: Iterable[tuple[str, str]]
) -> list[tuple[str, ...]]:
    """All orders in which the symbols may be bound.

    Exactly the topological orders of the dependency relation, sorted
    lexicographically. Cyclic dependencies raise CycleError naming one
    cycle.
    """
    return _topological_orders(tuple(symbols), frozenset(dependencies))


def _topological_orders(
    symbols: tuple[str, ...],
    dependencies: frozenset[tuple[str, str]],
    check_only: bool = False,
) -> list[tuple[str, ...]]:
    nodes = sorted(set(symbols) | {s for pair in dependencies for s in pair})
    _find_cycle(nodes, dependencies)
    if check_only:
        return []
    blockers: dict[str, set[str]] = {n: set() for n in nodes}
    for first, then in dependencies:
        blockers[then].add(first)
    orders: list[tuple[str, ...]] = []

    def extend(prefix: list[str], placed: set[str]) -> None:
        if len(prefix) == len(nodes):
            orders.append(tuple(prefix))
            return
        for n in nodes:
            if n not in placed and blockers[n] <= placed:
                prefix.append(n)
                placed.add(n)
                extend(prefix, placed)
                placed.remove(n)
                prefix.pop()

    extend([], set())
    return orders


def _find_cycle(nodes: Sequence[str], dependencies: frozenset[tuple[str, str]]) -> None:
    successors: dict[str, list[str]] = {n: [] for n in nodes}
    for first, then in sorted(dependencies):
        successors[first].append(then)
    state: dict[str, int] = {}  # 1 = on stack, 2 = done
    stack: list[str] = []

    def visit(node: str) -> None:
        state[node] = 1
        stack.append(node)
        for nxt in successors[node]:
            if state.get(nxt) == 1:
                cycle = tuple(stack[stack.index(nxt):])
                raise CycleError(cycle)
            if nxt not in state:
                visit(nxt)
        stack.pop()
        state[node] = 2

    for n in nodes:
        if n not in state:
            visit(n)


def export_edges(g: BindingGraph) -> str:
    """Dependency edges and the event log as plain text, one item per
    line, for external graph viewers."""
    lines = ["# dependencies"]
    lines.extend(f"{first} -> {then}" for first, then in sorted(g.dependencies))
    lines.append("# events")
    lines.extend(f"{e.instant} {e.kind.value} {e.symbol}" for e in g.events)
    return "\n".join(lines) + "\n"
