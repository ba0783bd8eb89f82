"""Exception hierarchy shared by every osalg module."""

from __future__ import annotations


class OsAlgError(Exception):
    """Base class for all osalg errors."""


class MalformedExtentError(OsAlgError):
    """Extent with start > end, or negative addresses."""


class BoundsError(OsAlgError, IndexError):
    """1-indexed access outside a set or tuple."""


class IllegalTransitionError(OsAlgError):
    """Lifecycle transition other than passive<->active."""


class ParameterError(OsAlgError, ValueError):
    """An operation parameter violates its precondition."""


class CompositionError(OsAlgError):
    """Select and organize operations target incompatible set shapes."""


class AllocationFailure(OsAlgError):
    """No extent, block, frame, or segment placement fits the demand.

    This is a signal, not a fatal condition: callers may swap a victim
    out and retry, or queue the request.
    """


class SwapFailure(OsAlgError):
    """The backing store cannot hold the victim's contents."""


class NotFoundError(OsAlgError, KeyError):
    """Referenced procedure id or block is not present."""


class StreamOrderError(OsAlgError):
    """Arrival stream yielded a procedure with a decreasing arrival."""


class ClockError(OsAlgError):
    """Event recorded with an instant earlier than the log's last one."""


class CycleError(OsAlgError):
    """Dependency relation contains a cycle."""

    def __init__(self, cycle: tuple[str, ...]):
        self.cycle = cycle
        super().__init__("cyclic dependencies: " + " -> ".join(cycle + cycle[:1]))


class TranslationFault(OsAlgError):
    """Address unmapped at some hop of a virtualization chain."""

    def __init__(self, address: int, layer: int):
        self.address = address
        self.layer = layer  # 1-indexed position of the faulting layer
        super().__init__(f"address {address} unmapped at layer {layer}")


class UnrunnableProcedureError(OsAlgError):
    """Procedure can never be made resident under the configured memory."""


class IncompleteRunError(OsAlgError):
    """Metrics requested for a trace whose procedures have not all completed."""


class WorkloadError(OsAlgError):
    """Workload text failed to parse or violated a record invariant."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
