"""Exception types shared across the toolkit."""

from __future__ import annotations


class ChannelOptError(Exception):
    """Base class for all toolkit errors."""


class NotAnEndpoint(ChannelOptError):
    """A node was used against a channel it does not belong to."""


class InsufficientCapital(ChannelOptError):
    """A transfer would drive one side of a channel below zero."""

    def __init__(self, message: str, edge: tuple[int, int] | None = None):
        super().__init__(message)
        self.edge = edge


class MissingChannel(ChannelOptError):
    """A path step references a node pair with no open channel."""


class DisconnectedEndpoints(ChannelOptError):
    """A transaction's endpoints are not connected in the given tree."""


class InstanceTooLarge(ChannelOptError):
    """An exhaustive solver was asked to exceed its size guard."""


class InfeasibleRepair(ChannelOptError):
    """The scaled selection could not be repaired to a usable strategy.

    Raised only when at least one transaction is individually feasible,
    so an empty answer would be provably suboptimal.  The exact solver
    is the fallback for such instances.
    """


class CardinalityZero(ChannelOptError):
    """Subset-selection reductions require a nonempty target subset."""


class UnknownFixture(ChannelOptError):
    """Requested fixture name is not in the registry."""
