"""Core domain types: transactions, channels, networks, and solution checking.

All amounts are exact rationals (`fractions.Fraction`).  Feasibility questions
are answered by exact inequalities, so no floating point appears anywhere in
this module.

Sign convention for per-edge routing entries: every channel is stored with its
lower node id on the left.  A routing entry of +1 moves value from the left
side toward the right side, -1 the opposite way.  The running prefix sum of
signed values on an edge must therefore stay within ``[-cap_right, cap_left]``
at every step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import (
    InsufficientCapital,
    MissingChannel,
    NotAnEndpoint,
)

NodeId = int
AmountLike = Union[int, str, Fraction]

Edge = tuple[NodeId, NodeId]


def as_amount(value: AmountLike) -> Fraction:
    """Coerce an input to an exact Fraction amount."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as an exact amount")


def canonical_edge(u: NodeId, v: NodeId) -> Edge:
    """Return the unordered node pair in canonical (low, high) orientation."""
    if u == v:
        raise ValueError(f"self-loop edge ({u}, {v}) is not a channel")
    return (u, v) if u < v else (v, u)


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Transaction:
    """A value transfer request from one node to another.

    Values are strictly positive; direction is carried by sender/receiver.
    """

    sender: NodeId
    receiver: NodeId
    value: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", as_amount(self.value))
        if self.sender < 0 or self.receiver < 0:
            raise ValueError("node ids must be non-negative")
        if self.sender == self.receiver:
            raise ValueError("sender and receiver must differ")
        if self.value <= 0:
            raise ValueError("transaction value must be positive")

    @property
    def pair(self) -> Edge:
        return canonical_edge(self.sender, self.receiver)


@dataclass(frozen=True)
class ChannelState:
    """One payment channel with capital locked on each side.

    ``left < right`` is canonical; both capitals are non-negative at all
    times.  Moving value across the channel shifts capital between the two
    sides but never changes their sum.
    """

    left: NodeId
    right: NodeId
    cap_left: Fraction
    cap_right: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "cap_left", as_amount(self.cap_left))
        object.__setattr__(self, "cap_right", as_amount(self.cap_right))
        if self.left >= self.right:
            raise ValueError("channel endpoints must satisfy left < right")
        if self.left < 0:
            raise ValueError("node ids must be non-negative")
        if self.cap_left < 0 or self.cap_right < 0:
            raise ValueError("channel capitals must be non-negative")

    @property
    def edge(self) -> Edge:
        return (self.left, self.right)

    @property
    def total(self) -> Fraction:
        return self.cap_left + self.cap_right

    def side_of(self, node: NodeId) -> str:
        if node == self.left:
            return "left"
        if node == self.right:
            return "right"
        raise NotAnEndpoint(f"node {node} is not an endpoint of {self.edge}")

    def capital_on(self, node: NodeId) -> Fraction:
        return self.cap_left if self.side_of(node) == "left" else self.cap_right


def apply_transfer(channel: ChannelState, from_node: NodeId, value: AmountLike) -> ChannelState:
    """Move `value` from one side of a channel to the other.

    Returns the new channel state; the input state is unchanged.  Raises
    InsufficientCapital if the sending side holds less than `value`, and
    NotAnEndpoint if `from_node` is neither endpoint.
    """
    value = as_amount(value)
    if value <= 0:
        raise ValueError("transfer value must be positive")
    side = channel.side_of(from_node)
    if side == "left":
        if channel.cap_left < value:
            raise InsufficientCapital(
                f"side {channel.left} of {channel.edge} holds {channel.cap_left}, "
                f"needs {value}",
                edge=channel.edge,
            )
        return ChannelState(channel.left, channel.right,
                            channel.cap_left - value, channel.cap_right + value)
    if channel.cap_right < value:
        raise InsufficientCapital(
            f"side {channel.right} of {channel.edge} holds {channel.cap_right}, "
            f"needs {value}",
            edge=channel.edge,
        )
    return ChannelState(channel.left, channel.right,
                        channel.cap_left + value, channel.cap_right - value)


class ChannelNetwork:
    """An undirected channel graph with per-side capital on every edge.

    At most one channel per node pair; endpoints must be below
    ``node_count``.  Instances have value semantics: `copy()` yields an
    independent network, and equality compares full state.
    """

    def __init__(self, node_count: int = 0):
        if node_count < 0:
            raise ValueError("node_count must be non-negative")
        self.node_count = node_count
        self._channels: dict[Edge, ChannelState] = {}

    # -- construction -------------------------------------------------

    @classmethod
    def from_channels(cls, node_count: int, channels: Iterable[ChannelState]) -> "ChannelNetwork":
        net = cls(node_count)
        for ch in channels:
            net.add_channel(ch.left, ch.right, ch.cap_left, ch.cap_right)
        return net

    def add_channel(self, u: NodeId, v: NodeId,
                    cap_u: AmountLike = 0, cap_v: AmountLike = 0) -> None:
        """Open a channel between u and v with the given per-side capital.

        ``cap_u`` funds u's side regardless of orientation.
        """
        edge = canonical_edge(u, v)
        if edge in self._channels:
            raise ValueError(f"channel {edge} already open")
        if edge[1] >= self.node_count:
            raise ValueError(f"endpoint {edge[1]} outside node range 0..{self.node_count - 1}")
        cap_u, cap_v = as_amount(cap_u), as_amount(cap_v)
        if u > v:
            cap_u, cap_v = cap_v, cap_u
        self._channels[edge] = ChannelState(edge[0], edge[1], cap_u, cap_v)

    # -- access --------------------------------------------------------

    def has_channel(self, u: NodeId, v: NodeId) -> bool:
        return canonical_edge(u, v) in self._channels

    def channel(self, u: NodeId, v: NodeId) -> ChannelState:
        edge = canonical_edge(u, v)
        try:
            return self._channels[edge]
        except KeyError:
            raise MissingChannel(f"no channel between {edge[0]} and {edge[1]}") from None

    def set_channel(self, state: ChannelState) -> None:
        if state.edge not in self._channels:
            raise MissingChannel(f"no channel between {state.left} and {state.right}")
        self._channels[state.edge] = state

    def edges(self) -> tuple[Edge, ...]:
        return tuple(sorted(self._channels))

    def channels(self) -> Iterator[ChannelState]:
        for edge in sorted(self._channels):
            yield self._channels[edge]

    @property
    def edge_count(self) -> int:
        return len(self._channels)

    def copy(self) -> "ChannelNetwork":
        net = ChannelNetwork(self.node_count)
        net._channels = dict(self._channels)
        return net

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ChannelNetwork):
            return NotImplemented
        return (self.node_count == other.node_count
                and self._channels == other._channels)

    def __repr__(self) -> str:
        return f"ChannelNetwork(nodes={self.node_count}, edges={self.edges()})"


def route_path(network: ChannelNetwork, path: Sequence[NodeId],
               value: AmountLike) -> ChannelNetwork:
    """Route `value` along consecutive channels of `path`.

    The transfer is atomic: if any hop lacks capital or a channel is
    missing, the original network is returned unchanged (the error is
    raised before any visible mutation).
    """
    value = as_amount(value)
    if len(path) < 2:
        raise ValueError("path needs at least two nodes")
    result = network.copy()
    for a, b in zip(path, path[1:]):
        ch = result.channel(a, b)
        result.set_channel(apply_transfer(ch, a, value))
    return result


def total_capital(network: ChannelNetwork) -> Fraction:
    """Locked capital on all channel sides plus one unit opening cost per channel."""
    locked = sum((ch.total for ch in network.channels()), Fraction(0))
    return locked + network.edge_count


def locked_capital(network: ChannelNetwork) -> Fraction:
    """Capital locked on channel sides, excluding opening costs."""
    return sum((ch.total for ch in network.channels()), Fraction(0))


# ---------------------------------------------------------------------------
# Strategies, routings, and profit comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Strategy:
    """Per-transaction accept/reject decisions."""

    decisions: tuple[bool, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "decisions", tuple(bool(d) for d in self.decisions))

    @classmethod
    def from_bits(cls, bits: str) -> "Strategy":
        return cls(tuple(c == "1" for c in bits))

    def __len__(self) -> int:
        return len(self.decisions)

    def __iter__(self) -> Iterator[bool]:
        return iter(self.decisions)

    @property
    def accepted_count(self) -> int:
        return sum(self.decisions)

    @property
    def accepted_indices(self) -> tuple[int, ...]:
        return tuple(i for i, d in enumerate(self.decisions) if d)

    def bits(self) -> str:
        return "".join("1" if d else "0" for d in self.decisions)


@dataclass(frozen=True)
class Routing:
    """Per-edge signed usage of each transaction.

    ``usage[edge][i]`` is +1 if transaction i crosses `edge` left to right,
    -1 right to left, and 0 if it does not use the edge.
    """

    usage: Mapping[Edge, tuple[int, ...]]

    def __post_init__(self) -> None:
        frozen = {}
        for edge, entries in dict(self.usage).items():
            edge = canonical_edge(*edge)
            entries = tuple(int(x) for x in entries)
            if any(x not in (-1, 0, 1) for x in entries):
                raise ValueError(f"routing entries on {edge} must be -1, 0, or +1")
            frozen[edge] = entries
        object.__setattr__(self, "usage", frozen)

    def entries(self, edge: Edge) -> tuple[int, ...]:
        return self.usage.get(canonical_edge(*edge), ())


def _totally_ordered(cls):
    cls.__lt__ = lambda self, other: self.sort_key() < other.sort_key()
    cls.__le__ = lambda self, other: self.sort_key() <= other.sort_key()
    cls.__gt__ = lambda self, other: self.sort_key() > other.sort_key()
    cls.__ge__ = lambda self, other: self.sort_key() >= other.sort_key()
    return cls


@_totally_ordered
@dataclass(frozen=True)
class ProfitValue:
    """Profit under a per-transaction fee infinitesimally below one.

    ``base`` is accepted transactions minus opened channels.  The fee on
    each accepted transaction falls short of 1 by an arbitrarily small
    amount, so comparison is lexicographic: larger base wins, and on equal
    base the solution accepting FEWER transactions is strictly better.
    """

    base: int
    accepted: int

    def __post_init__(self) -> None:
        if self.accepted < 0:
            raise ValueError("accepted count cannot be negative")

    def sort_key(self) -> tuple[int, int]:
        return (self.base, -self.accepted)


# ---------------------------------------------------------------------------
# Solution validation
# ---------------------------------------------------------------------------

@dataclass
class ValidationReport:
    """Outcome of checking a full solution against the three constraints.

    Violations are reported, never raised: each constraint is judged
    independently so a report can show exactly what failed.
    """

    c1_profit_ok: bool
    c2_capital_ok: bool
    c3_budget_ok: bool
    routing_ok: bool
    profit: ProfitValue
    spent_capital: Fraction
    c2_violations: list[tuple[Edge, int]] = field(default_factory=list)
    messages: list[str] = field(default_factory=list)

    @property
    def all_ok(self) -> bool:
        return (self.c1_profit_ok and self.c2_capital_ok
                and self.c3_budget_ok and self.routing_ok)


def _check_route_shape(tx: Transaction, hops: list[tuple[NodeId, NodeId]]) -> str | None:
    """Verify the signed hops form one simple sender-to-receiver path."""
    if not hops:
        return "accepted transaction uses no edges"
    step_from: dict[NodeId, NodeId] = {}
    for a, b in hops:
        if a in step_from:
            return f"node {a} has two outgoing hops"
        step_from[a] = b
    current = tx.sender
    visited = {current}
    for _ in range(len(hops)):
        if current not in step_from:
            return f"path interrupted at node {current}"
        current = step_from.pop(current)
        if current in visited:
            return f"path revisits node {current}"
        visited.add(current)
    if step_from:
        return "routing contains hops disconnected from the path"
    if current != tx.receiver:
        return f"path ends at {current}, not the receiver {tx.receiver}"
    return None


def c2_prefix_sums_ok(txs: Sequence[Transaction], network: ChannelNetwork,
                      routing: Routing) -> list[tuple[Edge, int]]:
    """Closed-form capital check: every prefix sum within [-cap_right, cap_left].

    Returns the (edge, prefix index) pairs that violate the bound; empty
    means the constraint holds.  Prefix indices are 1-based positions in
    the transaction sequence.
    """
    violations = []
    for edge in network.edges():
        ch = network.channel(*edge)
        entries = routing.entries(edge)
        prefix = Fraction(0)
        for j, tx in enumerate(txs, start=1):
            sign = entries[j - 1] if j - 1 < len(entries) else 0
            prefix += sign * tx.value
            if not (-ch.cap_right <= prefix <= ch.cap_left):
                violations.append((edge, j))
    return violations


def c2_by_simulation(txs: Sequence[Transaction], network: ChannelNetwork,
                     routing: Routing) -> list[tuple[Edge, int]]:
    """Capital check by replaying transfers on a network copy.

    Independent of the closed-form pass: walks each transaction's signed
    edge entries and applies the transfers, recording the first failing
    prefix per edge.  Used to cross-check `c2_prefix_sums_ok`.
    """
    state = {edge: network.channel(*edge) for edge in network.edges()}
    dead: set[Edge] = set()
    violations = []
    for j, tx in enumerate(txs, start=1):
        for edge in network.edges():
            if edge in dead:
                continue
            entries = routing.entries(edge)
            sign = entries[j - 1] if j - 1 < len(entries) else 0
            if sign == 0:
                continue
            mover = edge[0] if sign == 1 else edge[1]
            try:
                state[edge] = apply_transfer(state[edge], mover, tx.value)
            except InsufficientCapital:
                violations.append((edge, j))
                dead.add(edge)
    return sorted(violations)


def validate_solution(txs: Sequence[Transaction], strategy: Strategy,
                      network: ChannelNetwork, routing: Routing,
                      capital_budget: AmountLike,
                      profit_target: int) -> ValidationReport:
    """Independently check the three solution constraints plus routing shape.

    c1: accepted count minus edge count reaches the profit target.
    c2: every edge's signed prefix sum stays within its capital bounds.
    c3: locked capital plus opening costs stays within the budget.
    """
    capital_budget = as_amount(capital_budget)
    n = len(txs)
    if len(strategy) != n:
        raise ValueError("strategy length must match the transaction count")
    messages: list[str] = []

    # Routing well-formedness: entries only on accepted transactions, and a
    # single consistently oriented path per accepted transaction.
    routing_ok = True
    for edge, entries in routing.usage.items():
        if len(entries) != n:
            routing_ok = False
            messages.append(f"edge {edge}: routing row has length {len(entries)}, expected {n}")
        if not network.has_channel(*edge):
            routing_ok = False
            messages.append(f"edge {edge}: routing row for a channel that is not open")
    for i, tx in enumerate(txs):
        hops = []
        for edge, entries in routing.usage.items():
            sign = entries[i] if i < len(entries) else 0
            if sign == 1:
                hops.append(edge)
            elif sign == -1:
                hops.append((edge[1], edge[0]))
        if not strategy.decisions[i]:
            if hops:
                routing_ok = False
                messages.append(f"tx {i}: rejected but routed on {sorted(hops)}")
            continue
        problem = _check_route_shape(tx, hops)
        if problem is not None:
            routing_ok = False
            messages.append(f"tx {i}: {problem}")

    accepted = strategy.accepted_count
    profit = ProfitValue(accepted - network.edge_count, accepted)
    c1_ok = profit.base >= profit_target
    if not c1_ok:
        messages.append(f"profit base {profit.base} below target {profit_target}")

    c2_violations = c2_prefix_sums_ok(txs, network, routing)
    c2_ok = not c2_violations
    for edge, j in c2_violations:
        messages.append(f"edge {edge}: capital bound violated at prefix {j}")

    spent = total_capital(network)
    c3_ok = spent <= capital_budget
    if not c3_ok:
        messages.append(f"spent capital {spent} exceeds budget {capital_budget}")

    return ValidationReport(
        c1_profit_ok=c1_ok,
        c2_capital_ok=c2_ok,
        c3_budget_ok=c3_ok,
        routing_ok=routing_ok,
        profit=profit,
        spent_capital=spent,
        c2_violations=c2_violations,
        messages=messages,
    )
