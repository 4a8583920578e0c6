"""Routing feasibility on a fixed graph under a locked-capital budget.

The graph is given, so channel-opening costs are sunk; the budget covers
only the capital locked on edge sides.  Once every transaction is assigned
a path, the cheapest capital assignment is forced: each side needs exactly
its worst replay deficit.  The search therefore branches only over path
choices, pruning on the (monotone) capital lower bound of partial
assignments.

The number-partitioning problem embeds into this question on a four-node
cycle; ``partition_reduce`` builds that instance and ``partition_brute`` is
the independent pseudo-polynomial oracle.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import InstanceTooLarge
from .model import (
    ChannelNetwork,
    Edge,
    NodeId,
    Routing,
    Transaction,
    as_amount,
    canonical_edge,
)

MAX_TXS_DEFAULT = 12
MAX_PATHS_PER_PAIR_DEFAULT = 8


@dataclass(frozen=True)
class RestrictedInstance:
    """A fixed set of allowed channels, a trace, and a locked-capital budget."""

    node_count: int
    edges: tuple[Edge, ...]
    txs: tuple[Transaction, ...]
    budget: Fraction

    def __post_init__(self) -> None:
        edges = tuple(sorted(canonical_edge(*e) for e in self.edges))
        if len(set(edges)) != len(edges):
            raise ValueError("duplicate edges in the restricted graph")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "txs", tuple(self.txs))
        object.__setattr__(self, "budget", as_amount(self.budget))
        if self.budget < 0:
            raise ValueError("budget must be non-negative")
        for u, v in edges:
            if v >= self.node_count:
                raise ValueError(f"edge ({u}, {v}) outside node range")
        for tx in self.txs:
            if max(tx.sender, tx.receiver) >= self.node_count:
                raise ValueError(f"transaction endpoint outside node range: {tx}")


def _simple_paths(edges: Sequence[Edge], start: NodeId, goal: NodeId,
                  limit: int) -> list[tuple[NodeId, ...]]:
    """All simple start-goal paths in canonical order; errors past `limit`."""
    adjacency: dict[NodeId, list[NodeId]] = {}
    for u, v in edges:
        adjacency.setdefault(u, []).append(v)
        adjacency.setdefault(v, []).append(u)
    for nbs in adjacency.values():
        nbs.sort()
    paths: list[tuple[NodeId, ...]] = []

    def extend(node: NodeId, trail: list[NodeId], seen: set[NodeId]) -> None:
        if node == goal:
            paths.append(tuple(trail))
            if len(paths) > limit:
                raise InstanceTooLarge(
                    f"more than {limit} simple paths between {start} and {goal}")
            return
        for nb in adjacency.get(node, ()):
            if nb in seen:
                continue
            seen.add(nb)
            trail.append(nb)
            extend(nb, trail, seen)
            trail.pop()
            seen.remove(nb)

    if start in adjacency and goal in adjacency:
        extend(start, [start], {start})
    return paths


class _ReplayState:
    """Incremental per-side balances and minima with undo support."""

    def __init__(self) -> None:
        self.balance: dict[tuple[Edge, NodeId], Fraction] = {}
        self.minimum: dict[tuple[Edge, NodeId], Fraction] = {}
        self.required_total = Fraction(0)

    def apply_path(self, path: Sequence[NodeId], value: Fraction):
        log = []
        zero = Fraction(0)
        for a, b in zip(path, path[1:]):
            edge = canonical_edge(a, b)
            for key, delta in (((edge, a), -value), ((edge, b), value)):
                old_balance = self.balance.get(key, zero)
                old_minimum = self.minimum.get(key, zero)
                new_balance = old_balance + delta
                self.balance[key] = new_balance
                if new_balance < old_minimum:
                    self.minimum[key] = new_balance
                    self.required_total += old_minimum - new_balance
                log.append((key, old_balance, old_minimum))
        return log

    def undo(self, log) -> None:
        for key, old_balance, old_minimum in reversed(log):
            current_minimum = self.minimum.get(key, Fraction(0))
            if current_minimum < old_minimum:
                self.required_total -= old_minimum - current_minimum
            self.minimum[key] = old_minimum
            self.balance[key] = old_balance


def feasible_routing(inst: RestrictedInstance,
                     max_txs: int = MAX_TXS_DEFAULT,
                     max_paths_per_pair: int = MAX_PATHS_PER_PAIR_DEFAULT,
                     path_order_seed: Optional[int] = None,
                     ) -> Optional[tuple[Routing, ChannelNetwork]]:
    """Search for a path per transaction whose forced capital fits the budget.

    Returns the routing and a network carrying the minimal capital
    assignment, or None when no assignment fits.  ``path_order_seed``
    shuffles the per-pair path candidate order; the yes/no answer does not
    depend on it (only which certificate is returned).
    """
    if len(inst.txs) > max_txs:
        raise InstanceTooLarge(
            f"{len(inst.txs)} transactions exceed the search guard of {max_txs}")

    path_options: list[list[tuple[NodeId, ...]]] = []
    path_cache: dict[tuple[NodeId, NodeId], list[tuple[NodeId, ...]]] = {}
    for tx in inst.txs:
        key = (tx.sender, tx.receiver)
        if key not in path_cache:
            path_cache[key] = _simple_paths(inst.edges, tx.sender, tx.receiver,
                                            max_paths_per_pair)
        options = list(path_cache[key])
        if not options:
            return None
        path_options.append(options)
    if path_order_seed is not None:
        rng = random.Random(path_order_seed)
        for options in path_options:
            rng.shuffle(options)

    n = len(inst.txs)
    state = _ReplayState()
    chosen: list[tuple[NodeId, ...]] = [()] * n

    def search(i: int) -> bool:
        if state.required_total > inst.budget:
            return False
        if i == n:
            return True
        for path in path_options[i]:
            log = state.apply_path(path, inst.txs[i].value)
            chosen[i] = path
            if search(i + 1):
                return True
            state.undo(log)
        return False

    if not search(0):
        return None

    usage: dict[Edge, list[int]] = {edge: [0] * n for edge in inst.edges}
    for i, path in enumerate(chosen):
        for a, b in zip(path, path[1:]):
            edge = canonical_edge(a, b)
            usage[edge][i] = 1 if a == edge[0] else -1
    routing = Routing({edge: tuple(row) for edge, row in usage.items()})

    network = ChannelNetwork(inst.node_count)
    for edge in inst.edges:
        cap_left = -min(state.minimum.get((edge, edge[0]), Fraction(0)), Fraction(0))
        cap_right = -min(state.minimum.get((edge, edge[1]), Fraction(0)), Fraction(0))
        network.add_channel(edge[0], edge[1], cap_left, cap_right)
    return routing, network


# ---------------------------------------------------------------------------
# Number partitioning: oracle and reduction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PartitionInstance:
    """Split a multiset of positive integers into two equal-sum halves."""

    sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if not self.sizes:
            raise ValueError("the multiset must be nonempty")
        if any(s <= 0 for s in self.sizes):
            raise ValueError("sizes must be positive integers")


def partition_brute(p: PartitionInstance, max_n: int = 20) -> bool:
    """Equal-sum split decision by subset-sum table over the integer total."""
    if len(p.sizes) > max_n:
        raise InstanceTooLarge(f"{len(p.sizes)} elements exceed the guard of {max_n}")
    total = sum(p.sizes)
    if total % 2 != 0:
        return False
    half = total // 2
    reachable = 1  # bitset: bit s set when some subset sums to s
    for s in p.sizes:
        reachable |= reachable << s
    return bool(reachable & (1 << half))


# The four-node gadget: two disjoint two-hop routes between the pool node
# and the drain node.  Node labels used by the reduction, in dense order.
GADGET_B, GADGET_C, GADGET_D, GADGET_E = 0, 1, 2, 3
GADGET_EDGES: tuple[Edge, ...] = (
    canonical_edge(GADGET_E, GADGET_B),
    canonical_edge(GADGET_B, GADGET_D),
    canonical_edge(GADGET_D, GADGET_C),
    canonical_edge(GADGET_E, GADGET_C),
)


def partition_reduce(p: PartitionInstance) -> RestrictedInstance:
    """Encode an equal-split question as routing feasibility on a 4-cycle.

    All sizes are doubled so the half-sum transfers are integral; the
    decision is unchanged.  Four priming transactions load both two-hop
    routes, then one transaction per element must be split between the two
    routes, which is possible within the budget exactly when the multiset
    splits evenly.
    """
    sizes = tuple(2 * s for s in p.sizes)
    v = sum(sizes)
    half = Fraction(v, 2)
    txs = [
        Transaction(GADGET_D, GADGET_B, half),
        Transaction(GADGET_B, GADGET_E, half),
        Transaction(GADGET_D, GADGET_C, half),
        Transaction(GADGET_C, GADGET_E, half),
    ]
    txs.extend(Transaction(GADGET_E, GADGET_D, Fraction(s)) for s in sizes)
    return RestrictedInstance(node_count=4, edges=GADGET_EDGES,
                              txs=tuple(txs), budget=Fraction(2 * v))
