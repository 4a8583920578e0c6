"""Network design for executing transactions at maximum profit.

The profit of a design is the number of executed transactions minus the
number of opened channels, compared lexicographically so that among equal
bases the design executing fewer transactions wins (each execution costs an
infinitesimal fee discount).  With unlimited capital the optimal design is a
forest: transactions execute exactly when their endpoints are connected, so
the problem reduces to choosing which node groups to join.

``build_max_profit_forest`` joins groups in three escalating ways, each of
which strictly improves profit and is therefore part of every optimum:

1. direct pairs with at least two transactions,
2. group pairs whose combined cross traffic reaches two,
3. cycle structures in the remaining cross graph (a cycle of k groups has k
   crossing transactions but needs only k - 1 edges).

Bridges in the cross graph are never contracted: the edge would pay for
itself exactly, and the extra execution loses the fee tie-break.  At the
fixpoint no coarsening can improve the profit, which makes the result the
unique optimum.

Capital for a fixed forest is assigned by replaying the executed sequence
and charging each side its worst historical deficit.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from heapq import heappop, heappush
from typing import Iterable, Iterator, Optional, Sequence

from .errors import DisconnectedEndpoints, InstanceTooLarge
from .model import (
    ChannelNetwork,
    Edge,
    NodeId,
    ProfitValue,
    Transaction,
    canonical_edge,
    locked_capital,
    total_capital,
)


@dataclass(frozen=True)
class DesignResult:
    """A designed network with its executed set, profit, and capital cost.

    ``capital`` includes one unit of opening cost per channel; ``locked``
    is the funds on channel sides only.
    """

    network: ChannelNetwork
    executed: frozenset[int]
    profit: ProfitValue
    capital: Fraction
    locked: Fraction


class UnionFind:
    def __init__(self) -> None:
        self.parent: dict[int, int] = {}

    def find(self, x: int) -> int:
        parent = self.parent
        if x not in parent:
            parent[x] = x
            return x
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if ra > rb:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


# ---------------------------------------------------------------------------
# Token-ledger capital accounting
# ---------------------------------------------------------------------------

class TokenLedger:
    """Running balance and historical minimum per channel side.

    Replaying a transaction sequence through the ledger yields, per side,
    the minimum capital that must be locked up front: the negated worst
    deficit, clamped at zero.
    """

    def __init__(self) -> None:
        self.balances: dict[tuple[Edge, NodeId], Fraction] = {}
        self.minima: dict[tuple[Edge, NodeId], Fraction] = {}

    def transfer(self, a: NodeId, b: NodeId, value: Fraction) -> None:
        """Move `value` across the (a, b) channel from a's side to b's."""
        edge = canonical_edge(a, b)
        zero = Fraction(0)
        out_key, in_key = (edge, a), (edge, b)
        new_out = self.balances.get(out_key, zero) - value
        self.balances[out_key] = new_out
        if new_out < self.minima.get(out_key, zero):
            self.minima[out_key] = new_out
        self.balances[in_key] = self.balances.get(in_key, zero) + value

    def required_capital(self, edge: Edge, node: NodeId) -> Fraction:
        low = self.minima.get((canonical_edge(*edge), node), Fraction(0))
        return -low if low < 0 else Fraction(0)


def _tree_paths(edges: Sequence[Edge]) -> dict[NodeId, list[NodeId]]:
    adjacency: dict[NodeId, list[NodeId]] = {}
    for u, v in edges:
        adjacency.setdefault(u, []).append(v)
        adjacency.setdefault(v, []).append(u)
    return adjacency


def _path_in_tree(adjacency: dict[NodeId, list[NodeId]],
                  start: NodeId, goal: NodeId) -> Optional[list[NodeId]]:
    if start == goal:
        return [start]
    if start not in adjacency or goal not in adjacency:
        return None
    parent: dict[NodeId, NodeId] = {start: start}
    frontier = [start]
    while frontier:
        nxt = []
        for node in frontier:
            for nb in adjacency[node]:
                if nb in parent:
                    continue
                parent[nb] = node
                if nb == goal:
                    path = [goal]
                    while path[-1] != start:
                        path.append(parent[path[-1]])
                    path.reverse()
                    return path
                nxt.append(nb)
        frontier = nxt
    return None


def capitals_for_tree(edges: Sequence[Edge],
                      txs: Sequence[Transaction]) -> dict[tuple[Edge, NodeId], Fraction]:
    """Replay `txs` along unique tree paths; return per-side required capital."""
    adjacency = _tree_paths(edges)
    ledger = TokenLedger()
    for tx in txs:
        path = _path_in_tree(adjacency, tx.sender, tx.receiver)
        if path is None:
            raise DisconnectedEndpoints(
                f"no tree path from {tx.sender} to {tx.receiver}")
        for a, b in zip(path, path[1:]):
            ledger.transfer(a, b, tx.value)
    capitals: dict[tuple[Edge, NodeId], Fraction] = {}
    for u, v in edges:
        edge = canonical_edge(u, v)
        capitals[(edge, edge[0])] = ledger.required_capital(edge, edge[0])
        capitals[(edge, edge[1])] = ledger.required_capital(edge, edge[1])
    return capitals


def _network_from_capitals(edges: Sequence[Edge],
                           capitals: dict[tuple[Edge, NodeId], Fraction],
                           node_count: int) -> ChannelNetwork:
    net = ChannelNetwork(node_count)
    for edge in sorted(canonical_edge(*e) for e in edges):
        net.add_channel(edge[0], edge[1],
                        capitals.get((edge, edge[0]), Fraction(0)),
                        capitals.get((edge, edge[1]), Fraction(0)))
    return net


def assign_capital_tree(tree: ChannelNetwork,
                        txs: Sequence[Transaction]) -> ChannelNetwork:
    """Set every channel side of an acyclic network to its replay minimum.

    The resulting network executes the whole sequence along unique tree
    paths with no capital shortfall, and no side can be reduced further.
    """
    edges = tree.edges()
    uf = UnionFind()
    for u, v in edges:
        if not uf.union(u, v):
            raise ValueError(f"network contains a cycle through edge ({u}, {v})")
    capitals = capitals_for_tree(edges, txs)
    return _network_from_capitals(edges, capitals, tree.node_count)


# ---------------------------------------------------------------------------
# Maximum-profit forest
# ---------------------------------------------------------------------------

def _find_bridges(vertices: Sequence[int],
                  adjacency: dict[int, list[tuple[int, int]]]) -> set[int]:
    """Bridge edges of a simple graph, as edge indices; iterative DFS."""
    visited: set[int] = set()
    disc: dict[int, int] = {}
    low: dict[int, int] = {}
    bridges: set[int] = set()
    counter = itertools.count()
    for root in vertices:
        if root in visited:
            continue
        stack: list[tuple[int, int, Iterator[tuple[int, int]]]] = []
        visited.add(root)
        disc[root] = low[root] = next(counter)
        stack.append((root, -1, iter(adjacency.get(root, ()))))
        while stack:
            node, in_edge, neighbors = stack[-1]
            advanced = False
            for nb, edge_idx in neighbors:
                if edge_idx == in_edge:
                    continue
                if nb not in visited:
                    visited.add(nb)
                    disc[nb] = low[nb] = next(counter)
                    stack.append((nb, edge_idx, iter(adjacency.get(nb, ()))))
                    advanced = True
                    break
                low[node] = min(low[node], disc[nb])
            if advanced:
                continue
            stack.pop()
            if stack:
                parent, parent_in_edge, _ = stack[-1]
                low[parent] = min(low[parent], low[node])
                if low[node] > disc[parent]:
                    bridges.add(in_edge)
    return bridges


def build_max_profit_forest(txs: Sequence[Transaction]) -> DesignResult:
    """Optimal unlimited-capital design: which node groups to connect.

    Runs the pair scan plus the cross-traffic and cycle merges to a
    fixpoint, spans each final group with edges drawn from actual
    transacting pairs (first appearance order), and prices the result with
    the token ledger.
    """
    uf = UnionFind()
    pair_count: dict[Edge, int] = {}
    for tx in txs:
        pair = tx.pair
        pair_count[pair] = pair_count.get(pair, 0) + 1
        uf.find(tx.sender)
        uf.find(tx.receiver)

    edges: list[Edge] = []
    for pair, count in pair_count.items():
        if count >= 2 and uf.union(*pair):
            edges.append(pair)

    while True:
        cross: dict[tuple[int, int], int] = {}
        witness: dict[tuple[int, int], Edge] = {}
        for pair, count in pair_count.items():
            ra, rb = uf.find(pair[0]), uf.find(pair[1])
            if ra == rb:
                continue
            key = (ra, rb) if ra < rb else (rb, ra)
            cross[key] = cross.get(key, 0) + count
            witness.setdefault(key, pair)

        merged = False
        for key, count in cross.items():
            if count >= 2 and uf.union(*witness[key]):
                edges.append(witness[key])
                merged = True
        if merged:
            continue

        # Cross counts are all one now; contract every cycle structure.
        keys = list(cross)
        adjacency: dict[int, list[tuple[int, int]]] = {}
        for idx, (ra, rb) in enumerate(keys):
            adjacency.setdefault(ra, []).append((rb, idx))
            adjacency.setdefault(rb, []).append((ra, idx))
        bridges = _find_bridges(sorted(adjacency), adjacency)
        for idx, key in enumerate(keys):
            if idx in bridges:
                continue
            if uf.union(*witness[key]):
                edges.append(witness[key])
                merged = True
        if not merged:
            break

    executed = frozenset(
        i for i, tx in enumerate(txs) if uf.find(tx.sender) == uf.find(tx.receiver))
    executed_txs = [txs[i] for i in sorted(executed)]
    node_count = max((max(tx.sender, tx.receiver) for tx in txs), default=-1) + 1
    capitals = capitals_for_tree(edges, executed_txs)
    network = _network_from_capitals(edges, capitals, node_count)
    profit = ProfitValue(len(executed) - len(edges), len(executed))
    return DesignResult(network=network, executed=executed, profit=profit,
                        capital=total_capital(network), locked=locked_capital(network))


# ---------------------------------------------------------------------------
# Star designs
# ---------------------------------------------------------------------------

def build_star(txs: Sequence[Transaction], center: NodeId) -> DesignResult:
    """Star design with the given hub, executing the profitable transactions.

    The star spans every node that survives participation pruning, plus the
    center; the executed set is the one the optimal design would execute,
    so the star is a drop-in, topology-restricted alternative to it.
    """
    from .preprocess import prune_single_participation

    if center < 0:
        raise ValueError("center must be a valid node id")
    kept = prune_single_participation(txs).kept
    executed = build_max_profit_forest(txs).executed
    nodes = sorted({n for tx in kept for n in (tx.sender, tx.receiver)} | {center})
    edges = [canonical_edge(center, node) for node in nodes if node != center]
    ledger = TokenLedger()
    for i in sorted(executed):
        tx = txs[i]
        if tx.sender == center or tx.receiver == center:
            ledger.transfer(tx.sender, tx.receiver, tx.value)
        else:
            ledger.transfer(tx.sender, center, tx.value)
            ledger.transfer(center, tx.receiver, tx.value)
    capitals = {}
    for edge in edges:
        capitals[(edge, edge[0])] = ledger.required_capital(edge, edge[0])
        capitals[(edge, edge[1])] = ledger.required_capital(edge, edge[1])
    node_count = max(nodes, default=-1) + 1
    network = _network_from_capitals(edges, capitals, node_count)
    profit = ProfitValue(len(executed) - len(edges), len(executed))
    return DesignResult(network=network, executed=executed, profit=profit,
                        capital=total_capital(network), locked=locked_capital(network))


def best_star(txs: Sequence[Transaction]) -> DesignResult:
    """Cheapest star over all candidate centers.

    Candidates are every transaction node plus one fresh hub node.  Ordered
    by total capital, then locked capital, then center id for determinism.
    """
    nodes = sorted({n for tx in txs for n in (tx.sender, tx.receiver)})
    fresh = (nodes[-1] + 1) if nodes else 0
    best: Optional[tuple[tuple[Fraction, Fraction, int], DesignResult]] = None
    for center in [*nodes, fresh]:
        result = build_star(txs, center)
        key = (result.capital, result.locked, center)
        if best is None or key < best[0]:
            best = (key, result)
    return best[1]


# ---------------------------------------------------------------------------
# Exhaustive minimum-capital oracle
# ---------------------------------------------------------------------------

def _spanning_trees(nodes: Sequence[NodeId]) -> Iterator[tuple[Edge, ...]]:
    """All labeled spanning trees on `nodes`, decoded from index sequences."""
    k = len(nodes)
    if k <= 1:
        yield ()
        return
    if k == 2:
        yield (canonical_edge(nodes[0], nodes[1]),)
        return
    for seq in itertools.product(range(k), repeat=k - 2):
        degree = [1] * k
        for s in seq:
            degree[s] += 1
        leaves = [i for i in range(k) if degree[i] == 1]
        heap = list(leaves)
        heap.sort()
        local_edges = []
        for s in seq:
            leaf = heappop(heap)
            local_edges.append((leaf, s))
            degree[s] -= 1
            if degree[s] == 1:
                heappush(heap, s)
        local_edges.append((heappop(heap), heappop(heap)))
        yield tuple(sorted(canonical_edge(nodes[a], nodes[b]) for a, b in local_edges))


def _component_min_tree(nodes: Sequence[NodeId], txs: Sequence[Transaction],
                        threads: int = 1) -> tuple[Fraction, tuple[Edge, ...],
                                                   dict[tuple[Edge, NodeId], Fraction]]:
    """Cheapest spanning tree of one transacting component, by replay capital."""

    def evaluate(tree: tuple[Edge, ...]):
        capitals = capitals_for_tree(tree, txs)
        locked = sum(capitals.values(), Fraction(0))
        return (locked, tree, capitals)

    trees = list(_spanning_trees(nodes))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            evaluated = list(pool.map(evaluate, trees))
    else:
        evaluated = [evaluate(t) for t in trees]
    return min(evaluated, key=lambda item: (item[0], item[1]))


def exact_min_capital(txs: Sequence[Transaction], max_nodes: int = 7,
                      max_txs: int = 16, threads: int = 1) -> DesignResult:
    """Minimum-capital forest executing every transaction, by exhaustion.

    Each transacting component is spanned by its cheapest spanning tree
    (all labeled trees are priced by replay).  Ties break toward the
    lexicographically smallest edge set.  Guarded: exhaustive enumeration.
    """
    nodes = sorted({n for tx in txs for n in (tx.sender, tx.receiver)})
    if len(nodes) > max_nodes:
        raise InstanceTooLarge(f"{len(nodes)} nodes exceed the oracle guard of {max_nodes}")
    if len(txs) > max_txs:
        raise InstanceTooLarge(f"{len(txs)} transactions exceed the oracle guard of {max_txs}")

    uf = UnionFind()
    for tx in txs:
        uf.union(tx.sender, tx.receiver)
    components: dict[int, list[NodeId]] = {}
    for node in nodes:
        components.setdefault(uf.find(node), []).append(node)

    all_edges: list[Edge] = []
    all_capitals: dict[tuple[Edge, NodeId], Fraction] = {}
    for root in sorted(components):
        comp_nodes = sorted(components[root])
        comp_set = set(comp_nodes)
        comp_txs = [tx for tx in txs if tx.sender in comp_set]
        _, tree, capitals = _component_min_tree(comp_nodes, comp_txs, threads=threads)
        all_edges.extend(tree)
        all_capitals.update(capitals)

    node_count = (nodes[-1] + 1) if nodes else 0
    network = _network_from_capitals(all_edges, all_capitals, node_count)
    executed = frozenset(range(len(txs)))
    profit = ProfitValue(len(txs) - len(all_edges), len(txs))
    return DesignResult(network=network, executed=executed, profit=profit,
                        capital=total_capital(network), locked=locked_capital(network))
