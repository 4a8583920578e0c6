"""Independent reference implementations used only to cross-check the package.

Nothing here shares code with the solvers under test: paths come from
networkx, capital requirements from direct prefix series, and optima from
plain enumeration.
"""

import itertools
import random
from fractions import Fraction

import networkx as nx

from channelopt.model import ProfitValue


def exhaustive_best_designs(txs):
    """Optimal profit over ALL graphs on the transaction nodes.

    Enumerates every edge subset; a transaction executes when its endpoints
    are connected.  Returns the best profit and the executed sets of every
    optimal design.
    """
    nodes = sorted({n for tx in txs for n in (tx.sender, tx.receiver)})
    pairs = list(itertools.combinations(nodes, 2))
    best = ProfitValue(0, 0)
    best_executed = [frozenset()]
    for r in range(len(pairs) + 1):
        for edge_set in itertools.combinations(pairs, r):
            graph = nx.Graph()
            graph.add_nodes_from(nodes)
            graph.add_edges_from(edge_set)
            component = {n: i for i, comp in enumerate(nx.connected_components(graph))
                         for n in comp}
            executed = frozenset(
                i for i, tx in enumerate(txs)
                if component[tx.sender] == component[tx.receiver])
            profit = ProfitValue(len(executed) - len(edge_set), len(executed))
            if profit > best:
                best = profit
                best_executed = [executed]
            elif profit.sort_key() == best.sort_key():
                best_executed.append(executed)
    return best, best_executed


def closed_form_tree_capitals(edges, txs):
    """Per-side capital for a tree by direct prefix extremes, via networkx paths."""
    graph = nx.Graph()
    graph.add_edges_from(edges)
    flows = {tuple(sorted(e)): [] for e in edges}
    for tx in txs:
        path = nx.shortest_path(graph, tx.sender, tx.receiver)
        for a, b in zip(path, path[1:]):
            edge = (a, b) if a < b else (b, a)
            flows[edge].append(tx.value if a == edge[0] else -tx.value)
    capitals = {}
    for edge, series in flows.items():
        running = Fraction(0)
        high = Fraction(0)
        low = Fraction(0)
        for delta in series:
            running += delta
            high = max(high, running)
            low = min(low, running)
        capitals[(edge, edge[0])] = high
        capitals[(edge, edge[1])] = -low
    return capitals


def random_tree_search_min_capital(txs, seed, samples=300):
    """Randomized spanning-tree search for the cheapest full-execution forest.

    Independent of the exhaustive oracle: samples random trees per
    transacting component and prices them with the closed-form pass.
    """
    rng = random.Random(seed)
    pair_graph = nx.Graph()
    for tx in txs:
        pair_graph.add_edge(tx.sender, tx.receiver)
    total = Fraction(0)
    for comp in nx.connected_components(pair_graph):
        comp = sorted(comp)
        comp_txs = [tx for tx in txs if tx.sender in set(comp)]
        if len(comp) == 1:
            continue
        best = None
        for _ in range(samples):
            if len(comp) == 2:
                edges = [(comp[0], comp[1])]
            else:
                sequence = [rng.choice(comp) for _ in range(len(comp) - 2)]
                edges = list(nx.from_prufer_sequence(
                    [comp.index(s) for s in sequence]).edges())
                edges = [(comp[a], comp[b]) for a, b in edges]
            capitals = closed_form_tree_capitals(edges, comp_txs)
            locked = sum(capitals.values(), Fraction(0))
            if best is None or locked < best:
                best = locked
        total += best
    return total
