"""Canonical workloads shared by the test suite and the CLI.

Each fixture bundles a transaction trace with the quantities a correct
solver must reproduce; the suite re-derives every expected number, so the
fixtures assert nothing on their own.  Serialized form is the trace format
plus a ``name.expected`` sidecar of ``key=value`` lines (exact rationals),
and a ``name.graph.csv`` file when a fixture carries a restricted graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence

from .errors import UnknownFixture
from .model import (
    ChannelNetwork,
    Edge,
    Routing,
    Strategy,
    Transaction,
)
from .restricted import PartitionInstance, partition_brute, partition_reduce
from .traceio import format_amount, format_graph, format_trace


@dataclass(frozen=True)
class Fixture:
    """An immutable named workload with its externally checkable quantities."""

    name: str
    txs: tuple[Transaction, ...]
    expected: dict[str, Fraction]
    provenance: str
    graph_edges: Optional[tuple[Edge, ...]] = None
    budget: Optional[Fraction] = None


def _unit_txs(pairs: Sequence[tuple[int, int]]) -> tuple[Transaction, ...]:
    return tuple(Transaction(s, r, Fraction(1)) for s, r in pairs)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def _lemma2_cycle(a: int = 12) -> Fixture:
    if a <= 11:
        raise ValueError("the cycle workload needs a > 11")
    pairs = []
    for sender, receiver in ((1, 0), (1, 2), (3, 2), (3, 4), (5, 4), (5, 0)):
        pairs.extend([(sender, receiver)] * a)
    return Fixture(
        name="lemma2_cycle",
        txs=_unit_txs(pairs),
        expected={
            "a": Fraction(a),
            "cycle_profit": Fraction(6 * a - 6),
            "budget": Fraction(6 * a + 6),
            "accepted": Fraction(6 * a),
            "tree_locked_lower_bound": Fraction(7 * a - 5),
        },
        provenance="six-node ring workload where a cycle design beats every spanning tree",
    )


def lemma2_cycle_solution(a: int = 12) -> tuple[tuple[Transaction, ...], Strategy,
                                                ChannelNetwork, Routing]:
    """The hand-built ring solution: all transactions, direct one-hop routes."""
    fixture = _lemma2_cycle(a)
    txs = fixture.txs
    ring = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]
    senders = {  # sender side of each ring edge carries capital a
        (0, 1): 1, (1, 2): 1, (2, 3): 3, (3, 4): 3, (4, 5): 5, (0, 5): 5,
    }
    network = ChannelNetwork(6)
    for (u, v) in ring:
        sender = senders[(u, v)]
        cap_u = Fraction(a) if sender == u else Fraction(0)
        cap_v = Fraction(a) if sender == v else Fraction(0)
        network.add_channel(u, v, cap_u, cap_v)
    usage = {edge: [0] * len(txs) for edge in ring}
    for i, tx in enumerate(txs):
        edge = tx.pair
        usage[edge][i] = 1 if tx.sender == edge[0] else -1
    routing = Routing({edge: tuple(row) for edge, row in usage.items()})
    strategy = Strategy((True,) * len(txs))
    return txs, strategy, network, routing


def _lemma_cc() -> Fixture:
    return Fixture(
        name="lemma_cc",
        txs=_unit_txs([(0, 1), (0, 1), (2, 3), (2, 3), (0, 2)]),
        expected={
            "profit_base": Fraction(2),
            "accepted": Fraction(4),
            "components": Fraction(2),
        },
        provenance="five transactions whose best design leaves two groups unconnected",
    )


def _fig1_star_gap() -> Fixture:
    pairs = [(3, 1), (3, 6), (1, 5), (4, 1), (5, 4),
             (3, 4), (2, 1), (1, 0), (0, 2), (2, 3)]
    return Fixture(
        name="fig1_star_gap",
        txs=_unit_txs(pairs),
        expected={
            "optimal_capital": Fraction(6),
            "best_star_capital": Fraction(7),
            "nodes": Fraction(7),
        },
        provenance="seven-node sequence where every star needs more capital than the best tree",
    )


def _adversary_values(length: int, first_accepted: bool) -> list[Fraction]:
    if length < 2:
        raise ValueError("adversary sequences need length >= 2")
    values = [Fraction(1), Fraction(5) if first_accepted else Fraction(4)]
    for i in range(2, length):
        values.append(Fraction(-10) if i % 2 == 0 else Fraction(10))
    return values


def _adversary_txs(values: Sequence[Fraction]) -> tuple[Transaction, ...]:
    txs = []
    for v in values:
        if v > 0:
            txs.append(Transaction(0, 1, v))
        else:
            txs.append(Transaction(1, 0, -v))
    return tuple(txs)


def _adversary_seq1(length: int = 8) -> Fixture:
    values = _adversary_values(length, first_accepted=True)
    return Fixture(
        name="adversary_seq1",
        txs=_adversary_txs(values),
        expected={
            "length": Fraction(length),
            "cap_each_side": Fraction(5),
            "offline_optimum": Fraction(length - 1),
        },
        provenance="stream shown after an accepted opener; only the opener must be denied offline",
    )


def _adversary_seq2(length: int = 8) -> Fixture:
    values = _adversary_values(length, first_accepted=False)
    return Fixture(
        name="adversary_seq2",
        txs=_adversary_txs(values),
        expected={
            "length": Fraction(length),
            "cap_each_side": Fraction(5),
            "offline_optimum": Fraction(length),
        },
        provenance="stream shown after a denied opener; everything fits offline",
    )


def _partition_gadget(sizes: Sequence[int] = (3, 34, 4, 12, 5, 2)) -> Fixture:
    inst = partition_reduce(PartitionInstance(tuple(sizes)))
    feasible = partition_brute(PartitionInstance(tuple(sizes)))
    return Fixture(
        name="partition_gadget",
        txs=inst.txs,
        expected={
            "budget": inst.budget,
            "feasible": Fraction(1 if feasible else 0),
            "transactions": Fraction(len(inst.txs)),
        },
        provenance="four-node cycle instance encoding an equal-split question",
        graph_edges=inst.edges,
        budget=inst.budget,
    )


_REGISTRY: dict[str, Callable[..., Fixture]] = {
    "lemma2_cycle": _lemma2_cycle,
    "lemma_cc": _lemma_cc,
    "fig1_star_gap": _fig1_star_gap,
    "adversary_seq1": _adversary_seq1,
    "adversary_seq2": _adversary_seq2,
    "partition_gadget": _partition_gadget,
}


def names() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def load(name: str, **params) -> Fixture:
    """Build a fixture from the registry; parameters as keyword arguments."""
    try:
        builder = _REGISTRY[name]
    except KeyError:
        raise UnknownFixture(
            f"unknown fixture {name!r}; available: {', '.join(names())}") from None
    return builder(**params)


def write_fixture(fixture: Fixture, directory: str | Path) -> list[Path]:
    """Serialize a fixture: trace, expected-value sidecar, optional graph."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    trace_path = directory / f"{fixture.name}.csv"
    trace_path.write_text(format_trace(fixture.txs, header=fixture.provenance),
                          encoding="utf-8", newline="\n")
    written.append(trace_path)
    expected_path = directory / f"{fixture.name}.expected"
    lines = [f"{key}={format_amount(value)}"
             for key, value in sorted(fixture.expected.items())]
    expected_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    written.append(expected_path)
    if fixture.graph_edges is not None:
        graph_path = directory / f"{fixture.name}.graph.csv"
        graph_path.write_text(format_graph(fixture.graph_edges), encoding="utf-8",
                              newline="\n")
        written.append(graph_path)
    return written
