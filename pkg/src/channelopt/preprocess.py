"""Input pruning and profitable-transaction classification.

A node that participates (as sender or receiver, combined) in only one
transaction can never pay for its own channel, so that transaction is safe
to drop before any optimization.  Removing a transaction can push another
node down to a single participation, so the sweep iterates to a fixpoint.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .model import NodeId, Transaction


@dataclass(frozen=True)
class PruneReport:
    """Result of pruning: surviving transactions plus removal attributions.

    Each removed entry names the node that was down to a single
    participation when the transaction was dropped.  ``rounds`` counts the
    fixpoint sweeps that removed at least one transaction.
    """

    kept: tuple[Transaction, ...]
    removed: tuple[tuple[Transaction, NodeId], ...]
    rounds: int


def prune_single_participation(txs: Sequence[Transaction]) -> PruneReport:
    """Drop transactions touching a node with fewer than two participations.

    Iterates to a fixpoint so cascades are handled; kept transactions stay
    in their original relative order.  When both endpoints qualify at the
    same time, the removal is attributed to the lower node id.
    """
    kept: list[Transaction] = list(txs)
    removed: list[tuple[Transaction, NodeId]] = []
    rounds = 0
    while True:
        counts: Counter[NodeId] = Counter()
        for tx in kept:
            counts[tx.sender] += 1
            counts[tx.receiver] += 1
        lonely = {node for node, c in counts.items() if c < 2}
        if not lonely:
            break
        rounds += 1
        surviving = []
        for tx in kept:
            causes = sorted(n for n in (tx.sender, tx.receiver) if n in lonely)
            if causes:
                removed.append((tx, causes[0]))
            else:
                surviving.append(tx)
        kept = surviving
    return PruneReport(kept=tuple(kept), removed=tuple(removed), rounds=rounds)


def classify_profitable(txs: Sequence[Transaction]) -> frozenset[int]:
    """Indices of transactions executed by the profit-maximizing design.

    Delegates to the forest builder: a transaction is profitable exactly
    when the optimal unlimited-capital design connects its endpoints.
    """
    from .design import build_max_profit_forest

    return frozenset(build_max_profit_forest(txs).executed)
