"""Online channel provisioning around a hub, and the adaptive stream harness.

The provider keeps one channel per active node, toward and from the hub.
Every transaction is executed: when a spoke is missing it is opened with
both directions funded at the transaction value; when the needed direction
is short it is refunded by the transaction value on both sides.  Opening
and refunding each cost one unit, on top of the funds committed.

The adaptive stream demonstrates why acceptance choices cannot be made
online on a fixed channel: the second value revealed depends on the first
decision, and either way at most one transaction ever fits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .model import NodeId, Transaction, as_amount
from .single_channel import SignedTxSequence, exact_select

ADVERSARY_CAPACITY = Fraction(5)


@dataclass(frozen=True)
class SpokeState:
    """Capacities of one hub channel, split by direction."""

    toward_hub: Fraction
    from_hub: Fraction


@dataclass(frozen=True)
class OnlineStarState:
    """Hub-and-spoke provisioning state.

    ``event_cost`` counts channel openings and refunds; ``refunds`` tallies
    them per spoke and direction for the doubling diagnostics.  ``events``
    is the ordered log of paid actions ("open:node" / "refund:node:dir").
    """

    spokes: dict[NodeId, SpokeState] = field(default_factory=dict)
    event_cost: int = 0
    executed_count: int = 0
    refunds_toward: dict[NodeId, int] = field(default_factory=dict)
    refunds_from: dict[NodeId, int] = field(default_factory=dict)
    events: tuple[str, ...] = ()

    def funded_capital(self) -> Fraction:
        return sum((s.toward_hub + s.from_hub for s in self.spokes.values()),
                   Fraction(0))


def _ensure_and_execute(spokes: dict[NodeId, SpokeState], node: NodeId,
                        value: Fraction, direction: str,
                        refunds_toward: dict[NodeId, int],
                        refunds_from: dict[NodeId, int],
                        log: list[str]) -> int:
    """Open or refund the spoke as needed, then move the value. Returns cost."""
    cost = 0
    spoke = spokes.get(node)
    if spoke is None:
        spoke = SpokeState(toward_hub=value, from_hub=value)
        cost += 1
        log.append(f"open:{node}")
    else:
        short = spoke.toward_hub if direction == "toward" else spoke.from_hub
        if short < value:
            spoke = SpokeState(spoke.toward_hub + value, spoke.from_hub + value)
            cost += 1
            tally = refunds_toward if direction == "toward" else refunds_from
            tally[node] = tally.get(node, 0) + 1
            log.append(f"refund:{node}:{direction}")
    if direction == "toward":
        spoke = SpokeState(spoke.toward_hub - value, spoke.from_hub + value)
    else:
        spoke = SpokeState(spoke.toward_hub + value, spoke.from_hub - value)
    spokes[node] = spoke
    return cost


def online_step(state: OnlineStarState, tx: Transaction) -> OnlineStarState:
    """Process one transaction: provision both legs, then move the value.

    The sender leg tests the toward-hub direction, the receiver leg the
    from-hub direction.  Every transaction executes; capacities never go
    negative.
    """
    value = as_amount(tx.value)
    if value <= 0:
        raise ValueError("transaction value must be positive")
    spokes = dict(state.spokes)
    refunds_toward = dict(state.refunds_toward)
    refunds_from = dict(state.refunds_from)
    log: list[str] = []
    cost = state.event_cost
    cost += _ensure_and_execute(spokes, tx.sender, value, "toward",
                                refunds_toward, refunds_from, log)
    cost += _ensure_and_execute(spokes, tx.receiver, value, "from",
                                refunds_toward, refunds_from, log)
    return OnlineStarState(spokes=spokes, event_cost=cost,
                           executed_count=state.executed_count + 1,
                           refunds_toward=refunds_toward,
                           refunds_from=refunds_from,
                           events=state.events + tuple(log))


@dataclass(frozen=True)
class OnlineRunReport:
    """Outcome of an online run with per-spoke accounting."""

    final_state: OnlineStarState
    final_capital: Fraction
    event_cost: int

    @property
    def refund_counts(self) -> dict[tuple[NodeId, str], int]:
        counts: dict[tuple[NodeId, str], int] = {}
        for node, c in sorted(self.final_state.refunds_toward.items()):
            counts[(node, "toward")] = c
        for node, c in sorted(self.final_state.refunds_from.items()):
            counts[(node, "from")] = c
        return counts


def run_online_report(txs: Sequence[Transaction]) -> OnlineRunReport:
    state = OnlineStarState()
    for tx in txs:
        state = online_step(state, tx)
    capital = state.funded_capital() + state.event_cost
    return OnlineRunReport(final_state=state, final_capital=capital,
                           event_cost=state.event_cost)


def run_online(txs: Sequence[Transaction]) -> tuple[Fraction, int]:
    """Final committed capital (funds plus event costs) and the event count."""
    report = run_online_report(txs)
    return report.final_capital, report.event_cost


# ---------------------------------------------------------------------------
# Adaptive stream for single-channel acceptance policies
# ---------------------------------------------------------------------------

Policy = Callable[[int, Fraction], bool]


def always_accept(index: int, value: Fraction) -> bool:
    return True


def always_deny(index: int, value: Fraction) -> bool:
    return False


def table_policy(bits: str) -> Policy:
    """Decisions for the first len(bits) reveals from a 0/1 table, then accept."""
    table = tuple(c == "1" for c in bits)

    def policy(index: int, value: Fraction) -> bool:
        if index < len(table):
            return table[index]
        return True

    return policy


@dataclass(frozen=True)
class AdversaryTranscript:
    """Realized stream, the policy's granted decisions, and the offline mark."""

    values: tuple[Fraction, ...]
    requested: tuple[bool, ...]
    granted: tuple[bool, ...]
    accepted_count: int
    offline_optimum: int
    first_accepted: bool


def adversary_stream(policy: Policy, length: int) -> AdversaryTranscript:
    """Reveal values one by one, adapting to the policy's first decision.

    The channel holds 5 on each side.  The opening value is 1; if it is
    accepted the next value is 5, otherwise 4; afterwards the full capacity
    swings back and forth (-10, +10, ...).  A grant requires the running
    balance of accepted values to stay inside the band, so infeasible
    acceptances are denied regardless of the policy.
    """
    if length < 2:
        raise ValueError("the stream needs at least two transactions")
    cap = ADVERSARY_CAPACITY
    values: list[Fraction] = []
    requested: list[bool] = []
    granted: list[bool] = []
    balance = Fraction(0)
    first_accepted = False
    for i in range(length):
        if i == 0:
            value = Fraction(1)
        elif i == 1:
            value = Fraction(5) if first_accepted else Fraction(4)
        else:
            value = Fraction(-10) if i % 2 == 0 else Fraction(10)
        values.append(value)
        wants = bool(policy(i, value))
        feasible = -cap <= balance + value <= cap
        take = wants and feasible
        if take:
            balance += value
            if i == 0:
                first_accepted = True
        requested.append(wants)
        granted.append(take)
    seq = SignedTxSequence(tuple(values), cap_send=cap, cap_recv=cap)
    offline = exact_select(seq).accepted_count
    return AdversaryTranscript(values=tuple(values), requested=tuple(requested),
                               granted=tuple(granted),
                               accepted_count=sum(granted),
                               offline_optimum=offline,
                               first_accepted=first_accepted)


# ---------------------------------------------------------------------------
# Competitive experiment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompetitiveReport:
    """Online capital against the offline star baseline on the same trace."""

    online_capital: Fraction
    online_events: int
    offline_capital: Fraction
    offline_locked: Fraction
    offline_center: Optional[NodeId]
    ratio: Optional[Fraction]
    refund_counts: dict[tuple[NodeId, str], int]


def competitive_report(txs: Sequence[Transaction]) -> CompetitiveReport:
    """Run the online provisioner and the offline best star on one trace."""
    from .design import best_star

    online = run_online_report(txs)
    if txs:
        offline = best_star(txs)
        edges = offline.network.edges()
        shared = set(edges[0]).intersection(*map(set, edges)) if edges else set()
        center = min(shared) if shared else None
        offline_capital = offline.capital
        offline_locked = offline.locked
    else:
        center = None
        offline_capital = Fraction(0)
        offline_locked = Fraction(0)
    ratio = None
    if offline_capital > 0:
        ratio = online.final_capital / offline_capital
    return CompetitiveReport(online_capital=online.final_capital,
                             online_events=online.event_cost,
                             offline_capital=offline_capital,
                             offline_locked=offline_locked,
                             offline_center=center,
                             ratio=ratio,
                             refund_counts=online.refund_counts)
