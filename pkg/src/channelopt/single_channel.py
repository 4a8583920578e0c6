"""Transaction selection on a single channel.

Given a sequence of signed values (positive left-to-right, negative the
other way) and a capital bound per direction, pick a maximum set of
transactions whose running prefix sum never leaves the feasible band.

Two routes are provided and cross-checked in the test suite:

* ``exact_select`` - exact optimum, via a pseudo-polynomial table when the
  balance axis is small enough in exact units, otherwise depth-first search
  behind a size guard.
* ``fptas_select`` - approximation scheme with a table budget polynomial in
  ``n`` and ``1/epsilon``.  On instances whose exact-unit axis fits the
  budget the scheme runs the exact table and is optimal; otherwise it scales
  values down, solves the rounded instance, re-verifies the selection with
  true values and repairs it by dropping offenders.

The fixed-cardinality subset-sum problem reduces to this selection problem;
``fwss_reduce`` emits the reduced instance and ``fwss_brute`` is the
independent oracle for it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import CardinalityZero, InfeasibleRepair, InstanceTooLarge
from .model import AmountLike, Strategy, Transaction, as_amount

# Above this many transactions the depth-first fallback is refused.
DFS_GUARD_DEFAULT = 24
# Cell budget for the exact table route (rows x balance states).
EXACT_DP_CELL_BUDGET = 20_000_000
# The scaled scheme runs its exact-unit table whenever the axis fits the
# larger of the scheme's own budget and this constant floor; small exact
# tables are cheaper than scaling and never lose precision.
EXACT_GATE_FLOOR = 4096
# Refinement limits for the scaled scheme: resolution doublings tried when
# the repaired selection cannot certify the approximation bound, and the
# largest table any single refined pass may allocate.
MAX_REFINEMENTS = 16
SCALED_CELL_CAP = 20_000_000


@dataclass(frozen=True)
class SignedTxSequence:
    """Single-channel instance: signed values plus per-direction capital.

    ``cap_send`` bounds positive prefix sums (value flowing left to right),
    ``cap_recv`` bounds the magnitude of negative prefix sums.
    """

    values: tuple[Fraction, ...]
    cap_send: Fraction
    cap_recv: Fraction

    def __post_init__(self) -> None:
        values = tuple(as_amount(v) for v in self.values)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "cap_send", as_amount(self.cap_send))
        object.__setattr__(self, "cap_recv", as_amount(self.cap_recv))
        if any(v == 0 for v in values):
            raise ValueError("signed transaction values must be nonzero")
        if self.cap_send < 0 or self.cap_recv < 0:
            raise ValueError("capacities must be non-negative")

    def __len__(self) -> int:
        return len(self.values)

    def prefix_feasible(self, decisions: Sequence[bool]) -> bool:
        """Exact check: accepted prefix sums stay within the capital band."""
        balance = Fraction(0)
        for accept, value in zip(decisions, self.values):
            if not accept:
                continue
            balance += value
            if balance > self.cap_send or balance < -self.cap_recv:
                return False
        return True

    def first_violation(self, decisions: Sequence[bool]) -> Optional[int]:
        """Index of the first accepted transaction that breaks the band."""
        balance = Fraction(0)
        for i, (accept, value) in enumerate(zip(decisions, self.values)):
            if not accept:
                continue
            balance += value
            if balance > self.cap_send or balance < -self.cap_recv:
                return i
        return None


def signed_sequence_from_transactions(
        txs: Sequence[Transaction], cap_send: AmountLike,
        cap_recv: AmountLike) -> SignedTxSequence:
    """Interpret a two-node trace as signed values on one channel.

    The lower node id is the sending (left) side: its outgoing transfers
    are positive.
    """
    nodes = sorted({n for t in txs for n in (t.sender, t.receiver)})
    if len(nodes) > 2:
        raise ValueError(f"trace touches {len(nodes)} nodes, a channel has two")
    low = nodes[0] if nodes else 0
    values = tuple(t.value if t.sender == low else -t.value for t in txs)
    return SignedTxSequence(values, as_amount(cap_send), as_amount(cap_recv))


# ---------------------------------------------------------------------------
# Shared integer table: maximize accepted count over a bounded balance axis
# ---------------------------------------------------------------------------

def _dp_max_accept(values: Sequence[int], bound_pos: int,
                   bound_neg: int) -> tuple[int, tuple[bool, ...]]:
    """Maximum feasible count when balances are integers in [-bound_neg, bound_pos].

    Suffix-table formulation; the forward walk takes a transaction only when
    skipping would lose the optimum, which yields the lexicographically
    smallest maximizing decision vector.  Memory is one count row plus a
    take/skip bitmap.
    """
    n = len(values)
    width = bound_pos + bound_neg + 1
    origin = bound_neg
    nxt = np.zeros(width, dtype=np.int32)
    must_take = np.zeros((n, width), dtype=bool)
    for i in range(n - 1, -1, -1):
        v = values[i]
        row = nxt.copy()
        # Taking tx i moves the balance from j to j+v; both must be in range.
        lo = max(0, -v)
        hi = min(width, width - v)
        if lo < hi:
            take = nxt[lo + v:hi + v] + 1
            segment = row[lo:hi]
            better = take > segment
            segment[better] = take[better]
            must_take[i, lo:hi] = better
        nxt = row
    decisions = []
    idx = origin
    count = int(nxt[origin])
    for i in range(n):
        if must_take[i, idx]:
            decisions.append(True)
            idx += values[i]
        else:
            decisions.append(False)
    return count, tuple(decisions)


def _common_denominator(seq: SignedTxSequence) -> int:
    d = 1
    for v in seq.values:
        d = math.lcm(d, v.denominator)
    d = math.lcm(d, seq.cap_send.denominator)
    d = math.lcm(d, seq.cap_recv.denominator)
    return d


def _clamped_needs(seq: SignedTxSequence) -> tuple[Fraction, Fraction]:
    """Per-direction capital that can actually be exercised by the values."""
    pos_sum = sum((v for v in seq.values if v > 0), Fraction(0))
    neg_sum = sum((-v for v in seq.values if v < 0), Fraction(0))
    return min(seq.cap_send, pos_sum), min(seq.cap_recv, neg_sum)


def _exact_units(seq: SignedTxSequence,
                 cell_budget: int) -> Optional[tuple[list[int], int, int]]:
    """Integer-unit view of the instance if its table fits the cell budget."""
    denom = _common_denominator(seq)
    need_pos, need_neg = _clamped_needs(seq)
    bound_pos = int(need_pos * denom)
    bound_neg = int(need_neg * denom)
    if (len(seq) + 1) * (bound_pos + bound_neg + 1) > cell_budget:
        return None
    units = [int(v * denom) for v in seq.values]
    return units, bound_pos, bound_neg


# ---------------------------------------------------------------------------
# Exact selection
# ---------------------------------------------------------------------------

def _dfs_max_accept(seq: SignedTxSequence) -> tuple[int, tuple[bool, ...]]:
    """Branch-and-bound search; skip branch first, so the first optimum found
    is the lexicographically smallest."""
    n = len(seq)
    values = seq.values
    best_count = 0
    best: tuple[bool, ...] = (False,) * n
    decisions = [False] * n

    def recurse(i: int, balance: Fraction, count: int) -> None:
        nonlocal best_count, best
        if count + (n - i) <= best_count:
            return
        if i == n:
            best_count = count
            best = tuple(decisions)
            return
        # Skip first: keeps enumeration in lexicographic order.
        decisions[i] = False
        recurse(i + 1, balance, count)
        new_balance = balance + values[i]
        if -seq.cap_recv <= new_balance <= seq.cap_send:
            decisions[i] = True
            recurse(i + 1, new_balance, count + 1)
            decisions[i] = False

    recurse(0, Fraction(0), 0)
    return best_count, best


def exact_select(seq: SignedTxSequence,
                 max_n: int = DFS_GUARD_DEFAULT) -> Strategy:
    """Maximum-cardinality feasible selection, exact.

    Among all maximum selections the lexicographically smallest decision
    vector is returned.  Instances whose exact-unit balance table fits the
    cell budget are solved by the table regardless of length; otherwise the
    combinatorial search runs, guarded at ``max_n`` transactions.
    """
    n = len(seq)
    if n == 0:
        return Strategy(())
    exact = _exact_units(seq, EXACT_DP_CELL_BUDGET)
    if exact is not None:
        units, bound_pos, bound_neg = exact
        _, decisions = _dp_max_accept(units, bound_pos, bound_neg)
        return Strategy(decisions)
    if n > max_n:
        raise InstanceTooLarge(
            f"{n} transactions exceed the search guard of {max_n} and the "
            f"instance does not fit the exact table budget")
    _, decisions = _dfs_max_accept(seq)
    return Strategy(decisions)


def decide_profit(seq: SignedTxSequence, target: int,
                  epsilon: AmountLike | float | None = None,
                  max_n: int = DFS_GUARD_DEFAULT) -> bool:
    """Decide whether some feasible selection accepts at least ``target``.

    Exact when ``epsilon`` is None.  With an epsilon the approximation
    scheme answers one-sidedly: True is certain, False means no selection
    of the required size was found at that epsilon.
    """
    if target <= 0:
        return True
    if epsilon is None:
        return exact_select(seq, max_n=max_n).accepted_count >= target
    return fptas_select(seq, epsilon).accepted_count >= target


# ---------------------------------------------------------------------------
# Approximation scheme
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FptasReport:
    """Selection plus diagnostics from the approximation scheme.

    ``table_cells`` counts worked cells as rows times non-origin balance
    columns, the loop budget of the scheme.  ``mode`` records whether the
    exact-unit table was used ("exact") or the scaled one ("scaled").
    """

    strategy: Strategy
    mode: str
    table_cells: int
    axis_pos: int
    axis_neg: int
    repairs: int
    scale: Fraction

    @property
    def accepted_count(self) -> int:
        return self.strategy.accepted_count


def _as_epsilon(epsilon: AmountLike | float) -> Fraction:
    if isinstance(epsilon, float):
        eps = Fraction(str(epsilon))
    else:
        eps = as_amount(epsilon)
    if not (0 < eps < 1):
        raise ValueError("epsilon must lie strictly between 0 and 1")
    return eps


def _floor_div(a: Fraction, b: Fraction) -> int:
    return math.floor(a / b)


def _scaled_pass(seq: SignedTxSequence, unit: Fraction, need_pos: Fraction,
                 need_neg: Fraction) -> tuple[int, list[bool], int, int, int]:
    """One rounded table pass: values scaled toward zero, caps slackened.

    The per-direction slack of n states absorbs the worst rounding drift, so
    every truly feasible selection stays representable and the returned
    table count upper-bounds the true optimum.  The selection itself may
    overdraw the true caps; callers verify and repair.
    """
    n = len(seq)
    scaled = []
    for v in seq.values:
        if v > 0:
            scaled.append(_floor_div(v, unit))
        else:
            scaled.append(-_floor_div(-v, unit))
    pos_total = sum(s for s in scaled if s > 0)
    neg_total = sum(-s for s in scaled if s < 0)
    bound_pos = min(_floor_div(need_pos, unit) + n, pos_total)
    bound_neg = min(_floor_div(need_neg, unit) + n, neg_total)
    table_count, decisions = _dp_max_accept(scaled, bound_pos, bound_neg)

    repaired = list(decisions)
    repairs = 0
    while True:
        violation = seq.first_violation(repaired)
        if violation is None:
            break
        repaired[violation] = False
        repairs += 1
    return table_count, repaired, repairs, bound_pos, bound_neg


def fptas_select_report(seq: SignedTxSequence,
                        epsilon: AmountLike | float) -> FptasReport:
    """Run the approximation scheme and return the selection with diagnostics.

    The first table pass uses the budgeted unit; when the repaired selection
    cannot certify the (1 - epsilon) bound against the pass's own count
    (a true upper bound on the optimum), the unit is halved and the pass
    repeated, falling back to exact units once they are affordable.
    """
    eps = _as_epsilon(epsilon)
    n = len(seq)
    if n < 1:
        raise ValueError("need at least one transaction")

    budget = math.ceil(Fraction(n * n) / eps)
    need_pos, need_neg = _clamped_needs(seq)
    needed_range = need_pos + need_neg

    if needed_range == 0:
        # No value can move in any usable direction; empty is optimal.
        return FptasReport(Strategy((False,) * n), "exact", 0, 0, 0, 0, Fraction(1))

    def exact_report(units, bound_pos, bound_neg, repairs=0) -> FptasReport:
        _, decisions = _dp_max_accept(units, bound_pos, bound_neg)
        return FptasReport(Strategy(decisions), "exact", n * (bound_pos + bound_neg),
                           bound_pos, bound_neg, repairs,
                           Fraction(1, _common_denominator(seq)))

    exact = _exact_units(seq, EXACT_DP_CELL_BUDGET)
    if exact is not None and exact[1] + exact[2] <= max(budget, EXACT_GATE_FLOOR):
        return exact_report(*exact)

    # Scaled route, refined until the repaired count certifies the bound.
    unit = needed_range / max(budget - 2 * n, 1)
    first_axis: Optional[tuple[int, int]] = None
    best_decisions: list[bool] = [False] * n
    best_repairs = 0
    best_unit = unit
    for _ in range(MAX_REFINEMENTS):
        if exact is not None and (exact[1] + exact[2]) <= needed_range / unit:
            # Exact units are now no coarser than the refined grid; finish there.
            _, decisions = _dp_max_accept(exact[0], exact[1], exact[2])
            if sum(decisions) >= sum(best_decisions):
                best_decisions = list(decisions)
                best_repairs = 0
                best_unit = Fraction(1, _common_denominator(seq))
            break
        table_count, repaired, repairs, bound_pos, bound_neg = _scaled_pass(
            seq, unit, need_pos, need_neg)
        if first_axis is None:
            first_axis = (bound_pos, bound_neg)
        accepted = sum(repaired)
        if accepted > sum(best_decisions):
            best_decisions = repaired
            best_repairs = repairs
            best_unit = unit
        if accepted >= math.ceil((1 - eps) * table_count):
            break
        if (n + 1) * (bound_pos + bound_neg + 1) * 2 > SCALED_CELL_CAP:
            break
        unit = unit / 2

    if not any(best_decisions):
        lone_feasible = any(-seq.cap_recv <= v <= seq.cap_send for v in seq.values)
        if lone_feasible:
            raise InfeasibleRepair(
                "rounding repairs removed every selected transaction although "
                "a feasible one exists; run the exact solver on this instance")

    axis_pos, axis_neg = first_axis if first_axis is not None else (0, 0)
    return FptasReport(Strategy(tuple(best_decisions)), "scaled",
                       n * (axis_pos + axis_neg), axis_pos, axis_neg,
                       best_repairs, best_unit)


def fptas_select(seq: SignedTxSequence,
                 epsilon: AmountLike | float) -> Strategy:
    """Approximate maximum selection; see `fptas_select_report` for details.

    The returned strategy is always feasible under the exact prefix
    constraints, and its size is within (1 - epsilon) of the optimum.
    """
    return fptas_select_report(seq, epsilon).strategy


# ---------------------------------------------------------------------------
# Fixed-cardinality subset sum: instance type, oracle, and reduction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FwssInstance:
    """Pick exactly `cardinality` elements summing to `target`."""

    elements: tuple[int, ...]
    target: int
    cardinality: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(int(a) for a in self.elements))
        if any(a < 0 for a in self.elements):
            raise ValueError("elements must be non-negative integers")
        if self.target < 0 or self.cardinality < 0:
            raise ValueError("target and cardinality must be non-negative")


def fwss_brute(inst: FwssInstance, max_n: int = 20) -> Optional[tuple[int, ...]]:
    """First size-l subset (by index order) summing to the target, or None."""
    n = len(inst.elements)
    if n > max_n:
        raise InstanceTooLarge(f"{n} elements exceed the enumeration guard of {max_n}")
    if inst.cardinality == 0 or inst.cardinality > n:
        return None
    for combo in itertools.combinations(range(n), inst.cardinality):
        if sum(inst.elements[i] for i in combo) == inst.target:
            return combo
    return None


def fwss_reduce(inst: FwssInstance) -> tuple[SignedTxSequence, int]:
    """Rewrite a subset-sum-with-cardinality instance as channel selection.

    All quantities are pre-multiplied by ``n`` so the repeated negative
    value is an exact integer.  The send-side capital admits exactly ``l``
    positive transactions summing to the scaled target; the following block
    of negative transactions can then be drained exactly when that sum is
    met, so the profit target is reachable iff the instance is a yes.

    Requires positive elements and a positive target: with zero elements a
    selection of l+1 zero-weight positives sneaks under the capital bound
    and the equivalence breaks; a zero target degenerates the negative
    block to zero-value transfers.
    """
    if inst.cardinality == 0:
        raise CardinalityZero("a nonempty subset is required; cardinality 0 is undefined")
    if inst.target == 0:
        raise ValueError("the reduction needs a positive target")
    if any(a == 0 for a in inst.elements):
        raise ValueError("the reduction needs strictly positive elements")
    if not inst.elements:
        raise ValueError("element set must be nonempty")
    n = len(inst.elements)
    a_target = inst.target
    l = inst.cardinality
    values = [Fraction(n * (a + a_target)) for a in inst.elements]
    values += [Fraction(-a_target)] * (n * (l + 1))
    seq = SignedTxSequence(tuple(values),
                           cap_send=Fraction(n * a_target * (l + 1)),
                           cap_recv=Fraction(0))
    profit_target = l + n * (l + 1)
    return seq, profit_target
