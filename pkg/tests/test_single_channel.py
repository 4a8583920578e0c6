"""Single-channel selection: exact solver, approximation scheme, reductions.

The independent oracle here is full subset enumeration with prefix
simulation; it never shares code with the solvers it checks.
"""

import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from channelopt.errors import CardinalityZero, InstanceTooLarge
from channelopt.single_channel import (
    FwssInstance,
    SignedTxSequence,
    decide_profit,
    exact_select,
    fptas_select,
    fptas_select_report,
    fwss_brute,
    fwss_reduce,
    signed_sequence_from_transactions,
)
from channelopt.model import Transaction


def brute_max_accept(seq: SignedTxSequence) -> int:
    """Oracle: enumerate all subsets, simulate prefixes, keep the best count."""
    n = len(seq)
    best = 0
    for mask in range(1 << n):
        balance = Fraction(0)
        count = 0
        feasible = True
        for i in range(n):
            if mask >> i & 1:
                balance += seq.values[i]
                count += 1
                if balance > seq.cap_send or balance < -seq.cap_recv:
                    feasible = False
                    break
        if feasible and count > best:
            best = count
    return best


def seq_of(values, cap_send, cap_recv):
    return SignedTxSequence(tuple(Fraction(v) for v in values),
                            Fraction(cap_send), Fraction(cap_recv))


def random_instance(rng, max_n=12, value_span=20, cap_span=40):
    n = rng.randint(1, max_n)
    values = []
    for _ in range(n):
        v = rng.randint(1, value_span)
        values.append(v if rng.random() < 0.5 else -v)
    return seq_of(values, rng.randint(0, cap_span), rng.randint(0, cap_span))


class TestExactSelect:
    def test_swing_sequence_skips_opener(self):
        strategy = exact_select(seq_of([1, 5, -10, 10, -10, 10], 5, 5))
        assert strategy.accepted_count == 5
        assert strategy.bits() == "011111"

    def test_gentler_sequence_accepts_all(self):
        strategy = exact_select(seq_of([1, 4, -10, 10, -10, 10], 5, 5))
        assert strategy.accepted_count == 6

    def test_single_fitting_value(self):
        strategy = exact_select(seq_of([3], 5, 5))
        assert strategy.accepted_count == 1

    def test_matches_oracle_on_random_instances(self):
        rng = random.Random(101)
        for _ in range(120):
            seq = random_instance(rng, max_n=10)
            assert exact_select(seq).accepted_count == brute_max_accept(seq)

    def test_rational_values_fall_back_to_search(self):
        values = [Fraction(10**9, 7), Fraction(-(10**9), 11)] * 3
        seq = SignedTxSequence(tuple(values), Fraction(10**9), Fraction(10**9))
        strategy = exact_select(seq)
        assert seq.prefix_feasible(strategy.decisions)
        assert strategy.accepted_count == brute_max_accept(seq)

    def test_search_guard(self):
        values = [Fraction(10**9, 7), Fraction(-(10**9), 11)] * 13
        seq = SignedTxSequence(tuple(values), Fraction(10**9), Fraction(10**9))
        with pytest.raises(InstanceTooLarge):
            exact_select(seq, max_n=24)

    def test_lexicographically_smallest_witness(self):
        # Both (0,2) and (1,2) reach count 2; 011 beats 101.
        seq = seq_of([2, 2, -2], 2, 2)
        assert exact_select(seq).bits() == "011"

    def test_monotone_in_capacity(self):
        rng = random.Random(33)
        for _ in range(60):
            seq = random_instance(rng, max_n=8, value_span=8, cap_span=12)
            base = exact_select(seq).accepted_count
            wider = SignedTxSequence(seq.values, seq.cap_send + 5, seq.cap_recv)
            taller = SignedTxSequence(seq.values, seq.cap_send, seq.cap_recv + 5)
            assert exact_select(wider).accepted_count >= base
            assert exact_select(taller).accepted_count >= base


class TestDecideProfit:
    def test_swing_sequence_reaches_five(self):
        assert decide_profit(seq_of([1, 5, -10, 10, -10, 10], 5, 5), 5)

    def test_zero_target_trivially_true(self):
        assert decide_profit(seq_of([100], 1, 1), 0)

    def test_oversized_single_value(self):
        assert not decide_profit(seq_of([10], 5, 5), 1)


class TestFptas:
    def test_swing_example_at_one_fifth(self):
        seq = seq_of([1, 5, -10, 10, -10, 10, -10, 10], 5, 5)
        strategy = fptas_select(seq, Fraction(1, 5))
        assert strategy.accepted_count >= math.ceil(0.8 * 7)
        assert seq.prefix_feasible(strategy.decisions)

    def test_nothing_fits(self):
        seq = seq_of([7, 9, 8], 5, 40)
        assert fptas_select(seq, Fraction(1, 10)).accepted_count == 0

    def test_guarantee_against_oracle(self):
        rng = random.Random(77)
        for _ in range(60):
            seq = random_instance(rng, max_n=10, value_span=8, cap_span=10)
            optimum = brute_max_accept(seq)
            for eps in (Fraction(1, 10), Fraction(3, 10)):
                report = fptas_select_report(seq, eps)
                assert seq.prefix_feasible(report.strategy.decisions)
                assert report.accepted_count >= math.ceil((1 - eps) * optimum)

    def test_scaled_route_guarantee_and_budget(self):
        # Large exact-unit ranges force the scaled table.
        rng = random.Random(900)
        scaled_seen = 0
        for _ in range(40):
            n = rng.randint(4, 11)
            values = []
            for _ in range(n):
                v = rng.randint(10**5, 10**6)
                values.append(v if rng.random() < 0.5 else -v)
            seq = seq_of(values, rng.randint(10**5, 10**6), rng.randint(10**5, 10**6))
            optimum = brute_max_accept(seq)
            for eps in (Fraction(1, 20), Fraction(1, 10), Fraction(3, 10)):
                report = fptas_select_report(seq, eps)
                if report.mode == "scaled":
                    scaled_seen += 1
                    budget = math.ceil(Fraction(n * n) / eps)
                    assert report.table_cells <= n * budget
                assert seq.prefix_feasible(report.strategy.decisions)
                assert report.accepted_count >= math.ceil((1 - eps) * optimum)
        assert scaled_seen > 0

    def test_epsilon_domain(self):
        seq = seq_of([1], 1, 1)
        for bad in (0, 1, Fraction(3, 2), -1):
            with pytest.raises(ValueError):
                fptas_select(seq, bad)

    def test_rational_values_scaled_route(self):
        values = [Fraction(3, 7), Fraction(-2, 5), Fraction(5, 7), Fraction(-1, 5),
                  Fraction(4, 7), Fraction(-3, 5)] * 2
        seq = SignedTxSequence(tuple(values), Fraction(1, 2), Fraction(1, 2))
        optimum = brute_max_accept(seq)
        for eps in (Fraction(1, 10), Fraction(3, 10)):
            report = fptas_select_report(seq, eps)
            assert seq.prefix_feasible(report.strategy.decisions)
            assert report.accepted_count >= math.ceil((1 - eps) * optimum)


class TestSignedSequenceFromTransactions:
    def test_direction_signs(self):
        txs = [Transaction(0, 1, 3), Transaction(1, 0, 2)]
        seq = signed_sequence_from_transactions(txs, 5, 5)
        assert seq.values == (Fraction(3), Fraction(-2))

    def test_three_nodes_rejected(self):
        txs = [Transaction(0, 1, 1), Transaction(2, 1, 1)]
        with pytest.raises(ValueError):
            signed_sequence_from_transactions(txs, 5, 5)


class TestFwss:
    def test_brute_finds_first_by_index(self):
        assert fwss_brute(FwssInstance((1, 2, 3), 3, 2)) == (0, 1)

    def test_brute_none(self):
        assert fwss_brute(FwssInstance((2, 4), 5, 1)) is None

    def test_brute_larger(self):
        assert fwss_brute(FwssInstance((3, 34, 4, 12, 5, 2), 9, 3)) == (0, 2, 5)

    def test_brute_guard(self):
        with pytest.raises(InstanceTooLarge):
            fwss_brute(FwssInstance(tuple(range(1, 26)), 10, 2))

    def test_reduce_shape(self):
        seq, target = fwss_reduce(FwssInstance((1, 2, 3), 3, 2))
        assert seq.cap_send == 27 and seq.cap_recv == 0
        assert seq.values[:3] == (12, 15, 18)
        assert set(seq.values[3:]) == {Fraction(-3)} and len(seq.values) == 3 + 9
        assert target == 11

    def test_reduce_yes_instance(self):
        seq, target = fwss_reduce(FwssInstance((1, 2, 3), 3, 2))
        assert decide_profit(seq, target)

    def test_reduce_no_instance(self):
        seq, target = fwss_reduce(FwssInstance((5,), 3, 1))
        assert not decide_profit(seq, target)

    def test_cardinality_zero_guarded(self):
        with pytest.raises(CardinalityZero):
            fwss_reduce(FwssInstance((1, 2), 3, 0))

    def test_zero_elements_guarded(self):
        with pytest.raises(ValueError):
            fwss_reduce(FwssInstance((0, 2), 2, 1))

    def test_equivalence_small_grid(self):
        """Exhaustive over tiny instances: reduction decision matches the oracle."""
        for n in (1, 2, 3):
            for elements in itertools.combinations_with_replacement(range(1, 5), n):
                for target in range(1, 9):
                    for cardinality in range(1, n + 1):
                        inst = FwssInstance(elements, target, cardinality)
                        seq, profit_target = fwss_reduce(inst)
                        oracle = fwss_brute(inst) is not None
                        assert decide_profit(seq, profit_target) == oracle, inst


@st.composite
def signed_sequences(draw):
    n = draw(st.integers(1, 8))
    values = []
    for _ in range(n):
        v = draw(st.integers(1, 10))
        values.append(v if draw(st.booleans()) else -v)
    return seq_of(values, draw(st.integers(0, 15)), draw(st.integers(0, 15)))


@settings(max_examples=60, deadline=None)
@given(signed_sequences())
def test_exact_select_always_feasible_and_optimal(seq):
    strategy = exact_select(seq)
    assert seq.prefix_feasible(strategy.decisions)
    assert strategy.accepted_count == brute_max_accept(seq)


@settings(max_examples=40, deadline=None)
@given(signed_sequences(), st.sampled_from([Fraction(1, 20), Fraction(1, 10),
                                            Fraction(3, 10)]))
def test_fptas_feasible_and_within_bound(seq, eps):
    report = fptas_select_report(seq, eps)
    assert seq.prefix_feasible(report.strategy.decisions)
    optimum = brute_max_accept(seq)
    assert report.accepted_count >= math.ceil((1 - eps) * optimum)
