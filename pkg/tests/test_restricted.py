"""Fixed-graph routing feasibility and the equal-split reduction."""

import itertools
from fractions import Fraction

import pytest

from channelopt.errors import InstanceTooLarge
from channelopt.model import ChannelNetwork, Strategy, Transaction, validate_solution
from channelopt.restricted import (
    GADGET_EDGES,
    PartitionInstance,
    RestrictedInstance,
    feasible_routing,
    partition_brute,
    partition_reduce,
)


class TestPartitionBrute:
    def test_even_pair(self):
        assert partition_brute(PartitionInstance((1, 1)))

    def test_single_element(self):
        assert not partition_brute(PartitionInstance((3,)))

    def test_no_half_subset(self):
        # Total 60; without 34 at most 26, with 34 the rest cannot reach -4.
        assert not partition_brute(PartitionInstance((3, 34, 4, 12, 5, 2)))

    def test_guard(self):
        with pytest.raises(InstanceTooLarge):
            partition_brute(PartitionInstance(tuple(range(1, 23))))


class TestPartitionReduce:
    def test_gadget_shape(self):
        inst = partition_reduce(PartitionInstance((1, 1)))
        assert inst.edges == tuple(sorted(GADGET_EDGES))
        assert inst.budget == 8
        values = [tx.value for tx in inst.txs]
        assert values == [2, 2, 2, 2, 2, 2]
        assert [(t.sender, t.receiver) for t in inst.txs[:4]] == [
            (2, 0), (0, 3), (2, 1), (1, 3)]
        assert all((t.sender, t.receiver) == (3, 2) for t in inst.txs[4:])

    def test_single_element_infeasible(self):
        inst = partition_reduce(PartitionInstance((3,)))
        assert feasible_routing(inst) is None


class TestFeasibleRouting:
    def test_even_pair_feasible(self):
        inst = partition_reduce(PartitionInstance((1, 1)))
        answer = feasible_routing(inst)
        assert answer is not None
        routing, network = answer
        locked = sum((ch.total for ch in network.channels()), Fraction(0))
        assert locked <= inst.budget

    def test_odd_triple_infeasible(self):
        inst = partition_reduce(PartitionInstance((1, 1, 1)))
        assert feasible_routing(inst) is None

    def test_empty_transactions(self):
        inst = RestrictedInstance(node_count=3, edges=((0, 1), (1, 2)), txs=(),
                                  budget=Fraction(0))
        answer = feasible_routing(inst)
        assert answer is not None
        _, network = answer
        assert sum((ch.total for ch in network.channels()), Fraction(0)) == 0

    def test_certificate_validates(self):
        inst = partition_reduce(PartitionInstance((2, 3, 1)))
        answer = feasible_routing(inst)
        assert answer is not None
        routing, network = answer
        report = validate_solution(
            inst.txs, Strategy((True,) * len(inst.txs)), network, routing,
            capital_budget=inst.budget + network.edge_count,
            profit_target=len(inst.txs) - network.edge_count)
        assert report.all_ok

    def test_answer_independent_of_path_order(self):
        for sizes in [(1, 1), (1, 2), (2, 3, 1), (1, 1, 1), (4, 2, 2)]:
            inst = partition_reduce(PartitionInstance(sizes))
            base = feasible_routing(inst) is not None
            for seed in range(5):
                assert (feasible_routing(inst, path_order_seed=seed) is not None) == base

    def test_transaction_guard(self):
        txs = tuple(Transaction(0, 1, 1) for _ in range(13))
        inst = RestrictedInstance(node_count=2, edges=((0, 1),), txs=txs,
                                  budget=Fraction(100))
        with pytest.raises(InstanceTooLarge):
            feasible_routing(inst)

    def test_path_count_guard(self):
        # Complete graph on five nodes: 16 simple paths between any pair.
        edges = tuple(itertools.combinations(range(5), 2))
        inst = RestrictedInstance(node_count=5, edges=edges,
                                  txs=(Transaction(0, 4, 1),), budget=Fraction(10))
        with pytest.raises(InstanceTooLarge):
            feasible_routing(inst, max_paths_per_pair=8)

    def test_unreachable_endpoint_infeasible(self):
        inst = RestrictedInstance(node_count=4, edges=((0, 1), (2, 3)),
                                  txs=(Transaction(0, 3, 1),), budget=Fraction(100))
        assert feasible_routing(inst) is None


def test_reduction_equivalence_small():
    """Reduction answer matches the subset-sum oracle on every multiset up to 5/6."""
    for k in range(1, 5):
        for sizes in itertools.combinations_with_replacement(range(1, 7), k):
            inst = PartitionInstance(sizes)
            expected = partition_brute(inst)
            got = feasible_routing(partition_reduce(inst)) is not None
            assert got == expected, sizes
