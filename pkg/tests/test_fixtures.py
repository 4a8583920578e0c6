"""Fixture registry, parameterization, and serialization."""

from fractions import Fraction

import pytest

from channelopt.errors import UnknownFixture
from channelopt.fixtures import load, names, write_fixture
from channelopt.traceio import load_graph, load_trace, parse_amount


def test_registry_contents():
    assert set(names()) >= {
        "lemma2_cycle", "lemma_cc", "fig1_star_gap",
        "adversary_seq1", "adversary_seq2", "partition_gadget",
    }


def test_unknown_name():
    with pytest.raises(UnknownFixture):
        load("nope")


def test_cycle_workload_parameterized():
    fixture = load("lemma2_cycle", a=15)
    assert len(fixture.txs) == 90
    assert fixture.expected["cycle_profit"] == 84
    assert fixture.expected["budget"] == 96
    with pytest.raises(ValueError):
        load("lemma2_cycle", a=11)


def test_cycle_workload_default():
    fixture = load("lemma2_cycle")
    assert fixture.expected["cycle_profit"] == 66
    assert fixture.expected["budget"] == 78


def test_adversary_lengths():
    fixture = load("adversary_seq1", length=20)
    assert len(fixture.txs) == 20
    assert fixture.expected["offline_optimum"] == 19
    fixture2 = load("adversary_seq2", length=20)
    assert fixture2.expected["offline_optimum"] == 20
    # second value distinguishes the branches
    assert fixture.txs[1].value == 5
    assert fixture2.txs[1].value == 4


def test_gap_instance_shape():
    fixture = load("fig1_star_gap")
    assert len(fixture.txs) == 10
    assert fixture.expected["optimal_capital"] == 6
    assert fixture.expected["best_star_capital"] == 7


def test_partition_gadget_carries_graph():
    fixture = load("partition_gadget", sizes=(1, 1))
    assert fixture.graph_edges is not None
    assert fixture.budget == 8
    assert fixture.expected["feasible"] == 1


def test_write_and_reload(tmp_path):
    fixture = load("partition_gadget", sizes=(2, 3, 1))
    paths = write_fixture(fixture, tmp_path)
    assert [p.name for p in paths] == [
        "partition_gadget.csv", "partition_gadget.expected",
        "partition_gadget.graph.csv"]
    txs = load_trace(paths[0])
    assert list(txs) == list(fixture.txs)
    expected = {}
    for line in paths[1].read_text().splitlines():
        key, _, raw = line.partition("=")
        expected[key] = parse_amount(raw)
    assert expected == fixture.expected
    assert tuple(load_graph(paths[2])) == fixture.graph_edges


def test_expected_values_are_exact(tmp_path):
    fixture = load("lemma2_cycle")
    for value in fixture.expected.values():
        assert isinstance(value, Fraction)
