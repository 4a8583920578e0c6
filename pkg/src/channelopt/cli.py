"""Command-line entry point.

One command per process.  With ``--machine`` every command emits one
``key=value`` line per fact, rationals rendered exactly (integer or
``p/q``); identical invocations produce byte-identical output.  Exit codes:
0 on success, 1 on guarded-size rejection or infeasible-as-failure results,
2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import design, fixtures, online, preprocess, restricted, single_channel
from .errors import ChannelOptError, InfeasibleRepair, InstanceTooLarge
from .model import Transaction
from .traceio import (
    TraceParseError,
    format_amount,
    format_graph,
    format_trace,
    load_graph,
    load_trace,
)

DEFAULT_SEED = 0


class Report:
    """Ordered key/value output, rendered for humans or machines."""

    def __init__(self, machine: bool):
        self.machine = machine
        self.rows: list[tuple[str, str]] = []

    def add(self, key: str, value) -> None:
        if isinstance(value, (Fraction, int)) and not isinstance(value, bool):
            rendered = format_amount(value)
        elif isinstance(value, bool):
            rendered = "1" if value else "0"
        else:
            rendered = str(value)
        self.rows.append((key, rendered))

    def emit(self) -> None:
        for key, value in self.rows:
            if self.machine:
                print(f"{key}={value}")
            else:
                print(f"{key} = {value}")


def _edge_key(edge: tuple[int, int]) -> str:
    return f"{edge[0]}-{edge[1]}"


def _network_rows(report: Report, network) -> None:
    report.add("edges", network.edge_count)
    for i, edge in enumerate(network.edges()):
        report.add(f"edge.{i}", _edge_key(edge))
    for ch in network.channels():
        report.add(f"cap.{_edge_key(ch.edge)}.{ch.left}", ch.cap_left)
        report.add(f"cap.{_edge_key(ch.edge)}.{ch.right}", ch.cap_right)


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------

def _cmd_prune(args, report: Report) -> int:
    txs = load_trace(args.trace)
    result = preprocess.prune_single_participation(txs)
    report.add("input", len(txs))
    report.add("kept", len(result.kept))
    report.add("removed", len(result.removed))
    report.add("rounds", result.rounds)
    for i, tx in enumerate(result.kept):
        report.add(f"kept.{i}", f"{tx.sender},{tx.receiver},{format_amount(tx.value)}")
    for i, (tx, cause) in enumerate(result.removed):
        report.add(f"removed.{i}",
                   f"{tx.sender},{tx.receiver},{format_amount(tx.value)}:node={cause}")
    return 0


def _cmd_single_channel(args, report: Report) -> int:
    txs = load_trace(args.trace)
    seq = single_channel.signed_sequence_from_transactions(
        txs, args.cap_send, args.cap_recv)
    if args.exact:
        strategy = single_channel.exact_select(seq, max_n=args.max_exact_n)
        report.add("mode", "exact")
    else:
        result = single_channel.fptas_select_report(seq, args.eps)
        strategy = result.strategy
        report.add("mode", f"fptas:{result.mode}")
        report.add("table_cells", result.table_cells)
        report.add("repairs", result.repairs)
    report.add("n", len(seq))
    report.add("accepted", strategy.accepted_count)
    report.add("decisions", strategy.bits())
    balance = Fraction(0)
    for j, (take, value) in enumerate(zip(strategy, seq.values), start=1):
        if take:
            balance += value
        report.add(f"balance.{j}", balance)
    report.add("feasible", seq.prefix_feasible(strategy.decisions))
    if args.target is not None:
        report.add("target", args.target)
        report.add("decision", strategy.accepted_count >= args.target)
    return 0


def _cmd_design(args, report: Report) -> int:
    txs = load_trace(args.trace)
    result = design.build_max_profit_forest(txs)
    report.add("transactions", len(txs))
    report.add("executed", len(result.executed))
    report.add("executed_indices", ",".join(str(i) for i in sorted(result.executed)))
    report.add("profit_base", result.profit.base)
    report.add("profit_accepted", result.profit.accepted)
    report.add("locked_capital", result.locked)
    report.add("total_capital", result.capital)
    _network_rows(report, result.network)
    return 0


def _cmd_star(args, report: Report) -> int:
    txs = load_trace(args.trace)
    if args.best:
        result = design.best_star(txs)
        report.add("mode", "best")
    else:
        result = design.build_star(txs, args.center)
        report.add("mode", "fixed")
        report.add("center", args.center)
    report.add("capital", result.locked)
    report.add("total_capital", result.capital)
    report.add("executed", len(result.executed))
    _network_rows(report, result.network)
    return 0


def _cmd_oracle(args, report: Report) -> int:
    txs = load_trace(args.trace)
    result = design.exact_min_capital(txs, max_nodes=args.max_nodes,
                                      max_txs=args.max_txs, threads=args.threads)
    report.add("capital", result.locked)
    report.add("total_capital", result.capital)
    report.add("profit_base", result.profit.base)
    _network_rows(report, result.network)
    return 0


def _cmd_restricted(args, report: Report) -> int:
    txs = load_trace(args.trace)
    edges = load_graph(args.graph)
    node_count = max(
        [max(e) for e in edges] + [max(t.sender, t.receiver) for t in txs],
        default=-1) + 1
    inst = restricted.RestrictedInstance(node_count=node_count,
                                         edges=tuple(edges), txs=tuple(txs),
                                         budget=args.budget)
    answer = restricted.feasible_routing(inst, max_txs=args.max_txs,
                                         max_paths_per_pair=args.max_paths)
    report.add("budget", inst.budget)
    report.add("feasible", answer is not None)
    if answer is None:
        return 1
    routing, network = answer
    for i in range(len(txs)):
        hops = []
        node = txs[i].sender
        remaining = {edge: routing.usage[edge][i] for edge in routing.usage
                     if routing.usage[edge][i] != 0}
        while remaining:
            step = None
            for edge, sign in remaining.items():
                a, b = (edge[0], edge[1]) if sign == 1 else (edge[1], edge[0])
                if a == node:
                    step = (edge, b)
                    break
            if step is None:
                break
            del remaining[step[0]]
            hops.append(node)
            node = step[1]
        hops.append(node)
        report.add(f"path.{i}", "-".join(str(n) for n in hops))
    report.add("locked", sum((ch.total for ch in network.channels()), Fraction(0)))
    _network_rows(report, network)
    return 0


def _parse_sizes(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


def _cmd_reduce_partition(args, report: Report) -> int:
    sizes = _parse_sizes(args.sizes)
    inst = restricted.partition_reduce(restricted.PartitionInstance(sizes))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        graph_path = out / "partition.graph.csv"
        trace_path = out / "partition.trace.csv"
        budget_path = out / "partition.budget"
        graph_path.write_text(format_graph(inst.edges), encoding="utf-8", newline="\n")
        trace_path.write_text(format_trace(inst.txs), encoding="utf-8", newline="\n")
        budget_path.write_text(format_amount(inst.budget) + "\n",
                               encoding="utf-8", newline="\n")
        for path in (graph_path, trace_path, budget_path):
            report.add("written", str(path))
        return 0
    report.add("budget", inst.budget)
    for i, edge in enumerate(inst.edges):
        report.add(f"graph.{i}", _edge_key(edge))
    for i, tx in enumerate(inst.txs):
        report.add(f"tx.{i}", f"{tx.sender},{tx.receiver},{format_amount(tx.value)}")
    return 0


def _cmd_reduce_fwss(args, report: Report) -> int:
    inst = single_channel.FwssInstance(
        elements=_parse_sizes(args.elements),
        target=args.target, cardinality=args.cardinality)
    seq, profit_target = single_channel.fwss_reduce(inst)
    txs = [Transaction(0, 1, v) if v > 0 else Transaction(1, 0, -v)
           for v in seq.values]
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        trace_path = out / "fwss.trace.csv"
        params_path = out / "fwss.params"
        trace_path.write_text(format_trace(txs), encoding="utf-8", newline="\n")
        params = (f"cap_send={format_amount(seq.cap_send)}\n"
                  f"cap_recv={format_amount(seq.cap_recv)}\n"
                  f"target={profit_target}\n")
        params_path.write_text(params, encoding="utf-8", newline="\n")
        report.add("written", str(trace_path))
        report.add("written", str(params_path))
        return 0
    report.add("cap_send", seq.cap_send)
    report.add("cap_recv", seq.cap_recv)
    report.add("target", profit_target)
    for i, tx in enumerate(txs):
        report.add(f"tx.{i}", f"{tx.sender},{tx.receiver},{format_amount(tx.value)}")
    return 0


def _cmd_online(args, report: Report) -> int:
    if args.adversary:
        if args.length is None:
            raise ChannelOptError("--adversary requires --len")
        if args.policy == "always-accept":
            policy = online.always_accept
        elif args.policy == "always-deny":
            policy = online.always_deny
        elif args.policy.startswith("table:"):
            policy = online.table_policy(args.policy.split(":", 1)[1])
        else:
            raise ChannelOptError(f"unknown policy {args.policy!r}")
        transcript = online.adversary_stream(policy, args.length)
        report.add("length", len(transcript.values))
        report.add("values", ",".join(format_amount(v) for v in transcript.values))
        report.add("requested", "".join("1" if b else "0" for b in transcript.requested))
        report.add("granted", "".join("1" if b else "0" for b in transcript.granted))
        report.add("accepted", transcript.accepted_count)
        report.add("offline_optimum", transcript.offline_optimum)
        return 0

    if args.trace is None:
        raise ChannelOptError("a trace file is required unless --adversary is used")
    txs = load_trace(args.trace)
    if args.report:
        comp = online.competitive_report(txs)
        report.add("online_capital", comp.online_capital)
        report.add("online_events", comp.online_events)
        report.add("offline_capital", comp.offline_capital)
        report.add("offline_locked", comp.offline_locked)
        if comp.offline_center is not None:
            report.add("offline_center", comp.offline_center)
        if comp.ratio is not None:
            report.add("ratio", comp.ratio)
        for (node, direction), count in sorted(comp.refund_counts.items()):
            report.add(f"refunds.{node}.{direction}", count)
        return 0

    run = online.run_online_report(txs)
    report.add("capital", run.final_capital)
    report.add("events", run.event_cost)
    report.add("executed", run.final_state.executed_count)
    for node in sorted(run.final_state.spokes):
        spoke = run.final_state.spokes[node]
        report.add(f"spoke.{node}.toward", spoke.toward_hub)
        report.add(f"spoke.{node}.from", spoke.from_hub)
    for i, event in enumerate(run.final_state.events):
        report.add(f"event.{i}", event)
    return 0


def _cmd_gen(args) -> int:
    import random

    if args.nodes < 2:
        raise ChannelOptError("need at least two nodes")
    dist = args.dist
    if not dist.startswith("uniform:"):
        raise ChannelOptError(f"unknown distribution {dist!r}")
    lo, hi = (int(x) for x in dist.split(":", 1)[1].split(","))
    if lo <= 0 or hi < lo:
        raise ChannelOptError("uniform bounds must satisfy 0 < LO <= HI")
    rng = random.Random(args.seed)
    txs = []
    for _ in range(args.txs):
        sender = rng.randrange(args.nodes)
        receiver = rng.randrange(args.nodes - 1)
        if receiver >= sender:
            receiver += 1
        txs.append(Transaction(sender, receiver, Fraction(rng.randint(lo, hi))))
    sys.stdout.write(format_trace(
        txs, header=f"gen nodes={args.nodes} txs={args.txs} seed={args.seed} dist={dist}"))
    return 0


def _cmd_fixture(args, report: Report) -> int:
    params = {}
    for item in args.param or []:
        key, _, raw = item.partition("=")
        if not _:
            raise ChannelOptError(f"--param expects key=value, got {item!r}")
        if key == "sizes":
            params[key] = _parse_sizes(raw)
        else:
            params[key] = int(raw)
    fixture = fixtures.load(args.name, **params)
    if args.out:
        for path in fixtures.write_fixture(fixture, args.out):
            report.add("written", str(path))
        return 0
    sys.stdout.write(format_trace(fixture.txs, header=fixture.provenance))
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="channelopt",
        description="Payment-channel network design toolkit")
    parser.add_argument("--machine", action="store_true",
                        help="emit one key=value line per fact")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for exhaustive searches")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prune", help="drop transactions of single-use nodes")
    p.add_argument("trace")

    p = sub.add_parser("single-channel", help="select transactions on one channel")
    p.add_argument("--cap-send", required=True)
    p.add_argument("--cap-recv", required=True)
    p.add_argument("--eps", default="1/10")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--target", type=int, default=None)
    p.add_argument("--max-exact-n", type=int, default=single_channel.DFS_GUARD_DEFAULT)
    p.add_argument("trace")

    p = sub.add_parser("design", help="maximum-profit forest with capitals")
    p.add_argument("trace")

    p = sub.add_parser("star", help="star design with a fixed or best center")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--center", type=int)
    group.add_argument("--best", action="store_true")
    p.add_argument("trace")

    p = sub.add_parser("oracle", help="exhaustive oracles (guarded sizes)")
    oracle_sub = p.add_subparsers(dest="oracle_command", required=True)
    q = oracle_sub.add_parser("min-capital", help="cheapest forest executing everything")
    q.add_argument("--max-nodes", type=int, default=7)
    q.add_argument("--max-txs", type=int, default=16)
    q.add_argument("trace")

    p = sub.add_parser("restricted", help="routing feasibility on a fixed graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--budget", required=True)
    p.add_argument("--max-txs", type=int, default=restricted.MAX_TXS_DEFAULT)
    p.add_argument("--max-paths", type=int,
                   default=restricted.MAX_PATHS_PER_PAIR_DEFAULT)
    p.add_argument("trace")

    p = sub.add_parser("reduce", help="emit reduction instances")
    reduce_sub = p.add_subparsers(dest="reduce_command", required=True)
    q = reduce_sub.add_parser("partition", help="equal-split to restricted routing")
    q.add_argument("sizes", help="comma-separated positive integers")
    q.add_argument("--out", default=None)
    q = reduce_sub.add_parser("fwss", help="fixed-size subset sum to single channel")
    q.add_argument("--elements", required=True)
    q.add_argument("--target", type=int, required=True)
    q.add_argument("--cardinality", type=int, required=True)
    q.add_argument("--out", default=None)

    p = sub.add_parser("online", help="run the online provisioner")
    p.add_argument("trace", nargs="?")
    p.add_argument("--report", action="store_true",
                   help="compare against the offline best star")
    p.add_argument("--adversary", action="store_true")
    p.add_argument("--policy", default="always-accept")
    p.add_argument("--len", dest="length", type=int, default=None)

    p = sub.add_parser("gen", help="generate a reproducible random trace")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--txs", type=int, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--dist", default="uniform:1,10")

    p = sub.add_parser("fixture", help="emit a named fixture")
    p.add_argument("name")
    p.add_argument("--param", action="append", default=[],
                   help="builder parameter, key=value (repeatable)")
    p.add_argument("--out", default=None)

    return parser


def dispatch(args: argparse.Namespace) -> int:
    report = Report(machine=args.machine)
    try:
        if args.command == "prune":
            code = _cmd_prune(args, report)
        elif args.command == "single-channel":
            code = _cmd_single_channel(args, report)
        elif args.command == "design":
            code = _cmd_design(args, report)
        elif args.command == "star":
            code = _cmd_star(args, report)
        elif args.command == "oracle":
            code = _cmd_oracle(args, report)
        elif args.command == "restricted":
            code = _cmd_restricted(args, report)
        elif args.command == "reduce" and args.reduce_command == "partition":
            code = _cmd_reduce_partition(args, report)
        elif args.command == "reduce" and args.reduce_command == "fwss":
            code = _cmd_reduce_fwss(args, report)
        elif args.command == "online":
            code = _cmd_online(args, report)
        elif args.command == "gen":
            return _cmd_gen(args)
        elif args.command == "fixture":
            code = _cmd_fixture(args, report)
        else:  # pragma: no cover - argparse enforces the command set
            raise ChannelOptError(f"unknown command {args.command!r}")
    except TraceParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InstanceTooLarge, InfeasibleRepair) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ChannelOptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report.emit()
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    return dispatch(args)


def parse_and_dispatch(argv: Sequence[str]) -> int:
    """Alias for `main`, taking an explicit argument vector."""
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
