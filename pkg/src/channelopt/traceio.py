"""Reading and writing transaction traces and channel graphs.

Trace format: one transaction per line, ``sender,receiver,value`` with node
ids as non-negative integers and the value as a decimal or ``p/q`` rational.
Lines starting with ``#`` and blank lines are ignored.  Files are UTF-8 with
LF line endings.

Graph format: one ``u,v`` edge line per channel, same comment rules.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .model import Edge, Transaction, canonical_edge


class TraceParseError(ValueError):
    """A trace or graph line could not be parsed; carries the line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


def parse_amount(text: str) -> Fraction:
    """Parse a decimal or p/q rational into an exact Fraction."""
    return Fraction(text.strip())


def format_amount(value: Fraction | int) -> str:
    """Render an amount exactly: plain integer, else ``p/q``."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _content_lines(text: str) -> Iterable[tuple[int, str]]:
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield number, line


def parse_trace(text: str) -> list[Transaction]:
    """Parse trace file content into transactions, preserving order."""
    txs = []
    for number, line in _content_lines(text):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise TraceParseError(f"expected 'sender,receiver,value', got {line!r}", number)
        try:
            sender, receiver = int(parts[0]), int(parts[1])
            value = parse_amount(parts[2])
            txs.append(Transaction(sender, receiver, value))
        except (ValueError, ZeroDivisionError) as exc:
            raise TraceParseError(str(exc), number) from None
    return txs


def load_trace(path: str | Path) -> list[Transaction]:
    return parse_trace(Path(path).read_text(encoding="utf-8"))


def format_trace(txs: Sequence[Transaction], header: str | None = None) -> str:
    """Render transactions in the trace format (LF endings, trailing newline)."""
    lines = []
    if header:
        lines.extend(f"# {h}" for h in header.splitlines())
    lines.extend(f"{t.sender},{t.receiver},{format_amount(t.value)}" for t in txs)
    return "\n".join(lines) + "\n"


def save_trace(path: str | Path, txs: Sequence[Transaction],
               header: str | None = None) -> None:
    Path(path).write_text(format_trace(txs, header), encoding="utf-8", newline="\n")


def parse_graph(text: str) -> list[Edge]:
    """Parse ``u,v`` edge lines into canonical edges, preserving order."""
    edges = []
    seen = set()
    for number, line in _content_lines(text):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise TraceParseError(f"expected 'u,v', got {line!r}", number)
        try:
            edge = canonical_edge(int(parts[0]), int(parts[1]))
        except ValueError as exc:
            raise TraceParseError(str(exc), number) from None
        if edge in seen:
            raise TraceParseError(f"duplicate edge {edge}", number)
        seen.add(edge)
        edges.append(edge)
    return edges


def load_graph(path: str | Path) -> list[Edge]:
    return parse_graph(Path(path).read_text(encoding="utf-8"))


def format_graph(edges: Sequence[Edge], header: str | None = None) -> str:
    lines = []
    if header:
        lines.extend(f"# {h}" for h in header.splitlines())
    lines.extend(f"{u},{v}" for u, v in edges)
    return "\n".join(lines) + "\n"
