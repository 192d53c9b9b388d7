"""Weighted directly-follows graphs."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .log import EventLog


@dataclass(frozen=True)
class Dfg:
    alphabet: frozenset
    edge_freq: Mapping[tuple, int] = field(default_factory=dict)
    start_freq: Mapping[str, int] = field(default_factory=dict)
    end_freq: Mapping[str, int] = field(default_factory=dict)
    activity_freq: Mapping[str, int] = field(default_factory=dict)
    trace_count: int = 0

    def m(self, a: str, b: str) -> int:
        return self.edge_freq.get((a, b), 0)

    def agg(self, xs: Iterable[str], ys: Iterable[str]) -> int:
        """Total edge mass from ``xs`` into ``ys``."""
        xs, ys = frozenset(xs), frozenset(ys)
        if not xs or not ys:
            return 0
        return sum(c for (a, b), c in self.edge_freq.items() if a in xs and b in ys)

    def start(self, xs: Iterable[str]) -> int:
        return sum(self.start_freq.get(a, 0) for a in set(xs))

    def end(self, xs: Iterable[str]) -> int:
        return sum(self.end_freq.get(a, 0) for a in set(xs))

    def to_dot(self) -> str:
        lines = ["digraph dfg {", "  rankdir=LR;",
                 '  "__start__" [label="▷", shape=circle];',
                 '  "__end__" [label="□", shape=square];']
        for a in sorted(self.alphabet):
            lines.append(f'  {_q(a)} [label={_q(f"{a} ({self.activity_freq.get(a, 0)})")}, shape=box];')
        for a, c in sorted(self.start_freq.items()):
            lines.append(f'  "__start__" -> {_q(a)} [label="{c}"];')
        for (a, b), c in sorted(self.edge_freq.items()):
            lines.append(f'  {_q(a)} -> {_q(b)} [label="{c}"];')
        for a, c in sorted(self.end_freq.items()):
            lines.append(f'  {_q(a)} -> "__end__" [label="{c}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def agg(dfg: Dfg, xs: Iterable[str], ys: Iterable[str]) -> int:
    return dfg.agg(xs, ys)


def extract_dfg(log: EventLog) -> Dfg:
    edges: Counter = Counter()
    starts: Counter = Counter()
    ends: Counter = Counter()
    freq: Counter = Counter()
    for trace, count in log.items():
        if not trace:
            continue
        starts[trace[0]] += count
        ends[trace[-1]] += count
        for a in trace:
            freq[a] += count
        for pair in zip(trace, trace[1:]):
            edges[pair] += count
    return Dfg(alphabet=log.alphabet, edge_freq=dict(edges), start_freq=dict(starts),
               end_freq=dict(ends), activity_freq=dict(freq), trace_count=log.n)
