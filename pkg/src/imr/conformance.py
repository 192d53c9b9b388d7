"""Log-vs-model and log-vs-rules checks at desk scale."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .declare import DeclareRule, RuleSet, confidence
from .log import EventLog
from .tree import Acceptor, ProcessTree


@dataclass(frozen=True)
class FitnessReport:
    accepted_fraction: Fraction
    variants: tuple  # (trace, multiplicity, accepted)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trace", "count", "accepted"])
        for trace, count, ok in self.variants:
            w.writerow([" ".join(trace), count, int(ok)])
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [f"fitness {float(self.accepted_fraction):.3f}"]
        for trace, count, ok in self.variants:
            lines.append(f"{'ok ' if ok else 'NOK'} {count:>8}  <{','.join(trace)}>")
        return "\n".join(lines) + "\n"


def fitness(log: EventLog, tree: ProcessTree, workers: int = 1) -> FitnessReport:
    variants = list(log.items())
    if workers > 1:
        # one acceptor per worker; the memo tables are not shared across threads
        def check(chunk):
            acc = Acceptor(tree)
            return [acc(t) for t, _ in chunk]

        chunks = [variants[i::workers] for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(check, chunks))
        flags = [None] * len(variants)
        for i, res in enumerate(results):
            flags[i::workers] = res
    else:
        acc = Acceptor(tree)
        flags = [acc(t) for t, _ in variants]
    rows = tuple((t, c, bool(f)) for (t, c), f in zip(variants, flags))
    accepted = sum(c for _, c, ok in rows if ok)
    frac = Fraction(accepted, log.n) if log.n else Fraction(1)
    return FitnessReport(frac, rows)


@dataclass(frozen=True)
class RuleConformance:
    rows: tuple  # (rule, confidence)

    @property
    def violated(self) -> list:
        return [r for r, c in self.rows if c < 1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rule", "confidence", "violated"])
        for r, c in self.rows:
            w.writerow([str(r), f"{float(c):.6f}", int(c < 1)])
        return buf.getvalue()

    def to_text(self) -> str:
        return "".join(f"{float(c):.3f}{'  !' if c < 1 else '   '} {r}\n" for r, c in self.rows)


def rule_conformance(log: EventLog, rules: Iterable[DeclareRule]) -> RuleConformance:
    return RuleConformance(tuple((r, confidence(r, log)) for r in RuleSet(rules)))
