"""Recursive inductive discovery guided by Declare rules."""

from __future__ import annotations

import csv
import enum
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import IO, Iterable

from .cuts import (DEFAULT_ENUMERATION_CAP, Cut, CutSpace, EnumerationCapError, ScoredCut,
                   as_fraction)
from .declare import DeclareRule, RuleSet, Template, check_trace
from .dfg import extract_dfg
from .log import EventLog
from .tree import Operator, ProcessTree, bounded_language, leaf, loop, render_tree, tau, xor

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ImrConfig:
    sup: Fraction = Fraction(1, 5)
    rules: RuleSet = field(default_factory=RuleSet)
    strict: bool = False
    xor_slack: Fraction = Fraction(0)
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP

    def __post_init__(self):
        sup = as_fraction(self.sup)
        slack = as_fraction(self.xor_slack)
        if not 0 <= sup <= 1:
            raise ValueError(f"sup must lie in [0, 1], got {self.sup}")
        if slack < 0:
            raise ValueError(f"xor_slack must be non-negative, got {self.xor_slack}")
        if self.enumeration_cap < 2:
            raise ValueError("enumeration_cap must be at least 2")
        object.__setattr__(self, "sup", sup)
        object.__setattr__(self, "xor_slack", slack)
        object.__setattr__(self, "rules", RuleSet(self.rules))


@dataclass(frozen=True)
class RecursionStep:
    alphabet: tuple
    depth: int
    cut: ScoredCut | None = None
    base: ProcessTree | None = None
    fallback: bool = False
    n_candidates: int = 0
    n_kept: int = 0

    def to_dict(self) -> dict:
        d = {"alphabet": list(self.alphabet), "depth": self.depth}
        if self.base is not None:
            d["base_case"] = render_tree(self.base)
        else:
            c = self.cut.cut
            d.update({
                "operator": c.op.token,
                "sigma1": sorted(c.sigma1),
                "sigma2": sorted(c.sigma2),
                "cost": self.cut.cost,
                "fallback": self.fallback,
                "candidates": self.n_candidates,
                "kept": self.n_kept,
            })
            if self.fallback:
                d["rejected_by"] = [str(r) for r in self.cut.rejected_by]
        return d


@dataclass(frozen=True)
class DiscoveryReport:
    tree: ProcessTree
    steps: tuple

    def to_dict(self) -> dict:
        return {"tree": render_tree(self.tree), "recursion": [s.to_dict() for s in self.steps]}


class StrictModeError(RuntimeError):
    """Every candidate cut of one recursion was rejected and strict mode forbids falling back."""

    def __init__(self, alphabet: Iterable[str], candidates: list, message: str | None = None):
        self.alphabet = tuple(sorted(alphabet))
        self.candidates = candidates
        if message is None:
            listing = "; ".join(f"{c.cut} rejected by {', '.join(str(r) for r in c.rejected_by)}"
                                for c in candidates)
            message = f"all cuts over {{{','.join(self.alphabet)}}} are rejected: {listing}"
        super().__init__(message)


def check_base_case(log_: EventLog, sup=None, alphabet: Iterable[str] | None = None) -> ProcessTree | None:
    """Leaf-level tree for a recursion over at most one activity, else None.

    ``alphabet`` is the recursion's activity set and defaults to the log's.
    It can be larger than the log alphabet when an earlier split dropped
    every occurrence of an activity; such an activity is treated as absent
    from each trace.
    """
    # sup is accepted for signature parity; base cases are not noise-tolerant
    alphabet = log_.alphabet if alphabet is None else frozenset(alphabet)
    if not alphabet:
        return tau()
    if len(alphabet) > 1:
        return None
    (a,) = alphabet
    if log_.n == 0:
        return leaf(a)
    has_empty = any(len(t) == 0 for t in log_)
    has_repeat = any(len(t) >= 2 for t in log_)
    if has_empty and has_repeat:
        return loop(tau(), leaf(a))
    if has_repeat:
        return loop(leaf(a), tau())
    if has_empty:
        return xor(leaf(a), tau())
    return leaf(a)


def split(log_: EventLog, cut: Cut) -> tuple:
    s1, s2 = cut.sigma1, cut.sigma2
    left: Counter = Counter()
    right: Counter = Counter()
    op = cut.op.token
    for trace, count in log_.items():
        if op == "x":
            n1 = sum(1 for a in trace if a in s1)
            n2 = len(trace) - n1
            if n1 >= n2:
                left[tuple(a for a in trace if a in s1)] += count
            else:
                right[tuple(a for a in trace if a in s2)] += count
        elif op == "->":
            # misplacement count for split index k, scanned left to right
            bad = sum(1 for a in trace if a in s1)
            best_k, best_bad = 0, bad
            for k, a in enumerate(trace, start=1):
                bad += 1 if a in s2 else -1
                if bad < best_bad:
                    best_k, best_bad = k, bad
            left[tuple(a for a in trace[:best_k] if a in s1)] += count
            right[tuple(a for a in trace[best_k:] if a in s2)] += count
        elif op == "and":
            left[tuple(a for a in trace if a in s1)] += count
            right[tuple(a for a in trace if a in s2)] += count
        else:
            if not trace:
                left[()] += count
                continue
            runs = []
            for a in trace:
                side = 1 if a in s1 else 2
                if runs and runs[-1][0] == side:
                    runs[-1][1].append(a)
                else:
                    runs.append((side, [a]))
            if runs[0][0] == 2:
                left[()] += count
            for side, events in runs:
                (left if side == 1 else right)[tuple(events)] += count
            if runs[-1][0] == 2:
                left[()] += count
    return EventLog(left), EventLog(right)


def discover(log_: EventLog, config: ImrConfig | None = None, workers: int = 1,
             dump: IO[str] | None = None) -> DiscoveryReport:
    """Discover a process tree from ``log_`` under ``config``.

    ``dump`` receives a CSV row for every candidate cut of every recursion.
    ``workers`` only affects wall-clock time.
    """
    config = config or ImrConfig()
    steps: list = []
    writer = None
    if dump is not None:
        writer = csv.writer(dump, lineterminator="\n")
        writer.writerow(["recursion", "operator", "sigma1", "sigma2", "feasible", "cost", "rejected_by"])

    def rec(sub: EventLog, sigma: frozenset, depth: int) -> ProcessTree:
        base = check_base_case(sub, config.sup, sigma)
        alphabet = tuple(sorted(sigma))
        if base is not None:
            if config.strict and base.operator is Operator.LOOP:
                # a repeated single activity needs a loop, which at-most forbids
                blocking = [r for r in config.rules
                            if r.template is Template.AT_MOST and r.args == alphabet]
                if blocking:
                    raise StrictModeError(alphabet, [], f"base case {render_tree(base)} violates "
                                          f"{', '.join(str(r) for r in blocking)}")
            steps.append(RecursionStep(alphabet, depth, base=base))
            return base
        # the cut side, not the projected log, fixes the alphabet of a recursion
        dfg = replace(extract_dfg(sub), alphabet=sigma)
        space = CutSpace(dfg, sup=config.sup, xor_slack=config.xor_slack,
                         rules=tuple(config.rules), cap=config.enumeration_cap, workers=workers)
        if writer is not None:
            index = len(steps)
            for cut, feasible, c, rejected_by in space.rows():
                writer.writerow([index, cut.op.token, " ".join(sorted(cut.sigma1)),
                                 " ".join(sorted(cut.sigma2)), int(feasible), c,
                                 " ".join(str(r) for r in rejected_by)])
        result = space.evaluate()
        if result.fallback and config.strict:
            raise StrictModeError(sigma, space.candidates())
        if result.fallback:
            log.info("all %d cuts over %s rejected; ignoring rules here", result.n_candidates, alphabet)
        step_idx = len(steps)
        steps.append(None)
        chosen = result.best.cut
        left, right = split(sub, chosen)
        log.debug("depth %d: %s cost %d", depth, chosen, result.best.cost)
        t1 = rec(left, chosen.sigma1, depth + 1)
        t2 = rec(right, chosen.sigma2, depth + 1)
        steps[step_idx] = RecursionStep(alphabet, depth, cut=result.best, fallback=result.fallback,
                                        n_candidates=result.n_candidates, n_kept=result.n_kept)
        return ProcessTree(chosen.op, (t1, t2))

    tree = rec(log_, log_.alphabet, 0)
    return DiscoveryReport(tree, tuple(steps))


# -- guarantees ---------------------------------------------------------------

class Status(enum.Enum):
    SATISFIED_IN_BOUND = "SATISFIED_IN_BOUND"
    VIOLATED = "VIOLATED"


# strict discovery makes these hold for every trace of the model; the other
# templates are only guaranteed in their "can occur" form
HARD_GUARANTEES = frozenset({Template.NOT_CO_EXISTENCE, Template.NOT_SUCCESSION, Template.AT_MOST})


@dataclass(frozen=True)
class RuleStatus:
    rule: DeclareRule
    status: Status
    witness: tuple | None = None

    @property
    def hard_guarantee(self) -> bool:
        return self.rule.template in HARD_GUARANTEES


def guarantee_report(tree: ProcessTree, rules: Iterable[DeclareRule], max_len: int = 8,
                     max_loop: int = 2) -> list:
    language = bounded_language(tree, max_len, max_loop)
    out = []
    for r in RuleSet(rules):
        witness = next((t for t in language if not check_trace(r, t)), None)
        status = Status.SATISFIED_IN_BOUND if witness is None else Status.VIOLATED
        out.append(RuleStatus(r, status, witness))
    return out

