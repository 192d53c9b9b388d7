"""The eight Declare templates used to constrain discovery.

Rules are checked trace-by-trace; a rule that is not activated by a trace
(for example ``response(a, b)`` on a trace without ``a``) counts as
satisfied.
"""

from __future__ import annotations

import enum
import itertools
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .log import EventLog


class Template(enum.Enum):
    AT_MOST = "at-most"
    EXISTENCE = "existence"
    RESPONSE = "response"
    PRECEDENCE = "precedence"
    CO_EXISTENCE = "co-existence"
    NOT_CO_EXISTENCE = "not-co-existence"
    NOT_SUCCESSION = "not-succession"
    RESPONDED_EXISTENCE = "responded-existence"

    @property
    def arity(self) -> int:
        return 1 if self in (Template.AT_MOST, Template.EXISTENCE) else 2

    @property
    def symmetric(self) -> bool:
        return self in (Template.CO_EXISTENCE, Template.NOT_CO_EXISTENCE)

    @classmethod
    def lookup(cls, name: str) -> "Template":
        key = name.strip().lower().replace("_", "-")
        for t in cls:
            if t.value == key:
                return t
        raise KeyError(name)


_TEMPLATE_ORDER = {t: i for i, t in enumerate(Template)}


@dataclass(frozen=True)
class DeclareRule:
    template: Template
    args: tuple

    def __post_init__(self):
        if not isinstance(self.template, Template):
            object.__setattr__(self, "template", Template.lookup(self.template))
        args = tuple(self.args)
        if self.template.symmetric:
            args = tuple(sorted(args))
        object.__setattr__(self, "args", args)
        if len(self.args) != self.template.arity:
            raise ValueError(f"{self.template.value} takes {self.template.arity} argument(s), "
                             f"got {len(self.args)}")
        if len(set(self.args)) != len(self.args):
            raise ValueError(f"{self.template.value} needs distinct arguments, got {self.args}")
        for a in self.args:
            if not isinstance(a, str) or not a:
                raise ValueError(f"invalid activity {a!r}")

    @property
    def activities(self) -> frozenset:
        return frozenset(self.args)

    def sort_key(self):
        return (_TEMPLATE_ORDER[self.template], self.args)

    def __lt__(self, other: "DeclareRule") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return f"{self.template.value}({','.join(_quote(a) for a in self.args)})"


def rule(template: str | Template, *args: str) -> DeclareRule:
    return DeclareRule(template if isinstance(template, Template) else Template.lookup(template), args)


class RuleSet(frozenset):
    """A set of rules whose iteration order is the canonical (sorted) order."""

    def __iter__(self):
        return iter(sorted(frozenset.__iter__(self)))

    def __repr__(self) -> str:
        return f"RuleSet([{', '.join(str(r) for r in self)}])"


# -- checking --------------------------------------------------------------

def check_trace(r: DeclareRule, trace: Sequence[str]) -> bool:
    t = r.template
    if t is Template.AT_MOST:
        return trace.count(r.args[0]) <= 1
    if t is Template.EXISTENCE:
        return r.args[0] in trace
    a, b = r.args
    if t is Template.RESPONSE:
        last_b = -1
        for i, x in enumerate(trace):
            if x == b:
                last_b = i
        return all(i < last_b for i, x in enumerate(trace) if x == a)
    if t is Template.PRECEDENCE:
        for x in trace:
            if x == a:
                return True
            if x == b:
                return False
        return True
    if t is Template.CO_EXISTENCE:
        return (a in trace) == (b in trace)
    if t is Template.NOT_CO_EXISTENCE:
        return not (a in trace and b in trace)
    if t is Template.NOT_SUCCESSION:
        seen_a = False
        for x in trace:
            if x == a:
                seen_a = True
            elif x == b and seen_a:
                return False
        return True
    # responded existence
    return a not in trace or b in trace


def is_activated(r: DeclareRule, trace: Sequence[str]) -> bool:
    """Whether the trace triggers the rule non-vacuously."""
    t = r.template
    if t.arity == 1:
        return True
    a, b = r.args
    if t is Template.PRECEDENCE:
        return b in trace
    if t.symmetric:
        return a in trace or b in trace
    return a in trace


def confidence(r: DeclareRule, log: EventLog) -> Fraction:
    if log.n == 0:
        raise ValueError("confidence is undefined on an empty log")
    ok = sum(count for trace, count in log.items() if check_trace(r, trace))
    return Fraction(ok, log.n)


def candidate_rules(alphabet: Iterable[str]) -> list:
    acts = sorted(alphabet)
    out = []
    for t in Template:
        if t.arity == 1:
            out.extend(DeclareRule(t, (a,)) for a in acts)
        elif t.symmetric:
            out.extend(DeclareRule(t, pair) for pair in itertools.combinations(acts, 2))
        else:
            out.extend(DeclareRule(t, pair) for pair in itertools.permutations(acts, 2))
    return out


def mine_rules(log: EventLog, min_confidence=1, min_support: int = 1, workers: int = 1) -> RuleSet:
    """Instantiate all templates over the log alphabet and keep the confident ones."""
    if log.n == 0:
        return RuleSet()
    threshold = Fraction(min_confidence) if not isinstance(min_confidence, float) \
        else Fraction(str(min_confidence))
    variants = list(log.items())

    def keep(r: DeclareRule) -> bool:
        ok = support = 0
        for trace, count in variants:
            if check_trace(r, trace):
                ok += count
            if is_activated(r, trace):
                support += count
        return Fraction(ok, log.n) >= threshold and support >= min_support

    candidates = candidate_rules(log.alphabet)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            flags = list(pool.map(keep, candidates, chunksize=64))
    else:
        flags = [keep(r) for r in candidates]
    return RuleSet(r for r, f in zip(candidates, flags) if f)


# -- rule files ------------------------------------------------------------

class RuleSyntaxError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


_NEEDS_QUOTES = re.compile(r"[(),\s'#\\]")


def _quote(a: str) -> str:
    if _NEEDS_QUOTES.search(a):
        return "'" + a.replace("\\", "\\\\").replace("'", "\\'") + "'"
    return a


_RULE_LINE = re.compile(r"\s*([A-Za-z_-]+)\s*\((.*)\)\s*$")
_ARG = re.compile(r"\s*(?:'((?:[^'\\]|\\.)*)'|([^,'()#]*[^,'()#\s]))\s*(,|$)")


def _strip_comment(line: str) -> str:
    in_quote = escaped = False
    for i, ch in enumerate(line):
        if escaped:
            escaped = False
        elif ch == "\\" and in_quote:
            escaped = True
        elif ch == "'":
            in_quote = not in_quote
        elif ch == "#" and not in_quote:
            return line[:i]
    return line


def parse_rules(text: str) -> RuleSet:
    rules = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        m = _RULE_LINE.match(line)
        if not m:
            raise RuleSyntaxError(f"cannot parse rule {line!r}", lineno)
        name, body = m.groups()
        try:
            template = Template.lookup(name)
        except KeyError:
            raise RuleSyntaxError(f"unknown template {name!r}", lineno) from None
        args, pos = [], 0
        while pos < len(body):
            am = _ARG.match(body, pos)
            if not am or am.end() == pos:
                raise RuleSyntaxError(f"malformed arguments {body!r}", lineno)
            quoted, plain, sep = am.groups()
            args.append(re.sub(r"\\(.)", r"\1", quoted) if quoted is not None else plain)
            pos = am.end()
            if sep == "," and pos >= len(body):
                raise RuleSyntaxError("trailing comma", lineno)
        try:
            rules.append(DeclareRule(template, tuple(args)))
        except ValueError as exc:
            raise RuleSyntaxError(str(exc), lineno) from None
    return RuleSet(rules)


def render_rules(rules: Iterable[DeclareRule]) -> str:
    return "".join(f"{r}\n" for r in sorted(set(rules)))


def rules_to_json(rules: Iterable[DeclareRule]) -> str:
    return json.dumps([{"template": r.template.value, "args": list(r.args)} for r in sorted(set(rules))],
                      indent=2) + "\n"


def rules_from_json(text: str) -> RuleSet:
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError("rule JSON must be an array")
    out = []
    for i, item in enumerate(data):
        try:
            out.append(DeclareRule(Template.lookup(item["template"]), tuple(item["args"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"rule {i}: {exc}") from None
    return RuleSet(out)


def load_rules(path) -> RuleSet:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("["):
        return rules_from_json(text)
    return parse_rules(text)
