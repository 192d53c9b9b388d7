"""Process trees: construction, language membership, bounded enumeration and text I/O."""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Sequence


class Operator(enum.Enum):
    SEQUENCE = "->"
    XOR = "x"
    PARALLEL = "and"
    LOOP = "loop"

    @property
    def token(self) -> str:
        return self.value


_OP_BY_TOKEN = {op.value: op for op in Operator}


@dataclass(frozen=True)
class ProcessTree:
    """A process tree node.

    Exactly one of three shapes: a leaf (``label`` set), the silent step
    (neither ``label`` nor ``operator``), or an operator node with two or
    more ``children``. For loops the first child is the body and the rest
    are redo children.
    """

    operator: Operator | None = None
    children: tuple = ()
    label: str | None = None

    def __post_init__(self):
        if self.operator is None:
            if self.children:
                raise ValueError("leaf or silent node cannot have children")
            if self.label is not None and (not self.label or "\n" in self.label):
                raise ValueError(f"invalid activity label {self.label!r}")
        else:
            if self.label is not None:
                raise ValueError("operator node cannot carry a label")
            if len(self.children) < 2:
                raise ValueError(f"{self.operator.token} needs at least 2 children, got {len(self.children)}")
            for c in self.children:
                if not isinstance(c, ProcessTree):
                    raise TypeError(f"child {c!r} is not a ProcessTree")

    @property
    def is_leaf(self) -> bool:
        return self.operator is None and self.label is not None

    @property
    def is_silent(self) -> bool:
        return self.operator is None and self.label is None

    def alphabet(self) -> frozenset:
        if self.operator is None:
            return frozenset() if self.label is None else frozenset([self.label])
        return frozenset().union(*(c.alphabet() for c in self.children))

    def __str__(self) -> str:
        return render_tree(self)

    def to_dot(self) -> str:
        lines = ["digraph tree {"]
        counter = itertools.count()

        def visit(node: ProcessTree) -> str:
            nid = f"n{next(counter)}"
            if node.is_leaf:
                lines.append(f'  {nid} [label="{_dot_escape(node.label)}", shape=box];')
            elif node.is_silent:
                lines.append(f'  {nid} [label="τ", shape=box, style=filled, fillcolor=black, fontcolor=white];')
            else:
                sym = {"->": "→", "x": "×", "and": "∧", "loop": "↺"}[node.operator.token]
                lines.append(f'  {nid} [label="{sym}", shape=circle];')
                for c in node.children:
                    lines.append(f"  {nid} -> {visit(c)};")
            return nid

        visit(self)
        lines.append("}")
        return "\n".join(lines) + "\n"


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def leaf(label: str) -> ProcessTree:
    return ProcessTree(label=label)


def tau() -> ProcessTree:
    return ProcessTree()


def seq(*children: ProcessTree) -> ProcessTree:
    return ProcessTree(Operator.SEQUENCE, tuple(children))


def xor(*children: ProcessTree) -> ProcessTree:
    return ProcessTree(Operator.XOR, tuple(children))


def par(*children: ProcessTree) -> ProcessTree:
    return ProcessTree(Operator.PARALLEL, tuple(children))


def loop(*children: ProcessTree) -> ProcessTree:
    return ProcessTree(Operator.LOOP, tuple(children))


# -- membership -------------------------------------------------------------

class Acceptor:
    """Decides trace membership in the language of one tree.

    Results for (subtree, segment) pairs are cached on the instance, so
    checking many traces against the same tree reuses earlier work.
    """

    def __init__(self, tree: ProcessTree):
        self.tree = tree
        self._alpha: dict[int, frozenset] = {}
        self._memo: dict = {}
        self._index(tree)

    def _index(self, node: ProcessTree) -> frozenset:
        if node.operator is None:
            alpha = node.alphabet()
        else:
            alpha = frozenset().union(*(self._index(c) for c in node.children))
        self._alpha[id(node)] = alpha
        return alpha

    def __call__(self, trace: Sequence[str]) -> bool:
        return self._accepts(self.tree, tuple(trace))

    def _prefix_limit(self, node: ProcessTree, s: tuple, start: int) -> int:
        """Largest end index such that s[start:end] only uses node's alphabet."""
        alpha = self._alpha[id(node)]
        end = start
        while end < len(s) and s[end] in alpha:
            end += 1
        return end

    def _accepts(self, node: ProcessTree, s: tuple) -> bool:
        key = (id(node), s)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        op = node.operator
        if op is None:
            result = s == () if node.label is None else s == (node.label,)
        elif not set(s) <= self._alpha[id(node)]:
            result = False
        elif op is Operator.XOR:
            result = any(self._accepts(c, s) for c in node.children)
        elif op is Operator.SEQUENCE:
            result = self._chain(node.children, 0, s)
        elif op is Operator.PARALLEL:
            result = self._interleave(node.children, s)
        else:
            result = self._loop(node.children[0], node.children[1:], s)
        self._memo[key] = result
        return result

    def _chain(self, children: tuple, k: int, s: tuple) -> bool:
        key = ("chain", id(children), k, s)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        child = children[k]
        if k == len(children) - 1:
            result = self._accepts(child, s)
        else:
            limit = self._prefix_limit(child, s, 0)
            result = any(self._accepts(child, s[:j]) and self._chain(children, k + 1, s[j:])
                         for j in range(limit + 1))
        self._memo[key] = result
        return result

    def _interleave(self, children: tuple, s: tuple) -> bool:
        options = []
        for a in s:
            owners = [i for i, c in enumerate(children) if a in self._alpha[id(c)]]
            if not owners:
                return False
            options.append(owners)
        for assignment in itertools.product(*options):
            parts = [[] for _ in children]
            for a, i in zip(s, assignment):
                parts[i].append(a)
            if all(self._accepts(c, tuple(p)) for c, p in zip(children, parts)):
                return True
        return False

    def _loop(self, body: ProcessTree, redos: tuple, s: tuple) -> bool:
        # states: (position, phase) with phase 0 = body due, 1 = body just finished
        seen = set()
        stack = [(0, 0)]
        while stack:
            state = stack.pop()
            if state in seen:
                continue
            seen.add(state)
            i, phase = state
            if phase == 1 and i == len(s):
                return True
            parts = (body,) if phase == 0 else redos
            for part in parts:
                limit = self._prefix_limit(part, s, i)
                for j in range(i, limit + 1):
                    if (j, 1 - phase) not in seen and self._accepts(part, s[i:j]):
                        stack.append((j, 1 - phase))
        return False


def accepts(tree: ProcessTree, trace: Sequence[str]) -> bool:
    return Acceptor(tree)(trace)


# -- bounded language -------------------------------------------------------

class LanguageOverflowError(RuntimeError):
    pass


DEFAULT_LANGUAGE_CAP = 10**6


def _shuffle(x: tuple, y: tuple) -> Iterable[tuple]:
    if not x:
        yield y
        return
    if not y:
        yield x
        return
    for rest in _shuffle(x[1:], y):
        yield (x[0],) + rest
    for rest in _shuffle(x, y[1:]):
        yield (y[0],) + rest


def bounded_language(tree: ProcessTree, max_len: int, max_loop: int,
                     cap: int = DEFAULT_LANGUAGE_CAP) -> list:
    """All traces of the tree up to ``max_len`` events.

    Every loop node may run its redo part at most ``max_loop`` times per
    execution. Returns the traces in length-lexicographic order.
    """
    if max_len < 0 or max_loop < 0:
        raise ValueError("max_len and max_loop must be non-negative")

    def check(result: set) -> set:
        if len(result) > cap:
            raise LanguageOverflowError(f"bounded language exceeds {cap} traces")
        return result

    def lang(node: ProcessTree) -> set:
        op = node.operator
        if op is None:
            if node.label is None:
                return {()}
            return {(node.label,)} if max_len >= 1 else set()
        langs = [lang(c) for c in node.children]
        if op is Operator.XOR:
            return check(set().union(*langs))
        if op is Operator.SEQUENCE:
            acc = langs[0]
            for nxt in langs[1:]:
                acc = check({x + y for x in acc for y in nxt if len(x) + len(y) <= max_len})
            return acc
        if op is Operator.PARALLEL:
            acc = langs[0]
            for nxt in langs[1:]:
                acc = check({z for x in acc for y in nxt if len(x) + len(y) <= max_len
                             for z in _shuffle(x, y)})
            return acc
        body, redo = langs[0], set().union(*langs[1:])
        result = set(body)
        frontier = body
        for _ in range(max_loop):
            frontier = {x + r + b for x in frontier for r in redo for b in body
                        if len(x) + len(r) + len(b) <= max_len}
            if frontier <= result:
                break
            result |= frontier
            check(result)
        return result

    return sorted(lang(tree), key=lambda t: (len(t), t))


# -- text format ------------------------------------------------------------

class TreeSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


_WORD = re.compile(r"\w+")
_TOKEN = re.compile(r"\s*(?:(->)|([(),])|('(?:[^'\\]|\\.)*')|(\w+))")


def _quote(name: str) -> str:
    if _WORD.fullmatch(name) and name != "tau":
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def _unquote(tok: str) -> str:
    return re.sub(r"\\(.)", r"\1", tok[1:-1])


def render_tree(tree: ProcessTree) -> str:
    if tree.operator is None:
        return "tau" if tree.label is None else _quote(tree.label)
    return f"{tree.operator.token}({','.join(render_tree(c) for c in tree.children)})"


def parse_tree(text: str) -> ProcessTree:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise TreeSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        kind = {1: "op", 2: "punct", 3: "quoted", 4: "word"}[m.lastindex]
        tokens.append((kind, m.group(m.lastindex), start))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    i = 0

    def expect(value: str) -> None:
        nonlocal i
        kind, tok, at = tokens[i]
        if tok != value or kind not in ("punct",):
            raise TreeSyntaxError(f"expected {value!r}, found {tok or 'end of input'!r}", at)
        i += 1

    def node() -> ProcessTree:
        nonlocal i
        kind, tok, at = tokens[i]
        followed_by_paren = i + 1 < len(tokens) and tokens[i + 1][:2] == ("punct", "(")
        if kind == "op" or (kind == "word" and followed_by_paren):
            if tok not in _OP_BY_TOKEN:
                raise TreeSyntaxError(f"unknown operator {tok!r}", at)
            op = _OP_BY_TOKEN[tok]
            i += 1
            expect("(")
            children = [node()]
            while tokens[i][1] == "," and tokens[i][0] == "punct":
                i += 1
                children.append(node())
            expect(")")
            if len(children) < 2:
                raise TreeSyntaxError(f"operator {tok!r} needs at least 2 children", at)
            return ProcessTree(op, tuple(children))
        if kind == "word":
            i += 1
            return tau() if tok == "tau" else leaf(tok)
        if kind == "quoted":
            i += 1
            name = _unquote(tok)
            if not name:
                raise TreeSyntaxError("empty activity label", at)
            return leaf(name)
        raise TreeSyntaxError(f"unexpected token {tok or 'end of input'!r}", at)

    result = node()
    if tokens[i][0] != "eof":
        raise TreeSyntaxError(f"trailing input {tokens[i][1]!r}", tokens[i][2])
    return result
