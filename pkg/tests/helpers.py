"""Test-only utilities: random trees, trace sampling, and the rejection-table oracle."""

import itertools
import random

from imr.declare import DeclareRule, Template, check_trace
from imr.log import EventLog
from imr.tree import Operator, ProcessTree, bounded_language, leaf, loop, tau, xor

OPS = list(Operator)


def sample_trace(tree, rng, redo_p=0.3, max_redo=3):
    op = tree.operator
    if op is None:
        return [] if tree.label is None else [tree.label]
    if op is Operator.SEQUENCE:
        return [a for c in tree.children for a in sample_trace(c, rng, redo_p, max_redo)]
    if op is Operator.XOR:
        return sample_trace(rng.choice(tree.children), rng, redo_p, max_redo)
    if op is Operator.PARALLEL:
        parts = [sample_trace(c, rng, redo_p, max_redo) for c in tree.children]
        out = []
        while any(parts):
            p = rng.choice([p for p in parts if p])
            out.append(p.pop(0))
        return out
    out = sample_trace(tree.children[0], rng, redo_p, max_redo)
    for _ in range(max_redo):
        if rng.random() >= redo_p:
            break
        out += sample_trace(rng.choice(tree.children[1:]), rng, redo_p, max_redo)
        out += sample_trace(tree.children[0], rng, redo_p, max_redo)
    return out


def random_tree(rng, depth, alphabet, tau_p=0.1):
    """A random tree of at most ``depth`` operator levels; labels may repeat."""
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < tau_p:
            return tau()
        return leaf(rng.choice(alphabet))
    op = rng.choice(OPS)
    arity = 2 if op is Operator.LOOP or rng.random() < 0.7 else 3
    return ProcessTree(op, tuple(random_tree(rng, depth - 1, alphabet, tau_p) for _ in range(arity)))


def random_block_tree(rng, acts, tau_p=0.15):
    """A random tree using every activity of ``acts`` exactly once."""
    acts = list(acts)
    if len(acts) == 1:
        base = leaf(acts[0])
        r = rng.random()
        if r < tau_p:
            return xor(base, tau())
        if r < 2 * tau_p:
            return loop(base, tau())
        return base
    rng.shuffle(acts)
    k = rng.randint(1, len(acts) - 1)
    op = rng.choice(OPS)
    return ProcessTree(op, (random_block_tree(rng, acts[:k], tau_p), random_block_tree(rng, acts[k:], tau_p)))


def random_log(rng, n_acts=None, n_traces=None, tree=None):
    n_acts = n_acts or rng.randint(2, 6)
    acts = [chr(ord("a") + i) for i in range(n_acts)]
    tree = tree or random_block_tree(rng, acts)
    n_traces = n_traces or rng.randint(1, 50)
    return EventLog.from_traces(sample_trace(tree, rng) for _ in range(n_traces)), tree


def all_words(alphabet, max_len):
    alphabet = sorted(alphabet)
    for n in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=n)


# -- rejection-table oracle -------------------------------------------------

UNARY_PLACEMENTS = [(1,), (2,)]
BINARY_PLACEMENTS = [(1, 1), (2, 2), (1, 2), (2, 1)]


def placements(template):
    return UNARY_PLACEMENTS if template.arity == 1 else BINARY_PLACEMENTS


def cell_rule(template):
    return DeclareRule(template, ("a",) if template.arity == 1 else ("a", "b"))


def cell_sides(template, placement):
    """Activity sides for one table cell; a filler ``c`` keeps both sides non-empty."""
    sides = {1: [], 2: []}
    for name, p in zip("ab", placement):
        sides[p].append(name)
    for k in (1, 2):
        if not sides[k]:
            sides[k].append("c")
    return sides[1], sides[2]


def side_trees(acts):
    """Witness subtrees over ``acts`` in which every activity appears."""
    if len(acts) == 1:
        (x,) = acts
        return [leaf(x), xor(leaf(x), tau()), loop(leaf(x), tau())]
    x, y = acts
    return [ProcessTree(op, (leaf(p), leaf(q))) for op in OPS for p, q in ((x, y), (y, x))]


def witness_trees(op, template, placement):
    s1, s2 = cell_sides(template, placement)
    for m1 in side_trees(s1):
        for m2 in side_trees(s2):
            yield ProcessTree(op, (m1, m2))


def oracle_cell(op, template, placement, max_len=6, max_loop=2):
    """Brute-force red/blank status of one cell.

    Red when every witness tree admits a violating trace within the bound;
    blank otherwise. Also returns the witness trees showing no violation.
    """
    r = cell_rule(template)
    clean = []
    for m in witness_trees(op, template, placement):
        if all(check_trace(r, t) for t in bounded_language(m, max_len, max_loop)):
            clean.append(m)
    return not clean, clean
