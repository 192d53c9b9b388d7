"""Binary cuts: enumeration, rule-based rejection, costing and selection.

The functions at module level work on explicit :class:`Cut` objects and
are the reference behaviour. :class:`CutSpace` evaluates the same
predicates for every bipartition at once using bitmasks and is what the
discovery loop runs on.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .declare import DeclareRule, Template
from .dfg import Dfg
from .tree import Operator

SEQ, XOR, PAR, LOOP = Operator.SEQUENCE, Operator.XOR, Operator.PARALLEL, Operator.LOOP

# tie-break order between operators
OP_ORDER = {XOR: 0, SEQ: 1, PAR: 2, LOOP: 3}
SYMMETRIC_OPS = (XOR, PAR)
DEFAULT_ENUMERATION_CAP = 24


class ContractError(ValueError):
    """A caller broke a precondition of a cut operation."""


class EnumerationCapError(RuntimeError):
    pass


def _sorted_names(side: Iterable[str]) -> tuple:
    return tuple(sorted(side))


def shortlex(side: Iterable[str]) -> tuple:
    names = _sorted_names(side)
    return (len(names), names)


@dataclass(frozen=True)
class Cut:
    op: Operator
    sigma1: frozenset
    sigma2: frozenset

    def __post_init__(self):
        s1, s2 = frozenset(self.sigma1), frozenset(self.sigma2)
        if not s1 or not s2:
            raise ContractError("both sides of a cut must be non-empty")
        if s1 & s2:
            raise ContractError(f"cut sides overlap on {sorted(s1 & s2)}")
        if self.op in SYMMETRIC_OPS and _sorted_names(s2) < _sorted_names(s1):
            s1, s2 = s2, s1
        object.__setattr__(self, "sigma1", s1)
        object.__setattr__(self, "sigma2", s2)

    @property
    def alphabet(self) -> frozenset:
        return self.sigma1 | self.sigma2

    @property
    def balance(self) -> int:
        return min(len(self.sigma1), len(self.sigma2))

    def side(self, a: str) -> int:
        if a in self.sigma1:
            return 1
        if a in self.sigma2:
            return 2
        raise ContractError(f"activity {a!r} is not part of the cut")

    def __str__(self) -> str:
        def fmt(s):
            return "{" + ",".join(_sorted_names(s)) + "}"
        return f"{self.op.token}({fmt(self.sigma1)},{fmt(self.sigma2)})"


@dataclass(frozen=True)
class ScoredCut:
    cut: Cut
    cost: int
    rejected_by: tuple = ()

    @property
    def rejected(self) -> bool:
        return bool(self.rejected_by)


# -- rejection table --------------------------------------------------------

_CROSS = frozenset({(1, 2), (2, 1)})
_ALL = frozenset({(1, 1), (2, 2), (1, 2), (2, 1)})

# template -> operator -> placements that reject the cut;
# unary placements are (side of a,), binary ones (side of a, side of b)
RED_CELLS = {
    Template.AT_MOST: {LOOP: {(1,), (2,)}},
    Template.EXISTENCE: {XOR: {(1,), (2,)}, LOOP: {(2,)}},
    Template.RESPONSE: {SEQ: {(2, 1)}, XOR: _CROSS, PAR: _CROSS, LOOP: {(1, 2)}},
    Template.PRECEDENCE: {SEQ: {(2, 1)}, XOR: _CROSS, PAR: _CROSS, LOOP: {(2, 1)}},
    Template.CO_EXISTENCE: {XOR: _CROSS, LOOP: _CROSS},
    Template.NOT_CO_EXISTENCE: {SEQ: _CROSS, PAR: _CROSS, LOOP: _ALL},
    Template.NOT_SUCCESSION: {SEQ: {(1, 2)}, PAR: _CROSS, LOOP: _ALL},
    Template.RESPONDED_EXISTENCE: {XOR: _CROSS, LOOP: {(1, 2)}},
}


def reject(cut: Cut, rule: DeclareRule) -> bool:
    if not rule.activities <= cut.alphabet:
        raise ContractError(f"rule {rule} mentions activities outside the cut alphabet")
    placement = tuple(cut.side(a) for a in rule.args)
    return placement in RED_CELLS[rule.template].get(cut.op, ())


def scoped(rules: Iterable[DeclareRule], alphabet: Iterable[str]) -> list:
    alphabet = frozenset(alphabet)
    return [r for r in rules if r.activities <= alphabet]


def rejecting_rules(cut: Cut, rules: Iterable[DeclareRule]) -> tuple:
    return tuple(r for r in scoped(rules, cut.alphabet) if reject(cut, r))


def apply_rules(cuts: Iterable[Cut], rules: Iterable[DeclareRule]) -> tuple:
    """Drop cuts rejected by an in-scope rule; fall back to all cuts if none survive.

    Returns ``(kept, fallback)``.
    """
    cuts = list(cuts)
    rules = list(rules)
    kept = [c for c in cuts if not rejecting_rules(c, rules)]
    if not kept and cuts:
        return cuts, True
    return kept, False


# -- feasibility and cost ---------------------------------------------------

def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def _ceil_mul(f: Fraction, x: int) -> int:
    return -((-f.numerator * x) // f.denominator)


def is_feasible(cut: Cut, dfg: Dfg, xor_slack=0) -> bool:
    fwd = dfg.agg(cut.sigma1, cut.sigma2)
    bwd = dfg.agg(cut.sigma2, cut.sigma1)
    if cut.op is XOR:
        return fwd + bwd <= as_fraction(xor_slack) * dfg.trace_count
    if cut.op is SEQ:
        return fwd >= 1
    if cut.op is PAR:
        return fwd >= 1 and bwd >= 1
    return fwd >= 1 and bwd >= 1 and dfg.start(cut.sigma1) >= 1 and dfg.end(cut.sigma1) >= 1


def explore(dfg: Dfg, cap: int = DEFAULT_ENUMERATION_CAP, xor_slack=0) -> list:
    """All structurally feasible binary cuts of the DFG alphabet."""
    acts = sorted(dfg.alphabet)
    if len(acts) < 2:
        raise ContractError("explore needs at least two activities")
    if len(acts) > cap:
        raise EnumerationCapError(
            f"alphabet has {len(acts)} activities, above the enumeration cap of {cap}; "
            "raise the cap explicitly to enumerate anyway")
    out = []
    full = frozenset(acts)
    for r in range(1, len(acts)):
        for left in itertools.combinations(acts, r):
            s1 = frozenset(left)
            s2 = full - s1
            for op in (XOR, SEQ, PAR, LOOP):
                if op in SYMMETRIC_OPS and acts[0] not in s1:
                    continue
                cut = Cut(op, s1, s2)
                if is_feasible(cut, dfg, xor_slack):
                    out.append(cut)
    return out


def cost(cut: Cut, dfg: Dfg, sup) -> int:
    sup = as_fraction(sup)
    q = _ceil_mul(sup, dfg.trace_count)
    s1, s2 = cut.sigma1, cut.sigma2
    fwd, bwd = dfg.agg(s1, s2), dfg.agg(s2, s1)
    if cut.op is SEQ:
        return bwd + max(0, q - fwd)
    if cut.op is XOR:
        return fwd + bwd + max(0, q - dfg.start(s1)) + max(0, q - dfg.start(s2))
    if cut.op is PAR:
        total = 0
        for a in s1:
            for b in s2:
                need = _ceil_mul(sup, min(dfg.activity_freq.get(a, 0), dfg.activity_freq.get(b, 0)))
                total += max(0, need - dfg.m(a, b)) + max(0, need - dfg.m(b, a))
        return (total + max(0, q - dfg.start(s1)) + max(0, q - dfg.start(s2))
                + max(0, q - dfg.end(s1)) + max(0, q - dfg.end(s2)))
    return dfg.start(s2) + dfg.end(s2) + max(0, _ceil_mul(sup, fwd) - bwd)


def selection_key(cut: Cut, cut_cost: int) -> tuple:
    return (cut_cost, -cut.balance, OP_ORDER[cut.op], shortlex(cut.sigma1))


def select(kept: Iterable[Cut], dfg: Dfg, sup) -> ScoredCut:
    scored = [(selection_key(c, cost(c, dfg, sup)), c) for c in kept]
    if not scored:
        raise ContractError("select needs at least one candidate cut")
    key, best = min(scored, key=lambda kc: kc[0])
    return ScoredCut(best, key[0])


# -- vectorised evaluation over all bipartitions ---------------------------

_OPS = (XOR, SEQ, PAR, LOOP)
CHUNK = 1 << 15


@dataclass
class Evaluation:
    """Outcome of one recursion's cut search."""

    best: ScoredCut
    fallback: bool
    n_candidates: int
    n_kept: int


@dataclass
class CutSpace:
    """All bipartitions of a DFG alphabet, evaluated chunk by chunk.

    Bit ``i`` of a mask means activity ``acts[i]`` (sorted order) is in
    sigma1. Symmetric operators only consider masks containing bit 0,
    which is exactly the canonical side.
    """

    dfg: Dfg
    sup: object = 0
    xor_slack: object = 0
    rules: tuple = ()
    cap: int = DEFAULT_ENUMERATION_CAP
    workers: int = 1
    acts: list = field(init=False)

    def __post_init__(self):
        self.acts = sorted(self.dfg.alphabet)
        k = len(self.acts)
        if k < 2:
            raise ContractError("cut search needs at least two activities")
        if k > self.cap:
            raise EnumerationCapError(
                f"alphabet has {k} activities, above the enumeration cap of {self.cap}; "
                "raise the cap explicitly to enumerate anyway")
        self.sup = as_fraction(self.sup)
        self.xor_slack = as_fraction(self.xor_slack)
        self.rules = tuple(scoped(self.rules, self.acts))
        idx = {a: i for i, a in enumerate(self.acts)}
        d = self.dfg
        self._W = np.zeros((k, k))
        for (a, b), c in d.edge_freq.items():
            self._W[idx[a], idx[b]] = c
        self._start = np.array([d.start_freq.get(a, 0) for a in self.acts], dtype=float)
        self._end = np.array([d.end_freq.get(a, 0) for a in self.acts], dtype=float)
        freq = [d.activity_freq.get(a, 0) for a in self.acts]
        P = np.zeros((k, k))
        for i in range(k):
            for j in range(k):
                if i != j:
                    need = _ceil_mul(self.sup, min(freq[i], freq[j]))
                    P[i, j] = max(0, need - self._W[i, j]) + max(0, need - self._W[j, i])
        self._P = P
        self._q = _ceil_mul(self.sup, d.trace_count)
        self._slack_mass = math.floor(self.xor_slack * d.trace_count)
        # per-operator rejection weights
        self._unary = {op: [np.zeros(k), np.zeros(k)] for op in _OPS}
        self._binary = {op: {} for op in _OPS}
        for r in self.rules:
            for op, cells in RED_CELLS[r.template].items():
                for cell in cells:
                    if len(cell) == 1:
                        self._unary[op][cell[0] - 1][idx[r.args[0]]] += 1
                    else:
                        mat = self._binary[op].setdefault(cell, np.zeros((k, k)))
                        mat[idx[r.args[0]], idx[r.args[1]]] += 1

    @property
    def size(self) -> int:
        return len(self.acts)

    def masks(self):
        return np.arange(1, (1 << self.size) - 1, dtype=np.int64)

    def _chunk_arrays(self, masks: np.ndarray) -> dict:
        k = self.size
        X = ((masks[:, None] >> np.arange(k)) & 1).astype(float)
        Y = 1.0 - X
        fwd = np.rint(((X @ self._W) * Y).sum(axis=1)).astype(np.int64)
        bwd = np.rint(((Y @ self._W) * X).sum(axis=1)).astype(np.int64)
        s1 = np.rint(X @ self._start).astype(np.int64)
        s2 = np.rint(Y @ self._start).astype(np.int64)
        e1 = np.rint(X @ self._end).astype(np.int64)
        e2 = np.rint(Y @ self._end).astype(np.int64)
        pairs = np.rint(((X @ self._P) * Y).sum(axis=1)).astype(np.int64)
        q = self._q

        def miss(x):
            return np.maximum(0, q - x)

        canonical = (masks & 1) == 1
        num, den = self.sup.numerator, self.sup.denominator
        loop_need = -((-num * fwd) // den)
        out = {
            XOR: (canonical & ((fwd + bwd) <= self._slack_mass), fwd + bwd + miss(s1) + miss(s2)),
            SEQ: (fwd >= 1, bwd + miss(fwd)),
            PAR: (canonical & (fwd >= 1) & (bwd >= 1), pairs + miss(s1) + miss(s2) + miss(e1) + miss(e2)),
            LOOP: ((fwd >= 1) & (bwd >= 1) & (s1 >= 1) & (e1 >= 1), s2 + e2 + np.maximum(0, loop_need - bwd)),
        }
        rejected = {}
        for op in _OPS:
            hits = X @ self._unary[op][0] + Y @ self._unary[op][1]
            for (pa, pb), mat in self._binary[op].items():
                left = X if pa == 1 else Y
                right = X if pb == 1 else Y
                hits = hits + ((left @ mat) * right).sum(axis=1)
            rejected[op] = hits > 0.5
        return {"X": X, "ops": out, "rejected": rejected}

    def _chunk_summary(self, masks: np.ndarray) -> dict:
        arrays = self._chunk_arrays(masks)
        pop = arrays["X"].sum(axis=1).astype(np.int64)
        balance = np.minimum(pop, self.size - pop)
        summary = {}
        for use_rules in (True, False):
            best = None
            n_cand = n_kept = 0
            for op in _OPS:
                feasible, costs = arrays["ops"][op]
                sel = feasible & ~arrays["rejected"][op] if use_rules else feasible
                n_cand += int(feasible.sum())
                n_kept += int(sel.sum())
                if not sel.any():
                    continue
                c = costs[sel]
                b = balance[sel]
                m = masks[sel]
                cmin = c.min()
                tie = c == cmin
                bmax = b[tie].max()
                tie &= b == bmax
                for mask in m[tie]:
                    key = (int(cmin), -int(bmax), OP_ORDER[op], self._shortlex_mask(int(mask)))
                    if best is None or key < best[0]:
                        best = (key, op, int(mask))
            summary[use_rules] = (best, n_cand, n_kept)
        return summary

    def _shortlex_mask(self, mask: int) -> tuple:
        names = tuple(a for i, a in enumerate(self.acts) if mask >> i & 1)
        return (len(names), names)

    def cut_of(self, op: Operator, mask: int) -> Cut:
        s1 = frozenset(a for i, a in enumerate(self.acts) if mask >> i & 1)
        return Cut(op, s1, frozenset(self.acts) - s1)

    def _chunks(self):
        masks = self.masks()
        return [masks[i:i + CHUNK] for i in range(0, len(masks), CHUNK)]

    def evaluate(self) -> Evaluation:
        chunks = self._chunks()
        if self.workers > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                parts = list(pool.map(self._chunk_summary, chunks))
        else:
            parts = [self._chunk_summary(c) for c in chunks]

        def reduce(use_rules):
            best, n_cand, n_kept = None, 0, 0
            for part in parts:
                b, nc, nk = part[use_rules]
                n_cand += nc
                n_kept += nk
                if b is not None and (best is None or b[0] < best[0]):
                    best = b
            return best, n_cand, n_kept

        best, n_cand, n_kept = reduce(True)
        fallback = False
        if best is None:
            fallback = True
            best, _, _ = reduce(False)
        if best is None:
            raise ContractError("no feasible cut exists for this alphabet")
        key, op, mask = best
        cut = self.cut_of(op, mask)
        rejected_by = rejecting_rules(cut, self.rules) if fallback else ()
        return Evaluation(ScoredCut(cut, key[0], rejected_by), fallback, n_cand, n_kept)

    def candidates(self) -> list:
        """Every feasible cut as a :class:`ScoredCut` with its rejecting rules."""
        out = []
        for chunk in self._chunks():
            arrays = self._chunk_arrays(chunk)
            for op in _OPS:
                feasible, costs = arrays["ops"][op]
                for mask, c in zip(chunk[feasible], costs[feasible]):
                    cut = self.cut_of(op, int(mask))
                    out.append(ScoredCut(cut, int(c), rejecting_rules(cut, self.rules)))
        out.sort(key=lambda s: selection_key(s.cut, s.cost))
        return out

    def rows(self):
        """Diagnostic rows for every (operator, bipartition) pair."""
        for chunk in self._chunks():
            arrays = self._chunk_arrays(chunk)
            for op in _OPS:
                feasible, costs = arrays["ops"][op]
                for mask, f, c in zip(chunk, feasible, costs):
                    mask = int(mask)
                    if op in SYMMETRIC_OPS and not mask & 1:
                        continue
                    cut = self.cut_of(op, mask)
                    rejected_by = rejecting_rules(cut, self.rules) if f else ()
                    yield cut, bool(f), int(c), rejected_by
