"""Block-structured translation of process trees into workflow nets."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from collections import deque
from dataclasses import dataclass, field

from .tree import Operator, ProcessTree


@dataclass(frozen=True)
class Transition:
    id: str
    label: str | None  # None marks a silent transition

    @property
    def silent(self) -> bool:
        return self.label is None


@dataclass
class PetriNet:
    places: list = field(default_factory=list)
    transitions: list = field(default_factory=list)
    arcs: list = field(default_factory=list)  # (source id, target id)
    source: str | None = None
    sink: str | None = None

    @property
    def initial_marking(self) -> dict:
        return {self.source: 1}

    @property
    def final_marking(self) -> dict:
        return {self.sink: 1}

    def preset(self, node: str) -> list:
        return [s for s, t in self.arcs if t == node]

    def postset(self, node: str) -> list:
        return [t for s, t in self.arcs if s == node]


class _Builder:
    def __init__(self):
        self.net = PetriNet()

    def place(self) -> str:
        pid = f"p{len(self.net.places)}"
        self.net.places.append(pid)
        return pid

    def transition(self, label: str | None, src: str | list, dst: str | list) -> str:
        tid = f"t{len(self.net.transitions)}"
        self.net.transitions.append(Transition(tid, label))
        for p in ([src] if isinstance(src, str) else src):
            self.net.arcs.append((p, tid))
        for p in ([dst] if isinstance(dst, str) else dst):
            self.net.arcs.append((tid, p))
        return tid

    def build(self, node: ProcessTree, src: str, dst: str) -> None:
        op = node.operator
        if op is None:
            self.transition(node.label, src, dst)
        elif op is Operator.SEQUENCE:
            places = [src] + [self.place() for _ in node.children[:-1]] + [dst]
            for child, a, b in zip(node.children, places, places[1:]):
                self.build(child, a, b)
        elif op is Operator.XOR:
            for child in node.children:
                self.build(child, src, dst)
        elif op is Operator.PARALLEL:
            ins = [self.place() for _ in node.children]
            outs = [self.place() for _ in node.children]
            self.transition(None, src, ins)
            for child, a, b in zip(node.children, ins, outs):
                self.build(child, a, b)
            self.transition(None, outs, dst)
        else:
            entry, exit_ = self.place(), self.place()
            self.transition(None, src, entry)
            self.build(node.children[0], entry, exit_)
            for redo in node.children[1:]:
                self.build(redo, exit_, entry)
            self.transition(None, exit_, dst)


def to_petri_net(tree: ProcessTree) -> PetriNet:
    b = _Builder()
    source, sink = b.place(), b.place()
    b.net.source, b.net.sink = source, sink
    b.build(tree, source, sink)
    return b.net


def workflow_violations(net: PetriNet) -> list:
    """Structural workflow-net problems; an empty list means the net is well formed."""
    problems = []
    nodes = list(net.places) + [t.id for t in net.transitions]
    sources = [p for p in net.places if not net.preset(p)]
    sinks = [p for p in net.places if not net.postset(p)]
    if sources != [net.source]:
        problems.append(f"expected single source place {net.source}, found {sources}")
    if sinks != [net.sink]:
        problems.append(f"expected single sink place {net.sink}, found {sinks}")
    succ: dict = {n: [] for n in nodes}
    pred: dict = {n: [] for n in nodes}
    for s, t in net.arcs:
        succ[s].append(t)
        pred[t].append(s)
    for s, t in net.arcs:
        if (s in net.places) == (t in net.places):
            problems.append(f"arc {s}->{t} does not alternate place/transition")

    def reach(start, edges):
        seen, todo = {start}, [start]
        while todo:
            for nxt in edges[todo.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        return seen

    forward = reach(net.source, succ)
    backward = reach(net.sink, pred)
    for n in nodes:
        if n not in forward or n not in backward:
            problems.append(f"{n} is not on a path from source to sink")
    return problems


def _enabled(net_pre: dict, marking: frozenset, tid: str) -> bool:
    return all(p in marking for p in net_pre[tid])


def marking_language(net: PetriNet, max_len: int, max_states: int = 10**6) -> set:
    """Label sequences (≤ ``max_len``) leading from the initial to the final marking.

    Markings are treated as sets of places: the block construction yields
    safe nets, and a firing that would put a second token on a place raises.
    """
    pre = {t.id: [] for t in net.transitions}
    post = {t.id: [] for t in net.transitions}
    for s, t in net.arcs:
        if t in pre:
            pre[t].append(s)
        else:
            post[s].append(t)
    labels = {t.id: t.label for t in net.transitions}
    start = (frozenset([net.source]), ())
    final = frozenset([net.sink])
    seen = {start}
    queue = deque([start])
    result = set()
    while queue:
        marking, word = queue.popleft()
        if marking == final:
            result.add(word)
        for tid in labels:
            if not _enabled(pre, marking, tid):
                continue
            rest = marking.difference(pre[tid])
            if rest.intersection(post[tid]):
                raise ValueError(f"net is not safe: firing {tid} from {sorted(marking)}")
            nxt_marking = rest.union(post[tid])
            label = labels[tid]
            nxt_word = word if label is None else word + (label,)
            if len(nxt_word) > max_len:
                continue
            state = (nxt_marking, nxt_word)
            if state not in seen:
                if len(seen) >= max_states:
                    raise RuntimeError("marking graph exploration exceeded the state cap")
                seen.add(state)
                queue.append(state)
    return result


def to_pnml(net: PetriNet, name: str = "net") -> str:
    root = ET.Element("pnml")
    net_el = ET.SubElement(root, "net", {"id": name, "type": "http://www.pnml.org/version-2009/grammar/pnmlcoremodel"})
    ET.SubElement(ET.SubElement(net_el, "name"), "text").text = name
    page = ET.SubElement(net_el, "page", {"id": "page0"})
    for pid in net.places:
        p = ET.SubElement(page, "place", {"id": pid})
        ET.SubElement(ET.SubElement(p, "name"), "text").text = pid
        if pid == net.source:
            ET.SubElement(ET.SubElement(p, "initialMarking"), "text").text = "1"
    for t in net.transitions:
        t_el = ET.SubElement(page, "transition", {"id": t.id})
        ET.SubElement(ET.SubElement(t_el, "name"), "text").text = t.label if t.label is not None else "tau"
        if t.silent:
            ET.SubElement(t_el, "toolspecific", {"tool": "ProM", "version": "6.4",
                                                 "activity": "$invisible$", "localNodeID": t.id,
                                                 "invisible": "true"})
    for i, (s, t) in enumerate(net.arcs):
        ET.SubElement(page, "arc", {"id": f"a{i}", "source": s, "target": t})
    final = ET.SubElement(net_el, "finalmarkings")
    marking = ET.SubElement(final, "marking")
    fp = ET.SubElement(marking, "place", {"idref": net.sink})
    ET.SubElement(fp, "text").text = "1"
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def from_pnml(text: str) -> PetriNet:
    """Read back a net written by :func:`to_pnml`."""
    root = ET.fromstring(text)
    page = root.find("net/page")
    net = PetriNet()
    for p in page.findall("place"):
        net.places.append(p.get("id"))
        if p.find("initialMarking") is not None:
            net.source = p.get("id")
    for t in page.findall("transition"):
        ts = t.find("toolspecific")
        silent = ts is not None and ts.get("invisible") == "true"
        net.transitions.append(Transition(t.get("id"), None if silent else t.findtext("name/text")))
    for a in page.findall("arc"):
        net.arcs.append((a.get("source"), a.get("target")))
    sink = root.find("net/finalmarkings/marking/place")
    net.sink = sink.get("idref") if sink is not None else None
    return net


def to_dot(net: PetriNet) -> str:
    lines = ["digraph petrinet {", "  rankdir=LR;"]
    for pid in net.places:
        extra = ""
        if pid == net.source:
            extra = ', label="●"'
        elif pid == net.sink:
            extra = ', peripheries=2, label=""'
        else:
            extra = ', label=""'
        lines.append(f"  {pid} [shape=circle{extra}];")
    for t in net.transitions:
        if t.silent:
            lines.append(f'  {t.id} [shape=box, style=filled, fillcolor=black, label="", width=0.2];')
        else:
            label = t.label.replace("\\", "\\\\").replace('"', '\\"')
            lines.append(f'  {t.id} [shape=box, label="{label}"];')
    for s, t in net.arcs:
        lines.append(f"  {s} -> {t};")
    lines.append("}")
    return "\n".join(lines) + "\n"
