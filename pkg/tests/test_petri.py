import random
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_tree
from imr.petri import (PetriNet, Transition, from_pnml, marking_language, to_dot, to_petri_net, to_pnml,
                       workflow_violations)
from imr.tree import bounded_language, leaf, loop, par, parse_tree, seq, tau, xor

a, b, c = leaf("a"), leaf("b"), leaf("c")


def test_leaf_net():
    net = to_petri_net(a)
    assert len(net.places) == 2
    assert [t.label for t in net.transitions] == ["a"]
    assert len(net.arcs) == 2
    assert net.initial_marking == {net.source: 1}
    assert net.final_marking == {net.sink: 1}


def test_sequence_fuses_places():
    net = to_petri_net(seq(a, b))
    assert len(net.places) == 3
    assert len(net.transitions) == 2
    assert workflow_violations(net) == []


def test_parallel_language():
    net = to_petri_net(par(a, b))
    assert marking_language(net, 5) == {("a", "b"), ("b", "a")}
    assert sum(t.silent for t in net.transitions) == 2


def test_xor_shares_places():
    net = to_petri_net(xor(a, b))
    assert len(net.places) == 2
    assert marking_language(net, 3) == {("a",), ("b",)}


def test_loop_language():
    net = to_petri_net(loop(a, b))
    assert marking_language(net, 5) == {("a",), ("a", "b", "a"), ("a", "b", "a", "b", "a")}


def test_silent_cycles_terminate():
    net = to_petri_net(loop(tau(), tau()))
    assert marking_language(net, 3) == {()}


def test_deterministic_ids():
    net = to_petri_net(parse_tree("->(x(a,d),->(c,x(b,tau)))"))
    assert net.places == [f"p{i}" for i in range(len(net.places))]
    assert [t.id for t in net.transitions] == [f"t{i}" for i in range(len(net.transitions))]
    assert to_pnml(net) == to_pnml(to_petri_net(parse_tree("->(x(a,d),->(c,x(b,tau)))")))


def test_pnml_layout_and_round_trip():
    net = to_petri_net(loop(c, xor(a, b)))
    text = to_pnml(net)
    root = ET.fromstring(text)
    page = root.find("net/page")
    assert page is not None
    marked = [p.get("id") for p in page.findall("place") if p.find("initialMarking") is not None]
    assert marked == [net.source]
    silent = [t for t in page.findall("transition") if t.find("toolspecific") is not None]
    assert len(silent) == 2
    assert all(t.find("toolspecific").get("invisible") == "true" for t in silent)
    back = from_pnml(text)
    assert back.places == net.places
    assert back.transitions == net.transitions
    assert back.arcs == net.arcs
    assert (back.source, back.sink) == (net.source, net.sink)


def test_dot():
    dot = to_dot(to_petri_net(par(a, b)))
    assert dot.startswith("digraph petrinet {")
    assert 'label="a"' in dot


def test_checker_reports_problems():
    net = to_petri_net(seq(a, b))
    net.places.append("orphan")
    problems = workflow_violations(net)
    assert any("orphan" in p for p in problems)


def test_unsafe_net_detected():
    # split into two branches that both end in the sink without a join
    net = PetriNet(places=["p0", "p1", "p2", "p3"], source="p0", sink="p1",
                   transitions=[Transition("t0", None), Transition("t1", "a"), Transition("t2", "b")],
                   arcs=[("p0", "t0"), ("t0", "p2"), ("t0", "p3"), ("p2", "t1"), ("t1", "p1"),
                         ("p3", "t2"), ("t2", "p1")])
    with pytest.raises(ValueError, match="not safe"):
        marking_language(net, 2)


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_construction_is_a_workflow_net(seed):
    t = random_tree(random.Random(seed), 3, list("abcd"))
    assert workflow_violations(to_petri_net(t)) == []


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_net_language_equals_tree_language(seed):
    t = random_tree(random.Random(seed), 3, list("abc"))
    assert marking_language(to_petri_net(t), 4) == set(bounded_language(t, 4, 5))
