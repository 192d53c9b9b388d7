import gzip
import io

import pytest
from hypothesis import given, strategies as st

from imr.log import EventLog, LogFormatError, load_csv, load_log, load_xes, project, to_xes

XES_AB = b"""<?xml version="1.0" encoding="UTF-8"?>
<log xmlns="http://www.xes-standard.org/">
  <trace>
    <string key="concept:name" value="case1"/>
    <event><string key="concept:name" value="A"/><string key="lifecycle:transition" value="complete"/></event>
    <event><string key="concept:name" value="B"/></event>
  </trace>
</log>
"""

traces = st.lists(st.lists(st.sampled_from("abcd"), max_size=6), max_size=12)


def xes(*trace_bodies):
    body = "".join(f"<trace>{b}</trace>" for b in trace_bodies)
    return f"<log>{body}</log>".encode()


def ev(name):
    return f'<event><string key="concept:name" value="{name}"/></event>'


class TestLoadXes:
    def test_single_trace(self):
        assert load_xes(io.BytesIO(XES_AB)) == EventLog({("A", "B"): 1})

    def test_duplicate_traces_merge(self):
        log = load_xes(xes(ev("A"), ev("A")))
        assert log == EventLog({("A",): 2})
        assert log.n == 2

    def test_empty_trace(self):
        log = load_xes(xes(""))
        assert log == EventLog({(): 1})
        assert log.alphabet == frozenset()

    def test_gzip_detected_by_magic(self):
        assert load_xes(gzip.compress(XES_AB)) == EventLog({("A", "B"): 1})

    def test_malformed_xml_reports_line(self):
        with pytest.raises(LogFormatError, match="line 3"):
            load_xes(b"<log>\n<trace>\n<event></trace>\n</log>")

    def test_missing_name_reports_trace_index(self):
        with pytest.raises(LogFormatError, match="trace 1"):
            load_xes(xes(ev("A"), '<event><string key="org:resource" value="x"/></event>'))

    def test_not_a_log(self):
        with pytest.raises(LogFormatError, match="expected <log>"):
            load_xes(b"<foo/>")

    def test_to_xes_round_trip(self):
        log = EventLog({("a", "b"): 2, (): 1, ("c",): 1})
        assert load_xes(to_xes(log).encode()) == log


class TestLoadCsv:
    ROWS = "case,activity,t\nc1,A,2\nc1,B,1\nc2,A,1\n"

    def test_file_order(self):
        assert load_csv(self.ROWS.encode()) == EventLog({("A", "B"): 1, ("A",): 1})

    def test_order_column(self):
        log = load_csv(self.ROWS.encode(), order_column="t")
        assert log == EventLog({("B", "A"): 1, ("A",): 1})

    def test_order_ties_keep_file_order(self):
        log = load_csv(b"case,activity,t\nc,X,1\nc,Y,1\nc,Z,0\n", order_column="t")
        assert log == EventLog({("Z", "X", "Y"): 1})

    def test_header_only(self):
        log = load_csv(b"case,activity\n")
        assert log.n == 0 and len(log) == 0

    def test_custom_columns_and_quoting(self):
        text = 'id,name\n1,"Block Claim 1"\n1,"a, b"\n'
        log = load_csv(io.StringIO(text), case_column="id", activity_column="name")
        assert log == EventLog({("Block Claim 1", "a, b"): 1})

    def test_missing_column_named(self):
        with pytest.raises(LogFormatError, match="'activity'"):
            load_csv(b"case,act\nc,a\n")

    def test_bad_order_value_names_row(self):
        with pytest.raises(LogFormatError, match="row 3"):
            load_csv(b"case,activity,t\nc,a,1\nc,b,x\n", order_column="t")

    def test_no_header(self):
        with pytest.raises(LogFormatError):
            load_csv(b"")

    def test_bom_is_stripped(self):
        assert load_csv("﻿case,activity\nc,a\n".encode()) == EventLog({("a",): 1})


def test_load_log_dispatch(tmp_path):
    log = EventLog({("a", "b"): 3})
    (tmp_path / "l.csv").write_text(log.to_csv())
    (tmp_path / "l.xes").write_text(to_xes(log))
    (tmp_path / "l.xes.gz").write_bytes(gzip.compress(to_xes(log).encode()))
    for name in ("l.csv", "l.xes", "l.xes.gz"):
        assert load_log(tmp_path / name) == log


class TestEventLog:
    def test_rejects_bad_multiplicity(self):
        with pytest.raises(ValueError):
            EventLog({("a",): 0})

    def test_rejects_bad_labels(self):
        with pytest.raises(LogFormatError):
            EventLog({("",): 1})
        with pytest.raises(LogFormatError):
            EventLog({("a\nb",): 1})

    def test_variant_order_is_length_lexicographic(self):
        log = EventLog({("b",): 1, ("a", "b"): 1, ("a",): 1, (): 1})
        assert list(log) == [(), ("a",), ("b",), ("a", "b")]

    def test_add(self):
        assert EventLog({("a",): 1}) + EventLog({("a",): 2, ("b",): 1}) == EventLog({("a",): 3, ("b",): 1})

    def test_case_sensitive_labels(self):
        assert EventLog({("A",): 1, ("a",): 1}).alphabet == {"A", "a"}


class TestProject:
    def test_filters(self):
        assert project(EventLog({("a", "c", "b"): 2}), {"a", "b"}) == EventLog({("a", "b"): 2})

    def test_keep_nothing(self):
        assert project(EventLog({("a",): 1}), set()) == EventLog({(): 1})

    def test_merges_variants(self):
        assert project(EventLog({("a", "b"): 1, ("a", "c"): 1}), {"a"}) == EventLog({("a",): 2})


@given(traces, st.sets(st.sampled_from("abcd")))
def test_project_preserves_count_and_narrows_alphabet(ts, keep):
    log = EventLog.from_traces(ts)
    p = project(log, keep)
    assert p.n == log.n
    assert p.alphabet <= keep


@given(traces)
def test_csv_round_trip(ts):
    # empty traces have no rows in a CSV file, so they cannot come back
    log = EventLog.from_traces(t for t in ts if t)
    assert load_csv(log.to_csv().encode()) == log


@given(traces)
def test_alphabet_and_count(ts):
    log = EventLog.from_traces(ts)
    assert log.n == len(ts)
    assert log.alphabet == {a for t in ts for a in t}
    assert all(c >= 1 for _, c in log.items())
