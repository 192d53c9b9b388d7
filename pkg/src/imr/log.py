"""Event logs as multisets of activity sequences.

Traces are plain tuples of activity labels. An :class:`EventLog` stores the
distinct traces (variants) together with their multiplicities; everything
downstream works on the variant counts.
"""

from __future__ import annotations

import csv
import gzip
import io
import xml.etree.ElementTree as ET
from collections import Counter
from typing import IO, Iterable, Iterator, Mapping

Trace = tuple  # tuple[str, ...]

CONCEPT_NAME = "concept:name"


class LogFormatError(ValueError):
    """Raised when an XES or CSV source cannot be turned into an event log."""


def _check_activity(name: str) -> str:
    if not isinstance(name, str) or not name:
        raise LogFormatError(f"activity label must be a non-empty string, got {name!r}")
    if "\n" in name or "\r" in name:
        raise LogFormatError(f"activity label contains a newline: {name!r}")
    return name


class EventLog:
    """Immutable multiset of traces with variant compression."""

    __slots__ = ("_variants", "_alphabet", "_n")

    def __init__(self, variants: Mapping[Trace, int] | None = None):
        merged: dict[Trace, int] = {}
        for trace, count in (variants or {}).items():
            trace = tuple(trace)
            if not isinstance(count, int) or count < 1:
                raise ValueError(f"multiplicity of {trace!r} must be a positive integer, got {count!r}")
            for a in trace:
                _check_activity(a)
            merged[trace] = merged.get(trace, 0) + count
        # length-lexicographic order keeps iteration deterministic
        self._variants = dict(sorted(merged.items(), key=lambda kv: (len(kv[0]), kv[0])))
        self._alphabet = frozenset(a for trace in self._variants for a in trace)
        self._n = sum(self._variants.values())

    @classmethod
    def from_traces(cls, traces: Iterable[Iterable[str]]) -> "EventLog":
        return cls(Counter(tuple(t) for t in traces))

    @property
    def variants(self) -> Mapping[Trace, int]:
        return dict(self._variants)

    @property
    def alphabet(self) -> frozenset:
        return self._alphabet

    @property
    def n(self) -> int:
        """Total number of traces (sum of multiplicities)."""
        return self._n

    def items(self) -> Iterator[tuple[Trace, int]]:
        return iter(self._variants.items())

    def __iter__(self) -> Iterator[Trace]:
        return iter(self._variants)

    def __len__(self) -> int:
        return len(self._variants)

    def __getitem__(self, trace: Trace) -> int:
        return self._variants.get(tuple(trace), 0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventLog):
            return NotImplemented
        return self._variants == other._variants

    def __hash__(self) -> int:
        return hash(tuple(self._variants.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"<{','.join(t)}>:{c}" for t, c in self._variants.items())
        return f"EventLog({{{body}}})"

    def __add__(self, other: "EventLog") -> "EventLog":
        merged = Counter(self._variants)
        merged.update(other._variants)
        return EventLog(merged)

    def traces(self) -> Iterator[Trace]:
        """Expand the multiset, yielding every trace as often as it occurs."""
        for trace, count in self._variants.items():
            for _ in range(count):
                yield trace

    def to_csv(self, case_column: str = "case", activity_column: str = "activity") -> str:
        """Serialize with one row per event and synthetic case ids."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([case_column, activity_column])
        for i, trace in enumerate(self.traces()):
            if not trace:
                # an empty trace has no rows; it cannot survive a CSV round trip
                continue
            for a in trace:
                writer.writerow([f"c{i}", a])
        return buf.getvalue()


def project(log: EventLog, keep: Iterable[str]) -> EventLog:
    keep = frozenset(keep)
    out: Counter = Counter()
    for trace, count in log.items():
        out[tuple(a for a in trace if a in keep)] += count
    return EventLog(out)


def _read_bytes(source: bytes | IO[bytes]) -> bytes:
    data = source if isinstance(source, (bytes, bytearray)) else source.read()
    if isinstance(data, str):
        data = data.encode("utf-8")
    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    return bytes(data)


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def load_xes(source: bytes | IO[bytes]) -> EventLog:
    """Read an XES document (optionally gzipped).

    Only the ``concept:name`` string attribute of each event is used. Events
    nested in other containers than ``log > trace > event`` are ignored.
    """
    data = _read_bytes(source)
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, col = exc.position
        raise LogFormatError(f"malformed XML at line {line}, column {col}: {exc}") from None
    if _local(root.tag) != "log":
        raise LogFormatError(f"root element is <{_local(root.tag)}>, expected <log>")

    traces: Counter = Counter()
    trace_idx = -1
    for trace_el in root:
        if _local(trace_el.tag) != "trace":
            continue
        trace_idx += 1
        events = []
        for event_el in trace_el:
            if _local(event_el.tag) != "event":
                continue
            name = None
            for attr in event_el:
                if _local(attr.tag) == "string" and attr.get("key") == CONCEPT_NAME:
                    name = attr.get("value")
                    break
            if name is None:
                raise LogFormatError(
                    f"trace {trace_idx}: event {len(events)} has no concept:name attribute")
            events.append(_check_activity(name))
        traces[tuple(events)] += 1
    return EventLog(traces)


def load_csv(source: bytes | IO[bytes] | IO[str], case_column: str = "case",
             activity_column: str = "activity", order_column: str | None = None) -> EventLog:
    if isinstance(source, (bytes, bytearray)):
        text = bytes(source).decode("utf-8-sig")
    else:
        raw = source.read()
        text = raw.decode("utf-8-sig") if isinstance(raw, (bytes, bytearray)) else raw
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise LogFormatError("CSV source has no header row") from None

    def col(name: str) -> int:
        try:
            return header.index(name)
        except ValueError:
            raise LogFormatError(f"CSV column {name!r} not found in header {header}") from None

    ci, ai = col(case_column), col(activity_column)
    oi = col(order_column) if order_column is not None else None

    cases: dict[str, list] = {}
    for rowno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            case, act = row[ci], row[ai]
        except IndexError:
            raise LogFormatError(f"row {rowno}: too few fields") from None
        key = None
        if oi is not None:
            value = row[oi] if oi < len(row) else ""
            try:
                key = float(value)
            except ValueError:
                raise LogFormatError(f"row {rowno}: cannot parse order value {value!r}") from None
        cases.setdefault(case, []).append((key, rowno, _check_activity(act)))

    traces: Counter = Counter()
    for events in cases.values():
        if oi is not None:
            events.sort(key=lambda e: (e[0], e[1]))
        traces[tuple(e[2] for e in events)] += 1
    return EventLog(traces)


def load_log(path, **csv_options) -> EventLog:
    """Load a log from disk, choosing the parser by file extension.

    ``csv_options`` are passed to :func:`load_csv` and ignored for XES.
    """
    path = str(path)
    with open(path, "rb") as fh:
        if path.lower().endswith(".csv"):
            return load_csv(fh, **csv_options)
        return load_xes(fh)


def to_xes(log: EventLog) -> str:
    """Render a minimal XES document (used by tests and fixtures)."""
    root = ET.Element("log", {"xes.version": "1.0"})
    for i, trace in enumerate(log.traces()):
        t = ET.SubElement(root, "trace")
        ET.SubElement(t, "string", {"key": CONCEPT_NAME, "value": f"case{i}"})
        for a in trace:
            e = ET.SubElement(t, "event")
            ET.SubElement(e, "string", {"key": CONCEPT_NAME, "value": a})
    return ET.tostring(root, encoding="unicode")
