"""Event-log ingestion, labeling, trace cutting, splitting, and prefixing.

Logs are parsed from CSV (case_id/activity/timestamp[/label] columns) or
XES (concept/time extensions). After construction an EventLog is treated
as immutable: every transformation returns a new log.
"""

from __future__ import annotations

import csv
import logging
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Iterable, Mapping

from . import ltlf
from .errors import (
    EmptyLog,
    EmptySplit,
    MalformedXml,
    MissingColumn,
    MissingConceptName,
    MissingLabelAttribute,
    UnparseableTimestamp,
    ValidationError,
)

log = logging.getLogger(__name__)

DEFAULT_COLUMNS = {"case_id": "case_id", "activity": "activity", "timestamp": "timestamp", "label": "label"}


@dataclass
class Event:
    activity: str
    case_id: str
    timestamp: datetime
    attributes: dict = field(default_factory=dict)


@dataclass
class Trace:
    case_id: str
    events: list[Event]
    label: int | None = None
    attributes: dict = field(default_factory=dict)

    @property
    def activities(self) -> list[str]:
        return [e.activity for e in self.events]

    @property
    def start(self) -> datetime:
        return self.events[0].timestamp

    def __len__(self):
        return len(self.events)


@dataclass
class EventLog:
    traces: list[Trace]

    @property
    def alphabet(self) -> set[str]:
        return {e.activity for t in self.traces for e in t.events}

    def __len__(self):
        return len(self.traces)

    def labels(self) -> list[int]:
        return [t.label for t in self.traces]


@dataclass
class PrefixEntry:
    case_id: str
    k: int
    prefix: Trace
    full_trace_label: int | None
    source: Trace | None = None


@dataclass
class PrefixLog:
    entries: list[PrefixEntry]

    def __len__(self):
        return len(self.entries)


@dataclass
class LabelSpec:
    """How to derive the binary outcome of a complete trace.

    kind "attribute" reads a stored trace attribute; the ltlf kinds evaluate
    a formula on the whole trace (violation: label 1 iff the formula does
    NOT hold; satisfaction: the complement). ``cut_activities`` optionally
    truncates every case right before the first occurrence of any listed
    activity, removing the events that would leak the label.
    """

    kind: str
    attribute_name: str | None = None
    formula: ltlf.LtlfFormula | None = None
    cut_activities: set[str] | None = None

    def __post_init__(self):
        if self.kind == "attribute":
            if not self.attribute_name:
                raise ValidationError("attribute labeling needs attribute_name")
            if self.formula is not None:
                raise ValidationError("attribute labeling takes no formula")
        elif self.kind in ("ltlf_violation", "ltlf_satisfaction"):
            if self.formula is None:
                raise ValidationError(f"{self.kind} labeling needs a formula")
            if self.attribute_name is not None:
                raise ValidationError(f"{self.kind} labeling takes no attribute_name")
        else:
            raise ValidationError(f"unknown labeling kind {self.kind!r}")

    @classmethod
    def from_json(cls, data: Mapping) -> "LabelSpec":
        formula = data.get("formula")
        if isinstance(formula, str):
            formula = ltlf.parse_ltlf(formula)
        cut = data.get("cut_activities")
        return cls(
            kind=data.get("kind", ""),
            attribute_name=data.get("attribute_name"),
            formula=formula,
            cut_activities=set(cut) if cut else None,
        )


@dataclass
class SplitConfig:
    train_fraction: float = 0.70
    val_fraction: float = 0.10
    test_fraction: float = 0.20

    def __post_init__(self):
        fractions = (self.train_fraction, self.val_fraction, self.test_fraction)
        if any(f <= 0 for f in fractions):
            raise ValidationError("split fractions must be positive")
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise ValidationError("split fractions must sum to 1")


def _parse_timestamp(value, row: int) -> datetime:
    if isinstance(value, datetime):
        ts = value
    else:
        text = str(value).strip()
        try:
            ts = datetime.fromtimestamp(float(text), tz=timezone.utc)
        except (ValueError, OverflowError):
            try:
                ts = datetime.fromisoformat(text.replace("Z", "+00:00"))
            except ValueError:
                raise UnparseableTimestamp(row, value) from None
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _finish_log(groups: dict[str, list[Event]], labels: dict[str, int | None]) -> EventLog:
    traces = []
    for case_id, events in groups.items():
        events.sort(key=lambda e: e.timestamp)  # stable: ties keep file order
        traces.append(Trace(case_id=case_id, events=events, label=labels.get(case_id)))
    if not traces:
        raise EmptyLog("log contains no events")
    return EventLog(traces)


def parse_csv(path, column_map: Mapping[str, str] | None = None) -> EventLog:
    """Read a flat CSV log; rows are grouped by case and sorted by timestamp."""
    columns = dict(DEFAULT_COLUMNS)
    if column_map:
        columns.update(column_map)
    groups: dict[str, list[Event]] = {}
    labels: dict[str, int | None] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EmptyLog(f"{path} is empty")
        for logical in ("case_id", "activity", "timestamp"):
            if columns[logical] not in reader.fieldnames:
                raise MissingColumn(columns[logical])
        has_label = columns["label"] in reader.fieldnames
        core = {columns["case_id"], columns["activity"], columns["timestamp"], columns["label"]}
        for i, row in enumerate(reader, start=2):
            case_id = row[columns["case_id"]]
            activity = row[columns["activity"]]
            if not activity:
                raise ValidationError(f"empty activity at row {i}")
            event = Event(
                activity=activity,
                case_id=case_id,
                timestamp=_parse_timestamp(row[columns["timestamp"]], i),
                attributes={k: v for k, v in row.items() if k not in core and v not in (None, "")},
            )
            groups.setdefault(case_id, []).append(event)
            if has_label and row[columns["label"]] not in (None, ""):
                labels[case_id] = int(float(row[columns["label"]]))
    return _finish_log(groups, labels)


def _strip_ns(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def parse_xes(path) -> EventLog:
    """Read an XES log (concept:name, time:timestamp); other keys kept as strings."""
    try:
        tree = ET.parse(path)
    except ET.ParseError as err:
        raise MalformedXml(str(err)) from err
    traces = []
    for trace_el in tree.getroot():
        if _strip_ns(trace_el.tag) != "trace":
            continue
        case_id = None
        trace_attrs = {}
        events = []
        for child in trace_el:
            tag = _strip_ns(child.tag)
            if tag == "event":
                activity = None
                timestamp = None
                attrs = {}
                for attr in child:
                    key = attr.get("key")
                    value = attr.get("value")
                    if key == "concept:name":
                        activity = value
                    elif key == "time:timestamp":
                        timestamp = _parse_timestamp(value, row=len(events))
                    elif key is not None:
                        attrs[key] = value
                if activity is None:
                    raise MissingConceptName(f"event without concept:name in {path}")
                if timestamp is None:
                    raise MalformedXml(f"event without time:timestamp in {path}")
                events.append(Event(activity, "", timestamp, attrs))
            else:
                key = child.get("key")
                if key == "concept:name":
                    case_id = child.get("value")
                elif key is not None:
                    trace_attrs[key] = child.get("value")
        if case_id is None:
            raise MissingConceptName(f"trace without concept:name in {path}")
        for event in events:
            event.case_id = case_id
        if not events:
            log.warning("trace %s has no events", case_id)
        events.sort(key=lambda e: e.timestamp)
        label = trace_attrs.get("label")
        traces.append(
            Trace(
                case_id=case_id,
                events=events,
                label=int(float(label)) if label not in (None, "") else None,
                attributes=trace_attrs,
            )
        )
    if not traces:
        raise EmptyLog(f"{path} contains no traces")
    return EventLog(traces)


_TRUTHY = {"1", "true", "yes", "deviant", "positive"}
_FALSY = {"0", "false", "no", "regular", "negative"}


def label_traces(event_log: EventLog, spec: LabelSpec) -> EventLog:
    """Attach a binary label to every trace according to the labeling rule."""
    labeled = []
    for trace in event_log.traces:
        if spec.kind == "attribute":
            raw = trace.attributes.get(spec.attribute_name)
            if raw is None and spec.attribute_name == "label":
                raw = trace.label
            if raw is None:
                raise MissingLabelAttribute(trace.case_id)
            text = str(raw).strip().lower()
            if text in _TRUTHY:
                value = 1
            elif text in _FALSY:
                value = 0
            else:
                value = int(float(text))
                if value not in (0, 1):
                    raise ValidationError(f"label {raw!r} of {trace.case_id} is not binary")
        else:
            holds = ltlf.ltlf_eval(spec.formula, trace.activities, 0)
            value = int(not holds) if spec.kind == "ltlf_violation" else int(holds)
        labeled.append(replace(trace, label=value))
    return EventLog(labeled)


def cut_traces_before(event_log: EventLog, activities: Iterable[str]) -> EventLog:
    """Truncate each trace right before its first occurrence of any listed activity.

    Traces left empty by the cut are dropped (they cannot be prefixed).
    """
    targets = set(activities)
    if not targets:
        return event_log
    out = []
    for trace in event_log.traces:
        cut_at = next((i for i, a in enumerate(trace.activities) if a in targets), None)
        if cut_at is None:
            out.append(trace)
        elif cut_at == 0:
            log.warning("trace %s empty after cutting, dropped", trace.case_id)
        else:
            out.append(replace(trace, events=trace.events[:cut_at]))
    return EventLog(out)


def chronological_split(event_log: EventLog, cfg: SplitConfig | None = None):
    """Order cases by start time and split train/val/test by the configured fractions.

    Events of train/val cases that run into the test period (timestamp at or
    after the earliest test-case start) are dropped, so the training data
    never sees the future.
    """
    cfg = cfg or SplitConfig()
    ordered = sorted(event_log.traces, key=lambda t: t.start)
    n = len(ordered)
    n_train = math.floor(cfg.train_fraction * n)
    n_val = math.floor(cfg.val_fraction * n)
    train, val, test = ordered[:n_train], ordered[n_train : n_train + n_val], ordered[n_train + n_val :]
    if not train or not val or not test:
        raise EmptySplit(f"cannot split {n} traces into {cfg.train_fraction}/{cfg.val_fraction}/{cfg.test_fraction}")
    test_start = min(t.start for t in test)

    def truncate(traces):
        kept = []
        for trace in traces:
            events = [e for e in trace.events if e.timestamp < test_start]
            if not events:
                log.warning("trace %s entirely within the test period, dropped", trace.case_id)
                continue
            kept.append(trace if len(events) == len(trace.events) else replace(trace, events=events))
        return kept

    return EventLog(truncate(train)), EventLog(truncate(val)), EventLog(test)


def make_prefix_log(event_log: EventLog, max_k: int) -> PrefixLog:
    """All strict prefixes up to length max_k, each carrying the full-trace label."""
    if max_k < 1:
        raise ValidationError("max_k must be >= 1")
    entries = []
    for trace in event_log.traces:
        for k in range(1, min(max_k, len(trace) - 1) + 1):
            prefix = Trace(case_id=trace.case_id, events=trace.events[:k], label=trace.label)
            entries.append(PrefixEntry(trace.case_id, k, prefix, trace.label, source=trace))
    return PrefixLog(entries)


def nearest_rank_percentile(values, q: float) -> float:
    ordered = sorted(values)
    if not ordered:
        raise ValidationError("percentile of empty data")
    rank = max(1, math.ceil(q / 100.0 * len(ordered)))
    return ordered[rank - 1]


def prefix_cap_for(dataset_name: str, case_lengths) -> int:
    """Maximum evaluated prefix length for a dataset (benchmark convention)."""
    name = dataset_name.lower()
    if name.startswith("traffic_fines") or name.startswith("traffic"):
        return 9
    p90 = int(nearest_rank_percentile(case_lengths, 90))
    if name.startswith("bpic2017"):
        return min(20, p90)
    return min(40, p90)


def write_csv(event_log: EventLog, path, column_map: Mapping[str, str] | None = None) -> None:
    """Flat CSV serialization; the label is repeated on every row of its case."""
    columns = dict(DEFAULT_COLUMNS)
    if column_map:
        columns.update(column_map)
    with_labels = any(t.label is not None for t in event_log.traces)
    header = [columns["case_id"], columns["activity"], columns["timestamp"]]
    if with_labels:
        header.append(columns["label"])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for trace in event_log.traces:
            for event in trace.events:
                row = [trace.case_id, event.activity, event.timestamp.isoformat()]
                if with_labels:
                    row.append("" if trace.label is None else trace.label)
                writer.writerow(row)


def write_xes(event_log: EventLog, path) -> None:
    root = ET.Element("log", {"xes.version": "1.0"})
    for trace in event_log.traces:
        trace_el = ET.SubElement(root, "trace")
        ET.SubElement(trace_el, "string", {"key": "concept:name", "value": trace.case_id})
        if trace.label is not None:
            ET.SubElement(trace_el, "string", {"key": "label", "value": str(trace.label)})
        for event in trace.events:
            event_el = ET.SubElement(trace_el, "event")
            ET.SubElement(event_el, "string", {"key": "concept:name", "value": event.activity})
            ET.SubElement(
                event_el, "date", {"key": "time:timestamp", "value": event.timestamp.isoformat()}
            )
    ET.ElementTree(root).write(path, encoding="utf-8", xml_declaration=True)
