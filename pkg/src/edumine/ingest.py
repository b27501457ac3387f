"""Turn raw eTextbook interaction logs into per-student feature rows.

Log lines look like::

    timestamp_ms,student_id,kind,object_id,attempt_index,hint_index

with empty fields where a column does not apply. A header line is allowed
and recognised by a non-numeric first field.
"""

from __future__ import annotations

import io
import logging
import warnings
from collections import defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Optional

from .errors import ContractError, LogFormatError
from .schema import FeatureRow

log = logging.getLogger(__name__)


class EventKind(str, Enum):
    MODULE_LOAD = "module_load"
    NAVIGATION = "navigation"
    SLIDESHOW_STEP = "slideshow_step"
    SLIDESHOW_LOAD = "slideshow_load"
    PE_ATTEMPT = "pe_attempt"
    PE_RESET = "pe_reset"
    PE_MODEL_ANSWER = "pe_model_answer"
    PE_COMPLETE = "pe_complete"
    SE_ATTEMPT = "se_attempt"
    SE_HINT = "se_hint"
    SE_CORRECT = "se_correct"
    PAGE_RELOAD = "page_reload"
    GRADEBOOK_LOAD = "gradebook_load"
    AUTH = "auth"


ATTEMPT_KINDS = frozenset({EventKind.PE_ATTEMPT, EventKind.SE_ATTEMPT})
PE_KINDS = frozenset(
    {
        EventKind.PE_ATTEMPT,
        EventKind.PE_RESET,
        EventKind.PE_MODEL_ANSWER,
        EventKind.PE_COMPLETE,
    }
)
SS_KINDS = frozenset({EventKind.SLIDESHOW_LOAD, EventKind.SLIDESHOW_STEP})

_KIND_BY_VALUE = {k.value: k for k in EventKind}
_N_FIELDS = 6


@dataclass(frozen=True)
class EventRecord:
    """A single timestamped interaction."""

    student_id: str
    timestamp: int
    kind: EventKind
    object_id: str = ""
    attempt_index: Optional[int] = None
    hint_index: Optional[int] = None

    def __post_init__(self):
        if not self.student_id:
            raise ContractError("student_id must be non-empty")
        if self.timestamp < 0:
            raise ContractError("timestamp must be >= 0")
        if self.attempt_index is not None:
            if self.kind not in ATTEMPT_KINDS:
                raise ContractError(f"attempt_index not allowed on {self.kind.value}")
            if self.attempt_index < 0:
                raise ContractError("attempt_index must be >= 0")
        if self.hint_index is not None:
            if self.kind is not EventKind.SE_HINT:
                raise ContractError(f"hint_index not allowed on {self.kind.value}")
            if self.hint_index < 0:
                raise ContractError("hint_index must be >= 0")

    def to_line(self):
        def opt(v):
            return "" if v is None else str(v)

        return ",".join(
            [
                str(self.timestamp),
                self.student_id,
                self.kind.value,
                self.object_id,
                opt(self.attempt_index),
                opt(self.hint_index),
            ]
        )


@dataclass(frozen=True)
class SessionRule:
    """How timestamps are turned into time on task.

    Gaps between consecutive events longer than ``max_gap`` seconds are
    credited as ``max_gap``; the student is assumed to have left.
    """

    max_gap: float = 600.0

    def __post_init__(self):
        if not self.max_gap > 0:
            raise ContractError("max_gap must be positive")


@dataclass
class ParsedLog:
    """Events in file order plus bookkeeping about rejected lines."""

    events: list = field(default_factory=list)
    malformed_count: int = 0
    malformed_lines: list = field(default_factory=list)

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __getitem__(self, i):
        return self.events[i]


def _parse_line(parts):
    if len(parts) != _N_FIELDS:
        raise ValueError(f"expected {_N_FIELDS} fields, got {len(parts)}")
    ts_text, sid, kind_text, obj, att_text, hint_text = (p.strip() for p in parts)
    kind = _KIND_BY_VALUE.get(kind_text, EventKind.NAVIGATION)
    if kind_text not in _KIND_BY_VALUE:
        # unknown kinds still count as interactions but must not carry indices
        if att_text or hint_text:
            raise ValueError(f"unknown kind {kind_text!r} with indices")
    return EventRecord(
        student_id=sid,
        timestamp=int(ts_text),
        kind=kind,
        object_id=obj,
        attempt_index=int(att_text) if att_text else None,
        hint_index=int(hint_text) if hint_text else None,
    )


def _lines(stream):
    if isinstance(stream, (bytes, bytearray)):
        stream = io.BytesIO(stream)
    for raw in stream:
        if isinstance(raw, (bytes, bytearray)):
            raw = raw.decode("utf-8")
        yield raw.rstrip("\r\n")


def parse_events(stream, max_malformed_fraction=0.5) -> ParsedLog:
    """Parse a line-delimited event log.

    Parameters
    ----------
    stream : binary or text file object, bytes, or iterable of lines
    max_malformed_fraction : float
        If more than this fraction of non-blank data lines is malformed the
        whole log is rejected with :class:`LogFormatError`.

    Returns
    -------
    ParsedLog
        Parsed events in file order. Rejected lines are listed by 1-based
        line number in ``malformed_lines`` and logged as a warning.
    """
    out = ParsedLog()
    n_data = 0
    first = True
    for lineno, line in enumerate(_lines(stream), start=1):
        if not line.strip():
            continue
        parts = line.split(",")
        if first:
            first = False
            head = parts[0].strip()
            if head and not head.lstrip("-").isdigit():
                continue
        n_data += 1
        try:
            out.events.append(_parse_line(parts))
        except (ValueError, ContractError):
            out.malformed_count += 1
            out.malformed_lines.append(lineno)
    if out.malformed_count:
        log.warning(
            "skipped %d malformed log line(s): %s",
            out.malformed_count,
            out.malformed_lines[:20],
        )
        if out.malformed_count > max_malformed_fraction * n_data:
            raise LogFormatError(
                f"{out.malformed_count} of {n_data} lines are malformed"
            )
    return out


def read_event_log(path) -> ParsedLog:
    with open(path, "rb") as fh:
        return parse_events(fh)


def write_event_log(events: Iterable[EventRecord], fh, header=True):
    """Write events in the log line format to a text file object."""
    if header:
        fh.write("timestamp_ms,student_id,kind,object_id,attempt_index,hint_index\n")
    for ev in events:
        fh.write(ev.to_line())
        fh.write("\n")


def _content_type(kind):
    if kind in PE_KINDS:
        return "pe"
    if kind in SS_KINDS:
        return "ss"
    return "other"


def _event_order(ev):
    # Total order so equal timestamps credit time the same way whatever the
    # input order.
    return (
        ev.timestamp,
        ev.kind.value,
        ev.object_id,
        -1 if ev.attempt_index is None else ev.attempt_index,
        -1 if ev.hint_index is None else ev.hint_index,
    )


def aggregate_student(events, rule: SessionRule = SessionRule()) -> FeatureRow:
    """Collapse one student's events into a :class:`FeatureRow`.

    Attempts and hints use the largest 0-based counter seen per exercise
    (count = max + 1), summed over exercises. An attempt without a counter
    counts as index 0. Time on task is the sum of gaps between consecutive
    events, each capped at ``rule.max_gap`` and credited to the content type
    of the earlier event. Events with equal timestamps are ordered by kind,
    object and counters.
    """
    events = list(events)
    if not events:
        return FeatureRow()
    ids = {ev.student_id for ev in events}
    if len(ids) > 1:
        raise ContractError(f"events from several students: {sorted(ids)}")

    pe_attempts = {}
    se_attempts = {}
    se_hints = {}
    counts = defaultdict(int)
    slideshows = set()
    pe_done = set()
    se_done = set()

    for ev in events:
        k = ev.kind
        counts[k] += 1
        if k is EventKind.PE_ATTEMPT:
            n = (ev.attempt_index or 0) + 1
            pe_attempts[ev.object_id] = max(pe_attempts.get(ev.object_id, 0), n)
        elif k is EventKind.SE_ATTEMPT:
            n = (ev.attempt_index or 0) + 1
            se_attempts[ev.object_id] = max(se_attempts.get(ev.object_id, 0), n)
        elif k is EventKind.SE_HINT:
            n = (ev.hint_index or 0) + 1
            se_hints[ev.object_id] = max(se_hints.get(ev.object_id, 0), n)
        elif k is EventKind.SLIDESHOW_LOAD:
            slideshows.add(ev.object_id)
        elif k is EventKind.PE_COMPLETE:
            pe_done.add(ev.object_id)
        elif k is EventKind.SE_CORRECT:
            se_done.add(ev.object_id)

    times = {"pe": 0.0, "ss": 0.0, "other": 0.0}
    ordered = sorted(events, key=_event_order)
    for prev, nxt in zip(ordered, ordered[1:]):
        gap = (nxt.timestamp - prev.timestamp) / 1000.0
        times[_content_type(prev.kind)] += min(gap, rule.max_gap)

    return FeatureRow(
        PE_total_time=times["pe"],
        PE_total_attempts=sum(pe_attempts.values()),
        PE_reset=counts[EventKind.PE_RESET],
        PE_model=counts[EventKind.PE_MODEL_ANSWER],
        PE_exercise=len(pe_done),
        SS_total_time=times["ss"],
        SS_total_visit=counts[EventKind.SLIDESHOW_LOAD],
        slide=len(slideshows),
        Interaction=len(events),
        Total_time=times["pe"] + times["ss"] + times["other"],
        Total_attempts=sum(se_attempts.values()),
        Total_hints=sum(se_hints.values()),
        gaming=counts[EventKind.PAGE_RELOAD],
        exercise=len(pe_done) + len(se_done),
    )


def build_feature_table(
    events,
    rule: SessionRule = SessionRule(),
    grades: Optional[Mapping[str, float]] = None,
):
    """Aggregate a multi-student log into ``(student_id, FeatureRow)`` pairs.

    Rows are sorted by student id. Grades are joined where present; a grade
    for a student with no events triggers a warning and is ignored.
    """
    by_student = defaultdict(list)
    for ev in events:
        by_student[ev.student_id].append(ev)
    grades = dict(grades or {})
    unknown = sorted(set(grades) - set(by_student))
    if unknown:
        warnings.warn(f"grades for students with no events ignored: {unknown}")
    table = []
    for sid in sorted(by_student):
        row = aggregate_student(by_student[sid], rule)
        if sid in grades and grades[sid] is not None:
            row = replace(row, etest=float(grades[sid]))
        table.append((sid, row))
    return table

