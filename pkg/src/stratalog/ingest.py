"""Log ingestion: structured CSV exports and classic raw syslog lines.

Both input shapes normalize to :class:`RawLogRecord`; pairing a record with
its integer Unix timestamp yields a :class:`LogEntry`. Log lines carry no
year, so the caller pins a base year (and optionally a fixed-offset zone)
to keep conversions deterministic across runs and machines.
"""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone, tzinfo
from typing import IO, Iterable, Optional, Sequence

MONTHS = {
    "Jan": 1, "Feb": 2, "Mar": 3, "Apr": 4, "May": 5, "Jun": 6,
    "Jul": 7, "Aug": 8, "Sep": 9, "Oct": 10, "Nov": 11, "Dec": 12,
}

#: The dataset's collection era; pinned so outputs do not depend on the run date.
DEFAULT_BASE_YEAR = 2005

REQUIRED_COLUMNS = (
    "LineId", "Month", "Date", "Time",
    "Component", "PID", "Content", "EventId", "EventTemplate",
)

_TIME_RE = re.compile(r"(\d{2}):(\d{2}):(\d{2})\Z")

# Month Day hh:mm:ss host component[pid]: content   (pid optional)
_SYSLOG_RE = re.compile(
    r"(?P<month>[A-Z][a-z]{2})\s+(?P<day>\d{1,2})\s+(?P<time>\d{2}:\d{2}:\d{2})\s+"
    r"(?P<host>\S+)\s+(?P<component>[^\[\]:]+?)(?:\[(?P<pid>\d+)\])?:\s?(?P<content>.*)\Z"
)


class MissingColumnError(ValueError):
    """A required CSV column is absent from the header."""

    def __init__(self, column: str):
        self.column = column
        super().__init__(f"missing required column: {column}")


class SyslogFormatError(ValueError):
    """A raw line does not match the syslog prefix grammar."""

    def __init__(self, line: str):
        self.line = line
        super().__init__(f"unparseable syslog line: {line!r}")


@dataclass(frozen=True, slots=True)
class RawLogRecord:
    line_id: int
    month: str
    day: int
    time_of_day: str
    level: Optional[str]
    component: str
    pid: Optional[int]
    content: str
    event_id: str
    event_template: str

    @property
    def month_number(self) -> int:
        return MONTHS[self.month]

    def time_parts(self) -> tuple[int, int, int]:
        m = _TIME_RE.match(self.time_of_day)
        if not m:
            raise ValueError(f"bad time of day: {self.time_of_day!r}")
        return int(m.group(1)), int(m.group(2)), int(m.group(3))


@dataclass(frozen=True, slots=True)
class LogEntry:
    record: RawLogRecord
    timestamp: int


@dataclass(frozen=True)
class IngestOptions:
    base_year: int = DEFAULT_BASE_YEAR
    zone: tzinfo = timezone.utc
    # Year rollover inference: bump the year whenever the month sequence
    # decreases (Dec -> Jan). Off by default; single-year conversion is the
    # documented baseline behavior.
    infer_year_rollover: bool = False


@dataclass
class IngestResult:
    records: list[RawLogRecord] = field(default_factory=list)
    skipped: int = 0
    errors: list[str] = field(default_factory=list)


def _check_record_fields(month: str, day: int, time_of_day: str, content: str) -> Optional[str]:
    if month not in MONTHS:
        return f"bad month {month!r}"
    if not 1 <= day <= 31:
        return f"day {day} out of range"
    m = _TIME_RE.match(time_of_day)
    if not m:
        return f"bad time {time_of_day!r}"
    hh, mm, ss = (int(g) for g in m.groups())
    if hh > 23 or mm > 59 or ss > 59:
        return f"time {time_of_day!r} out of range"
    if not content:
        return "empty content"
    return None


def parse_structured_csv(stream: IO[str], options: IngestOptions | None = None) -> IngestResult:
    """Parse a structured log export (CSV with header) into raw records.

    Rows failing type checks are skipped and counted rather than aborting the
    run; a missing required column raises :class:`MissingColumnError`.
    """
    del options  # reserved for future parse knobs; kept for interface stability
    reader = csv.DictReader(stream)
    header = reader.fieldnames or []
    for column in REQUIRED_COLUMNS:
        if column not in header:
            raise MissingColumnError(column)
    has_level = "Level" in header

    result = IngestResult()
    for row_number, row in enumerate(reader, start=2):
        try:
            line_id = int(row["LineId"])
            day = int(row["Date"])
            pid_text = (row["PID"] or "").strip()
            pid = int(pid_text) if pid_text else None
        except (TypeError, ValueError) as exc:
            result.skipped += 1
            result.errors.append(f"row {row_number}: {exc}")
            continue
        month = (row["Month"] or "").strip()
        time_of_day = (row["Time"] or "").strip()
        content = (row["Content"] or "").strip()
        problem = _check_record_fields(month, day, time_of_day, content)
        if problem is None and line_id < 1:
            problem = f"line id {line_id} not positive"
        if problem is not None:
            result.skipped += 1
            result.errors.append(f"row {row_number}: {problem}")
            continue
        result.records.append(RawLogRecord(
            line_id=line_id,
            month=month,
            day=day,
            time_of_day=time_of_day,
            level=row["Level"] if has_level else None,
            component=(row["Component"] or "").strip(),
            pid=pid,
            content=content,
            event_id=(row["EventId"] or "").strip(),
            event_template=(row["EventTemplate"] or "").strip(),
        ))
    return result


def parse_raw_syslog_line(line: str, line_id: int = 1) -> RawLogRecord:
    """Parse one classic syslog line; the host field is parsed but not kept.

    The event id is set to the sentinel ``"raw"`` since unstructured input
    carries no template metadata.
    """
    m = _SYSLOG_RE.match(line.rstrip("\n"))
    if not m:
        raise SyslogFormatError(line)
    month = m.group("month")
    day = int(m.group("day"))
    content = m.group("content").strip()
    problem = _check_record_fields(month, day, m.group("time"), content)
    if problem is not None:
        raise SyslogFormatError(line)
    pid = m.group("pid")
    return RawLogRecord(
        line_id=line_id,
        month=month,
        day=day,
        time_of_day=m.group("time"),
        level=None,
        component=m.group("component").strip(),
        pid=int(pid) if pid is not None else None,
        content=content,
        event_id="raw",
        event_template="",
    )


def to_timestamp(record: RawLogRecord, base_year: int, zone: tzinfo = timezone.utc) -> int:
    """Unix epoch seconds of the record's calendar instant in the given zone.

    Raises ValueError for dates that do not exist (e.g. Feb 30).
    """
    hh, mm, ss = record.time_parts()
    moment = datetime(base_year, record.month_number, record.day, hh, mm, ss, tzinfo=zone)
    return int(moment.timestamp())


def entries_from_records(records: Sequence[RawLogRecord],
                         options: IngestOptions | None = None) -> list[LogEntry]:
    """Attach timestamps to records, optionally inferring year rollovers."""
    opts = options or IngestOptions()
    entries: list[LogEntry] = []
    year = opts.base_year
    prev_month = None
    for record in records:
        if opts.infer_year_rollover and prev_month is not None \
                and record.month_number < prev_month:
            year += 1
        prev_month = record.month_number
        entries.append(LogEntry(record, to_timestamp(record, year, opts.zone)))
    return entries


def read_csv_entries(stream: IO[str],
                     options: IngestOptions | None = None) -> tuple[list[LogEntry], IngestResult]:
    result = parse_structured_csv(stream, options)
    return entries_from_records(result.records, options), result


def read_syslog_entries(lines: Iterable[str],
                        options: IngestOptions | None = None) -> tuple[list[LogEntry], IngestResult]:
    """Parse raw syslog text line by line; blank and unparseable lines are
    skipped and counted."""
    result = IngestResult()
    line_id = 0
    for line in lines:
        if not line.strip():
            continue
        line_id += 1
        try:
            result.records.append(parse_raw_syslog_line(line, line_id=line_id))
        except SyslogFormatError as exc:
            result.skipped += 1
            result.errors.append(str(exc))
    return entries_from_records(result.records, options), result
