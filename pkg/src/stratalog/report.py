"""Pipeline orchestration and alert reporting.

``detect`` runs ingest output through fact extraction and rule evaluation,
then maps every atom of the anomaly catalog to an :class:`Alert` carrying
its full derivation tree. Alerts render as indented text for reading or as
json-lines for machines; both renderings are byte-deterministic for a fixed
input and configuration.

Pipeline failures surface as :class:`StageError` naming the failing stage;
a violated constraint is not an error but a distinguished result
(:class:`stratalog.engine.Inconsistent`) that callers must handle.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone, tzinfo
from pathlib import Path
from typing import Optional, Sequence, Union

from .engine import (
    AggregateCheck,
    ComparisonCheck,
    DerivationGraph,
    DerivationNode,
    Inconsistent,
    Model,
    evaluate,
    explain,
    query,
)
from .extract import DEFAULT_TABLE, MappingTable, entries_to_facts
from .facts import (
    Constant,
    Fact,
    Symbol,
    constant_key,
    format_constant,
    write_facts_file,
)
from .ingest import (
    DEFAULT_BASE_YEAR,
    IngestOptions,
    IngestResult,
    LogEntry,
    read_csv_entries,
    read_syslog_entries,
)
from .lang import Program
from .parser import parse_facts, parse_program
from .rules import ANOMALY_CATALOG, Thresholds, default_program


class StageError(Exception):
    """A pipeline stage failed; ``stage`` names which one."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        self.message = message
        super().__init__(f"{stage}: {message}")


@dataclass(frozen=True)
class RunConfig:
    input_path: str
    input_format: str = "csv"  # csv | syslog
    base_year: int = DEFAULT_BASE_YEAR
    zone: tzinfo = timezone.utc
    overrides: dict[str, int] = field(default_factory=dict)
    rules_path: Optional[str] = None
    extra_facts_path: Optional[str] = None
    facts_out: Optional[str] = None
    emit_rules: Optional[str] = None
    output: str = "text"  # text | json
    group: bool = False
    mapping_table: MappingTable = DEFAULT_TABLE

    def __post_init__(self) -> None:
        if self.input_format not in ("csv", "syslog"):
            raise ValueError(f"input_format must be csv or syslog, got {self.input_format!r}")
        if self.output not in ("text", "json"):
            raise ValueError(f"output must be text or json, got {self.output!r}")


@dataclass
class Alert:
    kind: str
    entities: dict[str, Constant]
    timestamps: list[int]
    atom: Fact
    explanation: DerivationNode

    def sort_key(self) -> tuple:
        return (self.kind,
                tuple(constant_key(v) for v in self.entities.values()),
                tuple(self.timestamps))


@dataclass
class GroupedAlert:
    kind: str
    entities: dict[str, Constant]
    count: int
    first_timestamp: Optional[int]
    last_timestamp: Optional[int]


# -- pipeline stages ----------------------------------------------------------


def load_entries(config: RunConfig) -> tuple[list[LogEntry], IngestResult]:
    """Ingest the configured input file ("ingest" stage)."""
    options = IngestOptions(base_year=config.base_year, zone=config.zone)
    try:
        with open(config.input_path, encoding="utf-8", newline="") as stream:
            if config.input_format == "csv":
                return read_csv_entries(stream, options)
            return read_syslog_entries(stream, options)
    except (OSError, ValueError) as exc:
        raise StageError("ingest", str(exc)) from exc


def _program_text(config: RunConfig) -> str:
    if config.rules_path is None:
        thresholds = Thresholds().with_overrides(**config.overrides)
        return default_program(thresholds)
    text = Path(config.rules_path).read_text(encoding="utf-8")
    for name in sorted(config.overrides):
        pattern = rf"(#const\s+{re.escape(name)}\s*=\s*)-?\d+"
        text, count = re.subn(pattern, rf"\g<1>{config.overrides[name]}", text, count=1)
        if count == 0:
            raise ValueError(f"rule file defines no #const {name}")
    return text


def load_program(config: RunConfig) -> Program:
    """Resolve and parse the rule program ("rules" stage)."""
    try:
        text = _program_text(config)
        if config.emit_rules:
            Path(config.emit_rules).write_text(text, encoding="utf-8")
        return parse_program(text)
    except (OSError, ValueError) as exc:
        raise StageError("rules", str(exc)) from exc


def _load_extra_facts(config: RunConfig) -> list[Fact]:
    if not config.extra_facts_path:
        return []
    try:
        text = Path(config.extra_facts_path).read_text(encoding="utf-8")
        return parse_facts(text)
    except (OSError, ValueError) as exc:
        raise StageError("facts", str(exc)) from exc


def _alerts_from_model(model: Model, graph: DerivationGraph) -> list[Alert]:
    alerts: list[Alert] = []
    for entry in ANOMALY_CATALOG:
        for atom in query(model, entry.predicate):
            if len(atom.args) != entry.arity:
                continue
            entities: dict[str, Constant] = {}
            timestamps: list[int] = []
            for role, value in zip(entry.arg_roles, atom.args):
                if role == "timestamp" and isinstance(value, int):
                    timestamps.append(value)
                else:
                    entities[role] = value
            alerts.append(Alert(entry.kind, entities, timestamps, atom,
                                explain(graph, atom)))
    alerts.sort(key=Alert.sort_key)
    return alerts


def detect(entries: Sequence[LogEntry],
           config: RunConfig) -> Union[list[Alert], Inconsistent]:
    """Extract facts, evaluate the rules, and collect catalog alerts.

    Returns the violated-constraint result instead of alerts when the
    program is inconsistent over these facts.
    """
    facts = entries_to_facts(entries, config.mapping_table)
    extra = _load_extra_facts(config)
    program = load_program(config)
    if config.facts_out:
        try:
            with open(config.facts_out, "w", encoding="utf-8") as sink:
                write_facts_file(facts + extra, sink)
        except OSError as exc:
            raise StageError("facts", str(exc)) from exc
    try:
        result = evaluate(program, facts + extra)
    except ValueError as exc:
        raise StageError("evaluate", str(exc)) from exc
    if isinstance(result, Inconsistent):
        return result
    model, graph = result
    return _alerts_from_model(model, graph)


def group_alerts(alerts: Sequence[Alert]) -> list[GroupedAlert]:
    """Collapse alerts sharing (kind, entities) into one summary each."""
    groups: dict[tuple, GroupedAlert] = {}
    for alert in alerts:
        key = (alert.kind, tuple(alert.entities.items()))
        summary = groups.get(key)
        if summary is None:
            groups[key] = summary = GroupedAlert(
                alert.kind, dict(alert.entities), 0, None, None)
        summary.count += 1
        for ts in alert.timestamps:
            if summary.first_timestamp is None or ts < summary.first_timestamp:
                summary.first_timestamp = ts
            if summary.last_timestamp is None or ts > summary.last_timestamp:
                summary.last_timestamp = ts
    return list(groups.values())


# -- rendering -----------------------------------------------------------------


def _iso(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).isoformat()


def _render_check(check, node: DerivationNode) -> str:
    if isinstance(check, ComparisonCheck) and isinstance(check.left, int):
        # A comparison consuming a counted value reads better as a
        # threshold statement; detect the count in a direct support.
        for child in node.children:
            for inner in child.checks:
                if isinstance(inner, AggregateCheck) and inner.op == "=" \
                        and inner.count == check.left:
                    return (f"count {check.left} {check.op} "
                            f"threshold {format_constant(check.right)}")
    return str(check)


def _render_node(node: DerivationNode, indent: int, lines: list[str]) -> None:
    pad = "  " * indent
    if node.is_fact:
        lines.append(f"{pad}{node.atom}  [input fact]")
        return
    span = node.rule.span
    lines.append(f"{pad}{node.atom}  [rule at {span.line}:{span.column}]")
    for child in node.children:
        _render_node(child, indent + 1, lines)
    for check in node.checks:
        lines.append(f"{pad}  {_render_check(check, node)}")


def _entity_text(entities: dict[str, Constant]) -> str:
    return " ".join(f"{role}={format_constant(value)}"
                    for role, value in entities.items())


def _alert_header(kind: str, entities: dict[str, Constant],
                  timestamps: Sequence[int]) -> str:
    parts = [f"{kind}:"]
    entity_text = _entity_text(entities)
    if entity_text:
        parts.append(entity_text)
    for ts in timestamps:
        parts.append(f"at {ts} ({_iso(ts)})")
    return " ".join(parts)


def _summary_line(kinds: Sequence[str]) -> str:
    counts: dict[str, int] = {}
    for kind in kinds:
        counts[kind] = counts.get(kind, 0) + 1
    total = len(kinds)
    if not total:
        return "total: 0"
    detail = ", ".join(f"{kind}: {n}" for kind, n in sorted(counts.items()))
    return f"total: {total} ({detail})"


def _json_value(value: Constant):
    if isinstance(value, Symbol):
        return value.name
    return value


def _json_timestamps(timestamps: Sequence[int]) -> list[dict]:
    return [{"unix": ts, "iso": _iso(ts)} for ts in timestamps]


def _json_explanation(node: DerivationNode) -> dict:
    return {
        "atom": str(node.atom),
        "rule": None if node.is_fact else f"{node.rule.span.line}:{node.rule.span.column}",
        "checks": [_render_check(check, node) for check in node.checks],
        "supports": [_json_explanation(child) for child in node.children],
    }


def render_alerts(alerts: Sequence[Alert], output: str) -> str:
    """Render alerts as readable text or json-lines (one object per alert)."""
    if output == "json":
        lines = []
        for alert in alerts:
            record: dict = {"kind": alert.kind}
            for role, value in alert.entities.items():
                record[role] = _json_value(value)
            record["timestamps"] = _json_timestamps(alert.timestamps)
            record["explanation"] = _json_explanation(alert.explanation)
            lines.append(json.dumps(record))
        return "".join(line + "\n" for line in lines)
    lines = []
    if not alerts:
        lines.append("no anomalies detected")
    for alert in alerts:
        lines.append(_alert_header(alert.kind, alert.entities, alert.timestamps))
        _render_node(alert.explanation, 1, lines)
        lines.append("")
    lines.append(_summary_line([a.kind for a in alerts]))
    return "".join(line + "\n" for line in lines)


def render_grouped(groups: Sequence[GroupedAlert], output: str) -> str:
    """Render grouped summaries in the same two formats."""
    if output == "json":
        lines = []
        for g in groups:
            record: dict = {"kind": g.kind}
            for role, value in g.entities.items():
                record[role] = _json_value(value)
            record["count"] = g.count
            record["first"] = (None if g.first_timestamp is None
                               else {"unix": g.first_timestamp, "iso": _iso(g.first_timestamp)})
            record["last"] = (None if g.last_timestamp is None
                              else {"unix": g.last_timestamp, "iso": _iso(g.last_timestamp)})
            lines.append(json.dumps(record))
        return "".join(line + "\n" for line in lines)
    lines = []
    if not groups:
        lines.append("no anomalies detected")
    for g in groups:
        parts = [f"{g.kind}:"]
        entity_text = _entity_text(g.entities)
        if entity_text:
            parts.append(entity_text)
        parts.append(f"count={g.count}")
        if g.first_timestamp is not None:
            parts.append(f"first={g.first_timestamp} ({_iso(g.first_timestamp)})")
            parts.append(f"last={g.last_timestamp} ({_iso(g.last_timestamp)})")
        lines.append(" ".join(parts))
    lines.append(_summary_line([g.kind for g in groups for _ in range(g.count)]))
    return "".join(line + "\n" for line in lines)


def render_inconsistent(result: Inconsistent, output: str) -> str:
    """Report a violated constraint in either format."""
    if output == "json":
        record = {
            "inconsistent": True,
            "constraint": f"{result.constraint.span.line}:{result.constraint.span.column}",
            "witness": {name: _json_value(value)
                        for name, value in sorted(result.witness.items())},
        }
        return json.dumps(record) + "\n"
    return f"inconsistent: {result}\n"
