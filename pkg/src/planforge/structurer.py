"""Parses generated plan text into a structured, row-editable form.

Sections split on ``## `` heading lines; any section whose name contains
"activities" carries the activity table (pipe-delimited, four columns). The
parser is total: input without headings degrades to a single "(full text)"
section plus a warning instead of failing. Plans are immutable values; row
edits return new plans, and the initial parse is kept as the reset snapshot.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace

from .errors import IndexOutOfRange, UnknownSection

TABLE_COLUMNS = ("Section Name", "Driving Questions", "Activity", "Assessment")
UNASSIGNED_SECTION = "(unassigned)"
FULL_TEXT_SECTION = "(full text)"
PREAMBLE_SECTION = "(preamble)"

_HEADER_RE = re.compile(r"^##\s+(.+)$")
_SEPARATOR_CELL_RE = re.compile(r"^:?-{3,}:?$")


@dataclass(frozen=True)
class Section:
    name: str
    body: str


@dataclass(frozen=True)
class Row:
    section_name: str
    driving_question: str
    activity: str
    assessment: str

    def to_dict(self) -> dict:
        return {
            "section_name": self.section_name,
            "driving_question": self.driving_question,
            "activity": self.activity,
            "assessment": self.assessment,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Row":
        return cls(
            section_name=data["section_name"],
            driving_question=data["driving_question"],
            activity=data["activity"],
            assessment=data["assessment"],
        )


@dataclass(frozen=True)
class StructuredPlan:
    plan_id: str
    sections: tuple[Section, ...]
    activity_rows: tuple[Row, ...]
    warnings: tuple[str, ...]
    initial_rows: tuple[Row, ...]  # snapshot from parse time; reset restores this

    def section_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.sections)

    def to_dict(self, include_snapshot: bool = False) -> dict:
        data = {
            "plan_id": self.plan_id,
            "sections": [{"name": s.name, "body": s.body} for s in self.sections],
            "activity_rows": [r.to_dict() for r in self.activity_rows],
            "warnings": list(self.warnings),
        }
        if include_snapshot:
            data["initial_rows"] = [r.to_dict() for r in self.initial_rows]
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "StructuredPlan":
        rows = tuple(Row.from_dict(r) for r in data.get("activity_rows", ()))
        initial = data.get("initial_rows")
        return cls(
            plan_id=data.get("plan_id", ""),
            sections=tuple(Section(s["name"], s["body"]) for s in data.get("sections", ())),
            activity_rows=rows,
            warnings=tuple(data.get("warnings", ())),
            initial_rows=tuple(Row.from_dict(r) for r in initial) if initial is not None else rows,
        )


def _split_cells(line: str) -> list[str] | None:
    stripped = line.strip()
    if not (stripped.startswith("|") and stripped.endswith("|") and len(stripped) > 1):
        return None
    return [cell.strip() for cell in stripped[1:-1].split("|")]


def _is_header_row(cells: list[str]) -> bool:
    return [c.casefold() for c in cells] == [c.casefold() for c in TABLE_COLUMNS]


def _is_separator_row(cells: list[str]) -> bool:
    return bool(cells) and all(_SEPARATOR_CELL_RE.match(c) for c in cells)


def _strip_blank_edges(lines: list[str]) -> str:
    while lines and not lines[0].strip():
        lines.pop(0)
    while lines and not lines[-1].strip():
        lines.pop()
    return "\n".join(lines)


def is_activities_section(name: str) -> bool:
    return "activities" in name.casefold()


def parse_plan(plan_text: str, plan_id: str = "") -> StructuredPlan:
    """Total parse of plan text; never raises on malformed input."""
    text = plan_text.replace("\r\n", "\n").replace("\r", "\n")
    warnings: list[str] = []

    headers = [
        (i, m.group(1).strip())
        for i, line in enumerate(text.split("\n"))
        if (m := _HEADER_RE.match(line))
    ]
    if not headers:
        return StructuredPlan(
            plan_id=plan_id,
            sections=(Section(FULL_TEXT_SECTION, text),),
            activity_rows=(),
            warnings=("no section headings found; kept full text",),
            initial_rows=(),
        )

    lines = text.split("\n")
    sections: list[tuple[str, list[str]]] = []
    preamble = lines[: headers[0][0]]
    if any(line.strip() for line in preamble):
        sections.append((PREAMBLE_SECTION, preamble))
        warnings.append("content before the first heading moved to (preamble)")

    for idx, (line_no, name) in enumerate(headers):
        end = headers[idx + 1][0] if idx + 1 < len(headers) else len(lines)
        sections.append((name, lines[line_no + 1 : end]))

    # Deduplicate section names so rows can reference them unambiguously.
    seen: dict[str, int] = {}
    named_sections: list[tuple[str, list[str]]] = []
    for name, body_lines in sections:
        if name in seen:
            seen[name] += 1
            unique = f"{name} ({seen[name]})"
            warnings.append(f"duplicate section '{name}' renamed to '{unique}'")
            name = unique
        else:
            seen[name] = 1
        named_sections.append((name, body_lines))

    raw_rows: list[Row] = []
    final_sections: list[Section] = []
    for name, body_lines in named_sections:
        if is_activities_section(name):
            kept: list[str] = []
            for line in body_lines:
                cells = _split_cells(line)
                if cells is None:
                    kept.append(line)
                    continue
                if _is_header_row(cells) or _is_separator_row(cells):
                    continue
                if len(cells) != len(TABLE_COLUMNS):
                    warnings.append(
                        f"activity row with {len(cells)} cells left in '{name}' body"
                    )
                    kept.append(line)
                    continue
                raw_rows.append(Row(*cells))
            body_lines = kept
        final_sections.append(Section(name, _strip_blank_edges(list(body_lines))))

    names = {s.name for s in final_sections}
    rows: list[Row] = []
    for row in raw_rows:
        if row.section_name not in names and row.section_name != UNASSIGNED_SECTION:
            warnings.append(
                f"row referenced unknown section '{row.section_name}'; set to {UNASSIGNED_SECTION}"
            )
            row = replace(row, section_name=UNASSIGNED_SECTION)
        rows.append(row)

    return StructuredPlan(
        plan_id=plan_id,
        sections=tuple(final_sections),
        activity_rows=tuple(rows),
        warnings=tuple(warnings),
        initial_rows=tuple(rows),
    )


def add_row(plan: StructuredPlan, row: Row, index: int) -> StructuredPlan:
    if not 0 <= index <= len(plan.activity_rows):
        raise IndexOutOfRange(index, len(plan.activity_rows))
    if row.section_name not in plan.section_names() and row.section_name != UNASSIGNED_SECTION:
        raise UnknownSection(row.section_name)
    rows = plan.activity_rows[:index] + (row,) + plan.activity_rows[index:]
    return replace(plan, activity_rows=rows)


def delete_row(plan: StructuredPlan, index: int) -> StructuredPlan:
    if not 0 <= index < len(plan.activity_rows):
        raise IndexOutOfRange(index, len(plan.activity_rows))
    rows = plan.activity_rows[:index] + plan.activity_rows[index + 1 :]
    return replace(plan, activity_rows=rows)


def reset_rows(plan: StructuredPlan) -> StructuredPlan:
    return replace(plan, activity_rows=plan.initial_rows)


def export_plan(plan: StructuredPlan, format: str = "markdown") -> bytes:
    """Serialize for download; markdown export re-parses to the same structure."""
    if format == "json":
        return (
            json.dumps(plan.to_dict(), ensure_ascii=False, indent=2) + "\n"
        ).encode("utf-8")
    if format != "markdown":
        raise ValueError(f"unsupported export format '{format}'")

    out: list[str] = []
    table_emitted = False
    for section in plan.sections:
        out.append(f"## {section.name}")
        out.append("")
        if section.body:
            out.append(section.body)
            out.append("")
        if is_activities_section(section.name) and not table_emitted and plan.activity_rows:
            out.append("| " + " | ".join(TABLE_COLUMNS) + " |")
            out.append("| " + " | ".join("---" for _ in TABLE_COLUMNS) + " |")
            for row in plan.activity_rows:
                out.append(
                    f"| {row.section_name} | {row.driving_question} | "
                    f"{row.activity} | {row.assessment} |"
                )
            out.append("")
            table_emitted = True
    if plan.activity_rows and not table_emitted:
        # No activities section survived the edits; park the table in one.
        out.append("## Activities")
        out.append("")
        out.append("| " + " | ".join(TABLE_COLUMNS) + " |")
        out.append("| " + " | ".join("---" for _ in TABLE_COLUMNS) + " |")
        for row in plan.activity_rows:
            out.append(
                f"| {row.section_name} | {row.driving_question} | "
                f"{row.activity} | {row.assessment} |"
            )
        out.append("")
    return "\n".join(out).encode("utf-8")
