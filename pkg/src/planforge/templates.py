"""Nine-template prompt library and its dependency-ordered composition.

The library holds one template per lesson-plan component (C1..C9). Four of
them stand alone; the other five embed the prompt generated for an earlier
component through the reserved ``{{upstream}}`` slot:

    C5 <- C4,  C6 <- C5,  C7 <- C5,  C8 <- C7,  C9 <- C7

Prompts can be produced one at a time (stepwise) or for the whole set in a
single dependency-ordered pass (holistic). All operations here are pure:
the loaded library is immutable and substitution has no side effects.
"""

from __future__ import annotations

import heapq
import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import (
    DuplicateTemplate,
    EmptyRequiredField,
    MissingTemplate,
    MissingUpstream,
    TemplateDocumentError,
    UnknownPlaceholder,
    WrongUpstream,
)
from .hashing import fnv1a_64, hex64

TEMPLATE_IDS: tuple[str, ...] = ("C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9")

# Upstream prompt each context-bearing template splices in.
UPSTREAM_OF: dict[str, str] = {"C5": "C4", "C6": "C5", "C7": "C5", "C8": "C7", "C9": "C7"}

# (before, after) precedence pairs implied by UPSTREAM_OF.
PRECEDENCE_CONSTRAINTS: tuple[tuple[str, str], ...] = tuple(
    (upstream, dependent) for dependent, upstream in sorted(UPSTREAM_OF.items())
)

UPSTREAM_SLOT = "upstream"

INPUT_FIELDS: tuple[str, ...] = (
    "unit_theme",
    "grade_level",
    "primary_subject",
    "supporting_subjects",
    "class_hours",
    "textbook_version",
    "learner_notes",
)

# Strict placeholder syntax: {{lower_snake_name}}, no inner whitespace.
_PLACEHOLDER_RE = re.compile(r"\{\{([a-z][a-z0-9_]*)\}\}")


@dataclass(frozen=True)
class CurriculumInput:
    """Teacher-supplied design parameters.

    List/shape invariants are enforced at construction; emptiness of the text
    fields is checked at substitution time so that an incomplete input can be
    held and reported as EmptyRequiredField by the prompt pipeline.
    """

    unit_theme: str
    grade_level: str
    primary_subject: str
    supporting_subjects: tuple[str, ...]
    class_hours: int
    textbook_version: str = ""
    learner_notes: str = ""

    def __post_init__(self):
        subjects = tuple(self.supporting_subjects)
        object.__setattr__(self, "supporting_subjects", subjects)
        if len(subjects) < 1:
            raise ValueError("supporting_subjects must list at least one subject")
        if len(set(subjects)) != len(subjects):
            raise ValueError("supporting_subjects must not contain duplicates")
        if self.primary_subject in subjects:
            raise ValueError("supporting_subjects must not repeat the primary subject")
        if not isinstance(self.class_hours, int) or self.class_hours < 1:
            raise ValueError("class_hours must be a positive integer")

    def placeholder_values(self) -> dict[str, str]:
        return {
            "unit_theme": self.unit_theme,
            "grade_level": self.grade_level,
            "primary_subject": self.primary_subject,
            "supporting_subjects": ", ".join(self.supporting_subjects),
            "class_hours": str(self.class_hours),
            "textbook_version": self.textbook_version,
            "learner_notes": self.learner_notes,
        }

    def fingerprint(self) -> str:
        """Stable hash of the input, identical across processes."""
        canon = "\x1f".join(
            [
                self.unit_theme,
                self.grade_level,
                self.primary_subject,
                ",".join(self.supporting_subjects),
                str(self.class_hours),
                self.textbook_version,
                self.learner_notes,
            ]
        )
        return hex64(fnv1a_64(canon))

    def to_dict(self) -> dict:
        return {
            "unit_theme": self.unit_theme,
            "grade_level": self.grade_level,
            "primary_subject": self.primary_subject,
            "supporting_subjects": list(self.supporting_subjects),
            "class_hours": self.class_hours,
            "textbook_version": self.textbook_version,
            "learner_notes": self.learner_notes,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CurriculumInput":
        return cls(
            unit_theme=data.get("unit_theme", ""),
            grade_level=data.get("grade_level", ""),
            primary_subject=data.get("primary_subject", ""),
            supporting_subjects=tuple(data.get("supporting_subjects", ())),
            class_hours=data.get("class_hours", 1),
            textbook_version=data.get("textbook_version", "") or "",
            learner_notes=data.get("learner_notes", "") or "",
        )


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    title: str
    body: str
    context_slot: bool

    def placeholders(self) -> set[str]:
        return set(_PLACEHOLDER_RE.findall(self.body))


@dataclass(frozen=True)
class GeneratedPrompt:
    template_id: str
    text: str
    upstream_id: str | None
    input_fingerprint: str

    def to_dict(self) -> dict:
        return {
            "template_id": self.template_id,
            "text": self.text,
            "upstream_id": self.upstream_id,
            "input_fingerprint": self.input_fingerprint,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratedPrompt":
        return cls(
            template_id=data["template_id"],
            text=data["text"],
            upstream_id=data.get("upstream_id"),
            input_fingerprint=data.get("input_fingerprint", ""),
        )


@dataclass(frozen=True)
class TemplateLibrary:
    templates: dict[str, PromptTemplate] = field(default_factory=dict)

    def get(self, template_id: str) -> PromptTemplate:
        template = self.templates.get(template_id)
        if template is None:
            raise MissingTemplate(template_id)
        return template

    def __len__(self) -> int:
        return len(self.templates)


def _check_placeholders(template: PromptTemplate) -> None:
    # Any '{{' must open a well-formed placeholder, otherwise it could survive
    # substitution and violate the no-unresolved-placeholder invariant.
    pos = template.body.find("{{")
    while pos != -1:
        if not _PLACEHOLDER_RE.match(template.body, pos):
            raise TemplateDocumentError(
                f"template {template.id} contains malformed placeholder near offset {pos}"
            )
        pos = template.body.find("{{", pos + 2)

    for name in template.placeholders():
        if name == UPSTREAM_SLOT:
            if not template.context_slot:
                raise UnknownPlaceholder(name, template.id)
        elif name not in INPUT_FIELDS:
            raise UnknownPlaceholder(name, template.id)

    if template.context_slot and UPSTREAM_SLOT not in template.placeholders():
        raise TemplateDocumentError(
            f"template {template.id} declares a context slot but has no {{{{upstream}}}} placeholder"
        )


def load_template_library(document: str) -> TemplateLibrary:
    """Parse and validate a template document (JSON array of 9 template objects)."""
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise TemplateDocumentError(f"template document is not valid JSON: {exc}") from exc
    if not isinstance(raw, list):
        raise TemplateDocumentError("template document must be a top-level JSON array")

    templates: dict[str, PromptTemplate] = {}
    for item in raw:
        if not isinstance(item, dict):
            raise TemplateDocumentError("template entries must be JSON objects")
        try:
            template = PromptTemplate(
                id=item["id"],
                title=item["title"],
                body=item["body"],
                context_slot=bool(item["context_slot"]),
            )
        except KeyError as exc:
            raise TemplateDocumentError(f"template entry missing key {exc}") from exc
        if template.id not in TEMPLATE_IDS:
            raise TemplateDocumentError(f"unknown template id '{template.id}'")
        if template.id in templates:
            raise DuplicateTemplate(template.id)
        expects_context = template.id in UPSTREAM_OF
        if template.context_slot != expects_context:
            raise TemplateDocumentError(
                f"template {template.id} must {'set' if expects_context else 'not set'} context_slot"
            )
        _check_placeholders(template)
        templates[template.id] = template

    for template_id in TEMPLATE_IDS:
        if template_id not in templates:
            raise MissingTemplate(template_id)
    return TemplateLibrary(templates)


def load_template_file(path: str | Path) -> TemplateLibrary:
    return load_template_library(Path(path).read_text(encoding="utf-8"))


def default_template_library() -> TemplateLibrary:
    document = resources.files("planforge.data").joinpath("templates.json").read_text("utf-8")
    return load_template_library(document)


def substitute_placeholders(
    template: PromptTemplate,
    curriculum: CurriculumInput,
    upstream: str | None = None,
) -> str:
    """Replace every placeholder in the template body with its value.

    Substitution is a single literal pass: values are never re-scanned for
    placeholders of their own.
    """
    if template.context_slot and upstream is None:
        raise MissingUpstream(template.id)
    values = curriculum.placeholder_values()

    def _resolve(match: re.Match) -> str:
        name = match.group(1)
        if name == UPSTREAM_SLOT:
            if not template.context_slot or upstream is None:
                raise UnknownPlaceholder(name, template.id)
            return upstream
        if name not in values:
            raise UnknownPlaceholder(name, template.id)
        value = values[name]
        if not value.strip():
            raise EmptyRequiredField(name)
        return value

    return _PLACEHOLDER_RE.sub(_resolve, template.body)


def dependency_order() -> list[str]:
    """Deterministic topological order of the template DAG, ties by ascending index."""
    remaining = {tid: UPSTREAM_OF.get(tid) for tid in TEMPLATE_IDS}
    ready = [tid for tid, up in remaining.items() if up is None]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        tid = heapq.heappop(ready)
        order.append(tid)
        for other, up in remaining.items():
            if up == tid:
                remaining[other] = None
                heapq.heappush(ready, other)
        remaining.pop(tid)
    if remaining:
        raise TemplateDocumentError("template dependencies contain a cycle")
    return order


def order_satisfies_dependencies(order: list[str]) -> bool:
    """Check a candidate emission order against the precedence constraints."""
    if sorted(order) != sorted(TEMPLATE_IDS):
        return False
    position = {tid: i for i, tid in enumerate(order)}
    return all(position[before] < position[after] for before, after in PRECEDENCE_CONSTRAINTS)


def generate_prompt_stepwise(
    library: TemplateLibrary,
    template_id: str,
    curriculum: CurriculumInput,
    upstream: GeneratedPrompt | None = None,
) -> GeneratedPrompt:
    """Produce the prompt for one template, independent of any other template's state."""
    template = library.get(template_id)
    required = UPSTREAM_OF.get(template_id)
    if required is None:
        if upstream is not None:
            raise WrongUpstream(template_id, upstream.template_id, None)
    else:
        if upstream is None:
            raise MissingUpstream(template_id)
        if upstream.template_id != required:
            raise WrongUpstream(template_id, upstream.template_id, required)

    text = substitute_placeholders(
        template, curriculum, upstream.text if upstream is not None else None
    )
    return GeneratedPrompt(
        template_id=template_id,
        text=text,
        upstream_id=required,
        input_fingerprint=curriculum.fingerprint(),
    )


def generate_prompts_holistic(
    library: TemplateLibrary, curriculum: CurriculumInput
) -> list[GeneratedPrompt]:
    """Produce all nine prompts sequentially along the DAG; any failure aborts the run."""
    produced: dict[str, GeneratedPrompt] = {}
    result: list[GeneratedPrompt] = []
    for template_id in dependency_order():
        upstream_id = UPSTREAM_OF.get(template_id)
        upstream = produced[upstream_id] if upstream_id is not None else None
        prompt = generate_prompt_stepwise(library, template_id, curriculum, upstream)
        produced[template_id] = prompt
        result.append(prompt)
    return result
