"""Knowledge-graph construction from plan text.

Entities come from a pluggable annotator (default: capitalized multi-word
spans plus dictionary terms, all tagged NOUN). Entities go to the model in
CSV batches with a fixed extraction instruction; replies are scanned for
``(subject | predicate | object)`` lines. Fusion dedupes triples into a graph
keyed by normalized labels, with edit operations, provenance tracking, and
JSON/DOT export.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import re
from dataclasses import dataclass
from typing import Iterable, Protocol

from .errors import (
    DuplicateNode,
    EmptyText,
    ExtractionFailed,
    MalformedGraphFile,
    UnknownEdge,
    UnknownNode,
)
from .gateway import CompletionRequest, Gateway, system, user

logger = logging.getLogger(__name__)

DEFAULT_BATCH_SIZE = 20

TRIPLE_PATTERN = re.compile(r"\(([^|()]+)\|([^|()]+)\|([^|()]+)\)")

_CAPITALIZED_RUN_RE = re.compile(r"[A-Z][\w'-]*(?:[ ][A-Z][\w'-]*)+")
_LEADING_ARTICLES = ("The", "A", "An")

_EXTRACTOR_ROLE = "You extract knowledge triplets from lesson-plan text."

_EXTRACTION_INSTRUCTION = (
    "From the source text below, extract knowledge triplets for the listed entities, "
    "following dependency parsing principles: treat a grammatical subject and object "
    "joined by a governing verb or attribute as one triplet. Write one triplet per "
    "line in exactly this form: (subject | predicate | object). Output only triplet lines."
)


def normalize_part(text: str) -> str:
    """Trim and collapse internal whitespace."""
    return re.sub(r"\s+", " ", text).strip()


def node_key(label: str) -> str:
    return normalize_part(label).casefold()


@dataclass(frozen=True)
class EntityRecord:
    entity: str
    part_of_speech: str = "NOUN"

    def __post_init__(self):
        if not self.entity:
            raise ValueError("entity must be non-empty")


@dataclass(frozen=True)
class KnowledgeTriple:
    subject: str
    predicate: str
    object: str
    provenance: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "subject", normalize_part(self.subject))
        object.__setattr__(self, "predicate", normalize_part(self.predicate).casefold())
        object.__setattr__(self, "object", normalize_part(self.object))
        object.__setattr__(self, "provenance", tuple(tuple(p) for p in self.provenance))
        if not (self.subject and self.predicate and self.object):
            raise ValueError("triple parts must be non-empty after normalization")


# -- entity annotation ------------------------------------------------------------


class EntityAnnotator(Protocol):
    def annotate(self, text: str) -> list[EntityRecord]: ...


class SpanDictionaryAnnotator:
    """Offline default annotator.

    Dictionary terms match case-insensitively at word boundaries (longest term
    first, non-overlapping); remaining text contributes capitalized runs of two
    or more words, with leading articles stripped. Everything is tagged NOUN.
    """

    def __init__(self, dictionary: Iterable[str] = ()):
        self.terms = sorted({t for t in dictionary if t.strip()}, key=len, reverse=True)

    def annotate(self, text: str) -> list[EntityRecord]:
        claimed: list[tuple[int, int]] = []
        found: list[tuple[int, str]] = []

        def overlaps(start: int, end: int) -> bool:
            return any(start < c_end and end > c_start for c_start, c_end in claimed)

        for term in self.terms:
            pattern = re.compile(r"(?<!\w)" + re.escape(term) + r"(?!\w)", re.IGNORECASE)
            for match in pattern.finditer(text):
                if overlaps(match.start(), match.end()):
                    continue
                claimed.append((match.start(), match.end()))
                found.append((match.start(), match.group(0)))

        for match in _CAPITALIZED_RUN_RE.finditer(text):
            if overlaps(match.start(), match.end()):
                continue
            words = match.group(0).split(" ")
            offset = match.start()
            while words and words[0] in _LEADING_ARTICLES:
                offset += len(words[0]) + 1
                words.pop(0)
            if len(words) < 2:
                continue
            span = " ".join(words)
            if overlaps(offset, offset + len(span)):
                continue
            claimed.append((offset, offset + len(span)))
            found.append((offset, span))

        found.sort(key=lambda pair: pair[0])
        return [EntityRecord(entity=span) for _, span in found]


def annotate_entities(
    plan_text: str, annotator: EntityAnnotator | None = None
) -> list[EntityRecord]:
    if not plan_text.strip():
        raise EmptyText("plan text is empty")
    annotator = annotator or SpanDictionaryAnnotator()
    return annotator.annotate(plan_text)


# -- triple extraction -------------------------------------------------------------


def parse_triples_from_response(text: str) -> list[KnowledgeTriple]:
    """Pull every ``(s | p | o)`` occurrence out of a model reply, in order."""
    triples = []
    for subject, predicate, obj in TRIPLE_PATTERN.findall(text):
        if not (subject.strip() and predicate.strip() and obj.strip()):
            continue
        triples.append(KnowledgeTriple(subject=subject, predicate=predicate, object=obj))
    return triples


def _entities_csv(batch: list[EntityRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["entity", "part_of_speech"])
    for record in batch:
        writer.writerow([record.entity, record.part_of_speech])
    return buffer.getvalue()


def extract_triples(
    gateway: Gateway,
    entities: list[EntityRecord],
    context_text: str,
    model_id: str,
    seed: int,
    batch_size: int = DEFAULT_BATCH_SIZE,
    plan_id: str = "",
) -> list[KnowledgeTriple]:
    """Batch entities through the model and parse the replies.

    A failed batch is logged and skipped; only a run where every batch fails
    raises ExtractionFailed.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be at least 1")
    batches = [entities[i : i + batch_size] for i in range(0, len(entities), batch_size)]
    triples: list[KnowledgeTriple] = []
    failures: list[str] = []
    successes = 0
    for ordinal, batch in enumerate(batches):
        message = (
            f"{_EXTRACTION_INSTRUCTION}\n\nSource text:\n{context_text}\n\n"
            f"Entities (CSV):\n{_entities_csv(batch)}"
        )
        request = CompletionRequest(
            messages=(system(_EXTRACTOR_ROLE), user(message)),
            seed=seed,
            stream=False,
            model_id=model_id,
        )
        try:
            result = gateway.complete(request)
        except Exception as exc:  # noqa: BLE001 - a bad batch must not sink the others
            failures.append(f"batch {ordinal}: {exc}")
            logger.warning("triple extraction batch %d failed: %s", ordinal, exc)
            continue
        successes += 1
        for triple in parse_triples_from_response(result.text):
            triples.append(
                KnowledgeTriple(
                    subject=triple.subject,
                    predicate=triple.predicate,
                    object=triple.object,
                    provenance=((plan_id, ordinal),),
                )
            )
    if batches and successes == 0:
        raise ExtractionFailed("; ".join(failures))
    return triples


# -- the graph ----------------------------------------------------------------------


@dataclass
class GraphNode:
    key: str
    label: str


@dataclass
class GraphEdge:
    subject_key: str
    predicate: str
    object_key: str
    provenance: tuple[tuple[str, int], ...] = ()

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.subject_key, self.predicate, self.object_key)


def _merge_provenance(
    current: tuple[tuple[str, int], ...], new: Iterable[tuple[str, int]]
) -> tuple[tuple[str, int], ...]:
    merged = set(current)
    merged.update(tuple(p) for p in new)
    return tuple(sorted(merged))


class KnowledgeGraph:
    """Content graph with normalized-label node identity and versioned mutation.

    The version bumps once per call that actually changes state, so replaying
    an identical fusion is a no-op.
    """

    def __init__(self):
        self.nodes: dict[str, GraphNode] = {}
        self.edges: dict[tuple[str, str, str], GraphEdge] = {}
        self.version = 0

    # -- fusion ---------------------------------------------------------------

    def _upsert_node(self, label: str) -> tuple[str, bool]:
        key = node_key(label)
        clean = normalize_part(label)
        node = self.nodes.get(key)
        if node is None:
            self.nodes[key] = GraphNode(key=key, label=clean)
            return key, True
        # Stable label choice regardless of input order: lexicographic minimum.
        if clean < node.label:
            node.label = clean
            return key, True
        return key, False

    def fuse(self, triples: Iterable[KnowledgeTriple]) -> bool:
        """Upsert triples; returns True (and bumps version) if anything changed."""
        changed = False
        for triple in triples:
            skey, s_changed = self._upsert_node(triple.subject)
            okey, o_changed = self._upsert_node(triple.object)
            changed = changed or s_changed or o_changed
            key = (skey, triple.predicate, okey)
            edge = self.edges.get(key)
            if edge is None:
                self.edges[key] = GraphEdge(
                    subject_key=skey,
                    predicate=triple.predicate,
                    object_key=okey,
                    provenance=_merge_provenance((), triple.provenance),
                )
                changed = True
            else:
                merged = _merge_provenance(edge.provenance, triple.provenance)
                if merged != edge.provenance:
                    edge.provenance = merged
                    changed = True
        if changed:
            self.version += 1
        return changed

    # -- editing ---------------------------------------------------------------

    def _require_node(self, key: str) -> GraphNode:
        node = self.nodes.get(key)
        if node is None:
            raise UnknownNode(key)
        return node

    def _require_edge(self, key: tuple[str, str, str]) -> GraphEdge:
        edge = self.edges.get(key)
        if edge is None:
            raise UnknownEdge(key)
        return edge

    @staticmethod
    def _edge_key_from(payload: dict) -> tuple[str, str, str]:
        try:
            return (
                payload["subject_key"],
                normalize_part(payload["predicate"]).casefold(),
                payload["object_key"],
            )
        except KeyError as exc:
            raise ValueError(f"edge payload missing {exc}") from exc

    def apply_edit(self, mutation: str, payload: dict) -> bool:
        """Apply one mutation; delete_node cascades to incident edges."""
        changed = False
        if mutation == "add_node":
            label = payload["label"]
            key = node_key(label)
            if key in self.nodes:
                raise DuplicateNode(key)
            self.nodes[key] = GraphNode(key=key, label=normalize_part(label))
            changed = True
        elif mutation == "rename_node":
            old_key = payload["key"]
            node = self._require_node(old_key)
            new_label = normalize_part(payload["new_label"])
            new_key = node_key(new_label)
            if new_key != old_key and new_key in self.nodes:
                raise DuplicateNode(new_key)
            if new_key == old_key:
                changed = node.label != new_label
                node.label = new_label
            else:
                del self.nodes[old_key]
                self.nodes[new_key] = GraphNode(key=new_key, label=new_label)
                rekeyed = {}
                for key, edge in self.edges.items():
                    skey = new_key if edge.subject_key == old_key else edge.subject_key
                    okey = new_key if edge.object_key == old_key else edge.object_key
                    edge.subject_key, edge.object_key = skey, okey
                    rekeyed[edge.key] = edge
                self.edges = rekeyed
                changed = True
        elif mutation == "delete_node":
            key = payload["key"]
            self._require_node(key)
            del self.nodes[key]
            self.edges = {
                ekey: edge
                for ekey, edge in self.edges.items()
                if key not in (edge.subject_key, edge.object_key)
            }
            changed = True
        elif mutation == "add_edge":
            key = self._edge_key_from(payload)
            self._require_node(key[0])
            self._require_node(key[2])
            provenance = tuple(tuple(p) for p in payload.get("provenance", ()))
            edge = self.edges.get(key)
            if edge is None:
                self.edges[key] = GraphEdge(
                    subject_key=key[0],
                    predicate=key[1],
                    object_key=key[2],
                    provenance=_merge_provenance((), provenance),
                )
                changed = True
            else:
                merged = _merge_provenance(edge.provenance, provenance)
                changed = merged != edge.provenance
                edge.provenance = merged
        elif mutation == "update_edge":
            old_key = self._edge_key_from(payload)
            edge = self._require_edge(old_key)
            new_key = (
                payload.get("new_subject_key", old_key[0]),
                normalize_part(payload.get("new_predicate", old_key[1])).casefold(),
                payload.get("new_object_key", old_key[2]),
            )
            self._require_node(new_key[0])
            self._require_node(new_key[2])
            if new_key != old_key:
                del self.edges[old_key]
                existing = self.edges.get(new_key)
                if existing is None:
                    self.edges[new_key] = GraphEdge(
                        subject_key=new_key[0],
                        predicate=new_key[1],
                        object_key=new_key[2],
                        provenance=edge.provenance,
                    )
                else:
                    existing.provenance = _merge_provenance(
                        existing.provenance, edge.provenance
                    )
                changed = True
        elif mutation == "delete_edge":
            key = self._edge_key_from(payload)
            self._require_edge(key)
            del self.edges[key]
            changed = True
        else:
            raise ValueError(f"unknown mutation '{mutation}'")

        if changed:
            self.version += 1
        return changed

    # -- export / import -----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "nodes": [
                {"key": node.key, "label": node.label}
                for node in sorted(self.nodes.values(), key=lambda n: n.key)
            ],
            "edges": [
                {
                    "subject_key": edge.subject_key,
                    "predicate": edge.predicate,
                    "object_key": edge.object_key,
                    "provenance": [list(p) for p in edge.provenance],
                }
                for edge in sorted(self.edges.values(), key=lambda e: e.key)
            ],
        }

    def to_json_bytes(self) -> bytes:
        return (json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n").encode("utf-8")

    @classmethod
    def from_dict(cls, data: dict) -> "KnowledgeGraph":
        graph = cls()
        try:
            for node in data["nodes"]:
                graph.nodes[node["key"]] = GraphNode(key=node["key"], label=node["label"])
            for edge in data["edges"]:
                key = (edge["subject_key"], edge["predicate"], edge["object_key"])
                if key[0] not in graph.nodes or key[2] not in graph.nodes:
                    raise MalformedGraphFile(f"edge {key} references a missing node")
                graph.edges[key] = GraphEdge(
                    subject_key=key[0],
                    predicate=key[1],
                    object_key=key[2],
                    provenance=tuple(tuple(p) for p in edge.get("provenance", ())),
                )
            graph.version = int(data["version"])
        except (KeyError, TypeError) as exc:
            raise MalformedGraphFile(f"bad graph structure: {exc}") from exc
        return graph

    @classmethod
    def from_json_bytes(cls, raw: bytes) -> "KnowledgeGraph":
        try:
            data = json.loads(raw.decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise MalformedGraphFile(f"not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise MalformedGraphFile("graph file must hold a JSON object")
        return cls.from_dict(data)

    def to_dot_bytes(self) -> bytes:
        def quote(text: str) -> str:
            return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'

        lines = ["digraph knowledge {"]
        for node in sorted(self.nodes.values(), key=lambda n: n.key):
            lines.append(f"  {quote(node.key)} [label={quote(node.label)}];")
        for edge in sorted(self.edges.values(), key=lambda e: e.key):
            lines.append(
                f"  {quote(edge.subject_key)} -> {quote(edge.object_key)} "
                f"[label={quote(edge.predicate)}];"
            )
        lines.append("}")
        return ("\n".join(lines) + "\n").encode("utf-8")


def export_graph(graph: KnowledgeGraph, format: str = "json") -> bytes:
    if format == "json":
        return graph.to_json_bytes()
    if format == "dot":
        return graph.to_dot_bytes()
    raise ValueError(f"unsupported export format '{format}'")


def import_graph(raw: bytes) -> KnowledgeGraph:
    return KnowledgeGraph.from_json_bytes(raw)
