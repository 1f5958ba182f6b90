"""Interdisciplinary case repository: ingestion, retrieval, and grounded Q&A.

Documents are chunked with a 500-char sliding window (100-char overlap,
paragraph boundaries preferred) and embedded with a deterministic 64-bucket
token-hash embedder. Retrieval is an exact cosine scan over the surviving
chunks; corpora are small enough that nothing smarter is warranted. Q&A
retrieves the top chunks of one document and falls back to the bare model
when the best match is below the relevance threshold.
"""

from __future__ import annotations

import json
import math
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CorruptRecord, EmptyDocument, NoTokens, UnknownFile
from .gateway import CompletionRequest, Gateway, system, user
from .hashing import fnv1a_64

EMBED_DIM = 64
CHUNK_TARGET = 500
CHUNK_OVERLAP = 100
# A paragraph break only wins if the chunk keeps at least half the target size,
# which also guarantees the window advances past the overlap.
MIN_CHUNK_CUT = CHUNK_TARGET // 2
RELEVANCE_THRESHOLD = 0.15
QA_TOP_K = 3

SOURCE_KNOWLEDGE_BASE = "knowledge_base"
SOURCE_MODEL_FALLBACK = "model_fallback"

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

_QA_ROLE = "You answer teachers' questions about interdisciplinary lesson-plan documents."


@dataclass(frozen=True)
class DocumentMetadata:
    subject: str = ""
    grade_band: str = ""
    keywords: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "grade_band": self.grade_band,
            "keywords": list(self.keywords),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DocumentMetadata":
        return cls(
            subject=data.get("subject", ""),
            grade_band=data.get("grade_band", ""),
            keywords=tuple(data.get("keywords", ())),
        )


@dataclass(frozen=True)
class CaseDocument:
    file_id: str
    title: str
    source_uri: str
    metadata: DocumentMetadata
    raw_text: str


@dataclass(frozen=True)
class Chunk:
    file_id: str
    ordinal: int
    text: str
    embedding: tuple[float, ...]


@dataclass(frozen=True)
class SearchHit:
    file_id: str
    ordinal: int
    score: float
    snippet: str

    @property
    def chunk_id(self) -> tuple[str, int]:
        return (self.file_id, self.ordinal)


@dataclass(frozen=True)
class Answer:
    text: str
    source: str  # knowledge_base | model_fallback
    cited_chunks: tuple[tuple[str, int], ...]

    def __post_init__(self):
        if self.source == SOURCE_KNOWLEDGE_BASE and not self.cited_chunks:
            raise ValueError("knowledge-base answers must cite chunks")
        if self.source == SOURCE_MODEL_FALLBACK and self.cited_chunks:
            raise ValueError("fallback answers must not cite chunks")

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "source": self.source,
            "cited_chunks": [[fid, ordinal] for fid, ordinal in self.cited_chunks],
        }


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def embed(text: str) -> tuple[float, ...]:
    """64-bucket token-count embedding, L2-normalized.

    Each token increments bucket FNV-1a-64(token) mod 64; the unit vector is
    the normative embedding for all tests, though a real provider can slot in
    at the library level.
    """
    tokens = tokenize(text)
    if not tokens:
        raise NoTokens(text)
    counts = [0.0] * EMBED_DIM
    for token in tokens:
        counts[fnv1a_64(token) % EMBED_DIM] += 1.0
    norm = math.sqrt(sum(c * c for c in counts))
    return tuple(c / norm for c in counts)


def cosine(a: tuple[float, ...], b: tuple[float, ...]) -> float:
    return sum(x * y for x, y in zip(a, b))


def chunk_text(text: str) -> list[str]:
    """Sliding 500-char window with 100-char overlap, cut at the last paragraph
    break in the second half of the window when one exists."""
    chunks: list[str] = []
    start = 0
    n = len(text)
    while True:
        end = min(start + CHUNK_TARGET, n)
        if end < n:
            cut = text.rfind("\n\n", start, end)
            if cut != -1 and (cut + 2) - start >= MIN_CHUNK_CUT:
                end = cut + 2  # keep the separator with the earlier chunk
        chunks.append(text[start:end])
        if end >= n:
            return chunks
        start = end - CHUNK_OVERLAP


class CaseLibrary:
    """In-memory corpus with JSON-lines persistence.

    A document is published atomically: searches see either none or all of its
    chunks.
    """

    def __init__(self):
        self._documents: dict[str, CaseDocument] = {}
        self._chunks: list[Chunk] = []
        self._lock = threading.Lock()
        self._counter = 0

    # -- ingestion --------------------------------------------------------------

    def ingest_document(
        self,
        source_uri: str,
        title: str,
        metadata: DocumentMetadata | dict | None,
        raw_text: str,
    ) -> str:
        if not raw_text:
            raise EmptyDocument("document text is empty")
        if metadata is None:
            metadata = DocumentMetadata()
        elif isinstance(metadata, dict):
            metadata = DocumentMetadata.from_dict(metadata)

        pieces = chunk_text(raw_text)
        with self._lock:
            self._counter += 1
            file_id = f"doc-{self._counter:06d}"
            chunks = [
                Chunk(file_id=file_id, ordinal=i, text=piece, embedding=embed(piece))
                for i, piece in enumerate(pieces)
            ]
            self._documents[file_id] = CaseDocument(
                file_id=file_id,
                title=title,
                source_uri=source_uri,
                metadata=metadata,
                raw_text=raw_text,
            )
            self._chunks.extend(chunks)
        return file_id

    def document(self, file_id: str) -> CaseDocument:
        doc = self._documents.get(file_id)
        if doc is None:
            raise UnknownFile(file_id)
        return doc

    def documents(self) -> list[CaseDocument]:
        return list(self._documents.values())

    def chunks_of(self, file_id: str) -> list[Chunk]:
        self.document(file_id)
        return [c for c in self._chunks if c.file_id == file_id]

    def __len__(self) -> int:
        return len(self._documents)

    # -- retrieval ---------------------------------------------------------------

    def _surviving_file_ids(
        self,
        subject: str | None,
        grade_band: str | None,
        keywords: list[str] | None,
    ) -> set[str]:
        survivors = set()
        for doc in self._documents.values():
            if subject is not None and doc.metadata.subject != subject:
                continue
            if grade_band is not None and doc.metadata.grade_band != grade_band:
                continue
            if keywords is not None and not set(keywords) & set(doc.metadata.keywords):
                continue
            survivors.add(doc.file_id)
        return survivors

    def search(
        self,
        query_text: str,
        subject: str | None = None,
        grade_band: str | None = None,
        keywords: list[str] | None = None,
        top_k: int = 5,
    ) -> list[SearchHit]:
        """Filter documents by metadata, then rank their chunks by cosine.

        Ties break by ascending (file_id, ordinal). An empty survivor set is an
        empty result, not an error.
        """
        if top_k < 1:
            raise ValueError("top_k must be at least 1")
        query = embed(query_text)
        survivors = self._surviving_file_ids(subject, grade_band, keywords)
        hits = [
            SearchHit(
                file_id=chunk.file_id,
                ordinal=chunk.ordinal,
                score=cosine(query, chunk.embedding),
                snippet=chunk.text,
            )
            for chunk in self._chunks
            if chunk.file_id in survivors
        ]
        hits.sort(key=lambda h: (-h.score, h.file_id, h.ordinal))
        return hits[:top_k]

    # -- document Q&A --------------------------------------------------------------

    def answer_question(
        self,
        gateway: Gateway,
        question: str,
        file_id: str,
        model_id: str,
        seed: int,
    ) -> Answer:
        """Answer grounded in the document when retrieval clears the relevance
        threshold; otherwise fall back to the bare model with no citations."""
        doc_chunks = self.chunks_of(file_id)
        query = embed(question)
        scored = sorted(
            ((cosine(query, c.embedding), c) for c in doc_chunks),
            key=lambda pair: (-pair[0], pair[1].ordinal),
        )[:QA_TOP_K]

        if scored and scored[0][0] >= RELEVANCE_THRESHOLD:
            passages = "\n\n".join(
                f"[{i + 1}] {chunk.text}" for i, (_, chunk) in enumerate(scored)
            )
            prompt = (
                f"Answer the question using only the passages below.\n\n"
                f"Question: {question}\n\nPassages:\n{passages}"
            )
            source = SOURCE_KNOWLEDGE_BASE
            cited = tuple((chunk.file_id, chunk.ordinal) for _, chunk in scored)
        else:
            prompt = question
            source = SOURCE_MODEL_FALLBACK
            cited = ()

        request = CompletionRequest(
            messages=(system(_QA_ROLE), user(prompt)),
            seed=seed,
            stream=False,
            model_id=model_id,
        )
        result = gateway.complete(request)
        return Answer(text=result.text, source=source, cited_chunks=cited)

    # -- persistence -----------------------------------------------------------------

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        chunk_lines = [
            json.dumps(
                {
                    "file_id": c.file_id,
                    "ordinal": c.ordinal,
                    "text": c.text,
                    "embedding": list(c.embedding),
                },
                ensure_ascii=False,
            )
            for c in self._chunks
        ]
        (directory / "chunks.jsonl").write_text(
            "\n".join(chunk_lines) + ("\n" if chunk_lines else ""), encoding="utf-8"
        )
        docs = [
            {
                "file_id": d.file_id,
                "title": d.title,
                "source_uri": d.source_uri,
                "metadata": d.metadata.to_dict(),
                "raw_text": d.raw_text,
            }
            for d in self._documents.values()
        ]
        (directory / "documents.json").write_text(
            json.dumps(docs, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, directory: str | Path) -> "CaseLibrary":
        directory = Path(directory)
        library = cls()
        docs_path = directory / "documents.json"
        chunks_path = directory / "chunks.jsonl"
        if not docs_path.exists():
            return library
        try:
            docs = json.loads(docs_path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, OSError) as exc:
            raise CorruptRecord(str(docs_path), str(exc)) from exc
        for entry in docs:
            library._documents[entry["file_id"]] = CaseDocument(
                file_id=entry["file_id"],
                title=entry["title"],
                source_uri=entry["source_uri"],
                metadata=DocumentMetadata.from_dict(entry.get("metadata", {})),
                raw_text=entry["raw_text"],
            )
        if chunks_path.exists():
            try:
                for line in chunks_path.read_text(encoding="utf-8").splitlines():
                    if not line.strip():
                        continue
                    rec = json.loads(line)
                    library._chunks.append(
                        Chunk(
                            file_id=rec["file_id"],
                            ordinal=rec["ordinal"],
                            text=rec["text"],
                            embedding=tuple(rec["embedding"]),
                        )
                    )
            except (json.JSONDecodeError, KeyError, OSError) as exc:
                raise CorruptRecord(str(chunks_path), str(exc)) from exc
        numbers = [
            int(fid.split("-")[1])
            for fid in library._documents
            if fid.startswith("doc-") and fid.split("-")[1].isdigit()
        ]
        library._counter = max(numbers, default=0)
        return library
