"""HTTP service binding all modules into the copilot workflow.

Every endpoint delegates to one module operation; request/response bodies are
the module JSON shapes. Errors become ``{error_code, message}`` with 404 for
unknown ids, 422 for caller faults, 409 for stale graph versions, and 502 for
provider faults. Session and graph writes are serialized per id; reads go to
the last committed file, so a restart never loses committed state.
"""

from __future__ import annotations

import datetime as _dt
import threading
from typing import Any

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response, StreamingResponse
from pydantic import BaseModel, Field

from . import errors as E
from .config import PER_REQUEST, ServiceConfig, build_gateway
from .gateway import CompletionRequest, Gateway, system, user
from .kgraph import (
    KnowledgeGraph,
    SpanDictionaryAnnotator,
    annotate_entities,
    export_graph,
    extract_triples,
)
from .library import CaseLibrary, DocumentMetadata
from .pipeline import (
    LessonPlan,
    OptimizedPrompt,
    PlanPipeline,
    apply_manual_edit,
)
from .storage import FilePlanStore, JsonDirectoryStore
from .structurer import (
    Row,
    Section,
    StructuredPlan,
    UNASSIGNED_SECTION,
    add_row,
    delete_row,
    export_plan,
    parse_plan,
    reset_rows,
)
from .templates import (
    UPSTREAM_OF,
    CurriculumInput,
    GeneratedPrompt,
    default_template_library,
    dependency_order,
    generate_prompt_stepwise,
    generate_prompts_holistic,
)

_STATUS_BY_ERROR: list[tuple[type, int]] = [
    (E.UnknownSessionError, 404),
    (E.UnknownPlanError, 404),
    (E.UnknownGraphError, 404),
    (E.UnknownFile, 404),
    (E.MissingTemplate, 404),
    (E.VersionConflict, 409),
    (E.ProviderUnavailable, 502),
    (E.OptimizationFailed, 502),
    (E.GenerationFailed, 502),
    (E.MalformedScore, 502),
    (E.ExtractionFailed, 502),
    (E.CorruptRecord, 500),
    (E.PlanForgeError, 422),
]


def _status_for(exc: E.PlanForgeError) -> int:
    for klass, status in _STATUS_BY_ERROR:
        if isinstance(exc, klass):
            return status
    return 422


class _LockMap:
    """Named locks for single-writer-per-session / per-graph discipline."""

    def __init__(self):
        self._locks: dict[str, threading.Lock] = {}
        self._master = threading.Lock()

    def get(self, name: str) -> threading.Lock:
        with self._master:
            if name not in self._locks:
                self._locks[name] = threading.Lock()
            return self._locks[name]


# -- request bodies -----------------------------------------------------------------


class CurriculumBody(BaseModel):
    unit_theme: str
    grade_level: str
    primary_subject: str
    supporting_subjects: list[str]
    class_hours: int
    textbook_version: str = ""
    learner_notes: str = ""


class CreateSessionBody(BaseModel):
    input: CurriculumBody
    seed: int | None = None


class PromptsBody(BaseModel):
    mode: str
    template_id: str | None = None


class ModelCallBody(BaseModel):
    model_id: str | None = None
    seed: int | None = None


class ManualEditBody(BaseModel):
    text: str


class PlanBody(ModelCallBody):
    template_ids: list[str] | None = None


class EvaluatePlanBody(ModelCallBody):
    session_id: str | None = None


class MetadataBody(BaseModel):
    subject: str = ""
    grade_band: str = ""
    keywords: list[str] = Field(default_factory=list)


class IngestBody(BaseModel):
    title: str
    raw_text: str
    source_uri: str = ""
    metadata: MetadataBody = Field(default_factory=MetadataBody)


class QABody(ModelCallBody):
    question: str


class RowBody(BaseModel):
    section_name: str = UNASSIGNED_SECTION
    driving_question: str = ""
    activity: str = ""
    assessment: str = ""


class SectionBody(BaseModel):
    name: str
    body: str = ""


class StructurePutBody(BaseModel):
    sections: list[SectionBody]
    activity_rows: list[RowBody] = Field(default_factory=list)


class RowOpBody(BaseModel):
    op: str
    row: RowBody | None = None
    index: int | None = None


class BuildGraphBody(ModelCallBody):
    dictionary: list[str] = Field(default_factory=list)
    batch_size: int = 20
    session_id: str | None = None


class PatchGraphBody(BaseModel):
    version: int
    mutation: str
    payload: dict[str, Any] = Field(default_factory=dict)


# -- application --------------------------------------------------------------------


def create_app(config: ServiceConfig, gateway: Gateway | None = None) -> FastAPI:
    try:
        config.data_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise E.ConfigError(f"data_dir {config.data_dir} is not writable: {exc}") from exc

    app = FastAPI(title="planforge", version="0.1.0")
    gw = gateway if gateway is not None else build_gateway(config)

    sessions = JsonDirectoryStore(config.data_dir / "sessions", "session")
    graphs = JsonDirectoryStore(config.data_dir / "graphs", "graph")
    structures = JsonDirectoryStore(config.data_dir / "structures", "structure")
    plan_store = FilePlanStore(config.data_dir / "plans")
    pipeline = PlanPipeline(gw, store=plan_store)
    library_dir = config.data_dir / "library"
    case_library = CaseLibrary.load(library_dir)
    templates = default_template_library()
    locks = _LockMap()

    app.state.config = config
    app.state.gateway = gw
    app.state.pipeline = pipeline
    app.state.library = case_library

    # -- error shaping ---------------------------------------------------------

    @app.exception_handler(E.PlanForgeError)
    async def _domain_error(_request: Request, exc: E.PlanForgeError):
        return JSONResponse(
            status_code=_status_for(exc),
            content={"error_code": exc.code, "message": str(exc)},
        )

    @app.exception_handler(ValueError)
    async def _value_error(_request: Request, exc: ValueError):
        return JSONResponse(
            status_code=422,
            content={"error_code": "ValidationError", "message": str(exc)},
        )

    @app.exception_handler(RequestValidationError)
    async def _body_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={"error_code": "ValidationError", "message": str(exc)},
        )

    # -- helpers ------------------------------------------------------------------

    def _now() -> str:
        return _dt.datetime.now(_dt.timezone.utc).isoformat()

    def _load_session(session_id: str) -> dict:
        try:
            return sessions.load(session_id)
        except KeyError:
            raise E.UnknownSessionError(session_id) from None

    def _save_session(record: dict) -> None:
        record["updated_at"] = _now()
        sessions.save(record["session_id"], record)

    def _load_graph(graph_id: str) -> KnowledgeGraph:
        try:
            return KnowledgeGraph.from_dict(graphs.load(graph_id))
        except KeyError:
            raise E.UnknownGraphError(graph_id) from None

    def _session_seed(record: dict, override: int | None) -> int:
        if override is not None and config.seed_policy == PER_REQUEST:
            return override
        return record.get("seed", config.fixed_seed)

    def _model(override: str | None) -> str:
        return override or config.default_model_id

    def _structure_for(plan_id: str) -> StructuredPlan:
        if structures.exists(plan_id):
            return StructuredPlan.from_dict(structures.load(plan_id))
        plan = plan_store.get(plan_id)
        structure = parse_plan(plan.text, plan_id)
        structures.save(plan_id, structure.to_dict(include_snapshot=True))
        return structure

    def _save_structure(structure: StructuredPlan) -> None:
        structures.save(structure.plan_id, structure.to_dict(include_snapshot=True))

    # -- sessions -------------------------------------------------------------------

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.post("/api/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        curriculum = CurriculumInput(
            unit_theme=body.input.unit_theme,
            grade_level=body.input.grade_level,
            primary_subject=body.input.primary_subject,
            supporting_subjects=tuple(body.input.supporting_subjects),
            class_hours=body.input.class_hours,
            textbook_version=body.input.textbook_version,
            learner_notes=body.input.learner_notes,
        )
        seed = body.seed if body.seed is not None else config.fixed_seed
        record = {
            "session_id": sessions.next_id(),
            "input": curriculum.to_dict(),
            "seed": seed,
            "generated": {},
            "prompts": {},
            "plan_id": None,
            "report": None,
            "graph_id": None,
            "updated_at": _now(),
        }
        _save_session(record)
        return record

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        return _load_session(session_id)

    # -- prompt generation ------------------------------------------------------------

    @app.post("/api/sessions/{session_id}/prompts")
    def make_prompts(session_id: str, body: PromptsBody):
        with locks.get(session_id):
            record = _load_session(session_id)
            curriculum = CurriculumInput.from_dict(record["input"])
            if body.mode == "holistic":
                prompts = generate_prompts_holistic(templates, curriculum)
                for prompt in prompts:
                    record["generated"][prompt.template_id] = prompt.to_dict()
                _save_session(record)
                return {"prompts": [p.to_dict() for p in prompts]}
            if body.mode == "stepwise":
                if not body.template_id:
                    raise E.InvalidRequest("stepwise mode requires template_id")
                upstream_id = UPSTREAM_OF.get(body.template_id)
                upstream = None
                if upstream_id is not None and upstream_id in record["generated"]:
                    upstream = GeneratedPrompt.from_dict(record["generated"][upstream_id])
                prompt = generate_prompt_stepwise(templates, body.template_id, curriculum, upstream)
                record["generated"][prompt.template_id] = prompt.to_dict()
                _save_session(record)
                return {"prompt": prompt.to_dict()}
            raise E.InvalidRequest(f"unknown mode '{body.mode}'")

    @app.post("/api/sessions/{session_id}/prompts/{template_id}/optimize")
    def optimize(session_id: str, template_id: str, body: ModelCallBody):
        with locks.get(session_id):
            record = _load_session(session_id)
            templates.get(template_id)  # 404 on unknown template id
            generated = record["generated"].get(template_id)
            if generated is None:
                raise E.InvalidRequest(f"prompt {template_id} has not been generated yet")
            optimized = pipeline.optimize_prompt(
                generated["text"], _model(body.model_id), _session_seed(record, body.seed)
            )
            record["prompts"][template_id] = optimized.to_dict()
            _save_session(record)
            return optimized.to_dict()

    @app.put("/api/sessions/{session_id}/prompts/{template_id}/manual")
    def manual_edit(session_id: str, template_id: str, body: ManualEditBody):
        with locks.get(session_id):
            record = _load_session(session_id)
            current = record["prompts"].get(template_id)
            if current is None:
                raise E.InvalidRequest(f"prompt {template_id} has not been optimized yet")
            edited = apply_manual_edit(OptimizedPrompt.from_dict(current), body.text)
            record["prompts"][template_id] = edited.to_dict()
            _save_session(record)
            return edited.to_dict()

    # -- plan generation ---------------------------------------------------------------

    def _compose_session_prompt(record: dict, template_ids: list[str] | None) -> str:
        available = set(record["generated"]) | set(record["prompts"])
        if not available:
            raise E.InvalidRequest("no prompts generated for this session yet")
        chosen = template_ids if template_ids else [t for t in dependency_order() if t in available]
        parts = []
        for template_id in chosen:
            if template_id in record["prompts"]:
                parts.append(record["prompts"][template_id]["manual_final"])
            elif template_id in record["generated"]:
                parts.append(record["generated"][template_id]["text"])
            else:
                raise E.InvalidRequest(f"prompt {template_id} has not been generated yet")
        return "\n\n".join(parts)

    @app.post("/api/sessions/{session_id}/plan")
    def make_plan(session_id: str, body: PlanBody, stream: bool = Query(False)):
        with locks.get(session_id):
            record = _load_session(session_id)
            prompt_text = _compose_session_prompt(record, body.template_ids)
            model_id = _model(body.model_id)
            seed = _session_seed(record, body.seed)

            if not stream:
                plan = pipeline.generate_plan_from_text(prompt_text, model_id, seed)
                record["plan_id"] = plan.id
                _save_session(record)
                return plan.to_dict()

            request = CompletionRequest(
                messages=(
                    system("You are an expert interdisciplinary lesson planner."),
                    user(pipeline.plan_request_text(prompt_text)),
                ),
                seed=seed,
                stream=True,
                model_id=model_id,
            )
            chunk_iter = gw.stream_text(request)

            def streamer():
                parts: list[str] = []
                try:
                    for piece in chunk_iter:
                        parts.append(piece)
                        yield piece
                finally:
                    text = "".join(parts)
                    if text.strip():
                        from .hashing import fnv1a_64, hex64

                        plan = LessonPlan(
                            id=plan_store.next_id(),
                            prompt_fingerprint=hex64(fnv1a_64(prompt_text)),
                            text=text,
                            created_at=_now(),
                        )
                        plan_store.save(plan)
                        record["plan_id"] = plan.id
                        _save_session(record)

            return StreamingResponse(streamer(), media_type="text/plain; charset=utf-8")

    @app.get("/api/plans/{plan_id}")
    def get_plan(plan_id: str):
        return plan_store.get(plan_id).to_dict()

    # -- evaluation ---------------------------------------------------------------------

    def _evaluate(plan_id: str, model_id: str | None, seed: int) -> dict:
        plan = plan_store.get(plan_id)
        report = pipeline.evaluate_plan(plan, _model(model_id), seed)
        return report.to_dict()

    @app.post("/api/plans/{plan_id}/evaluate")
    def evaluate_plan_endpoint(plan_id: str, body: EvaluatePlanBody):
        seed = config.fixed_seed if body.seed is None else body.seed
        if body.session_id is not None:
            with locks.get(body.session_id):
                record = _load_session(body.session_id)
                report = _evaluate(plan_id, body.model_id, _session_seed(record, body.seed))
                record["report"] = report
                _save_session(record)
                return report
        return _evaluate(plan_id, body.model_id, seed)

    @app.post("/api/sessions/{session_id}/evaluate")
    def evaluate_session_plan(session_id: str, body: ModelCallBody):
        with locks.get(session_id):
            record = _load_session(session_id)
            if not record.get("plan_id"):
                raise E.InvalidRequest("session has no generated plan to evaluate")
            report = _evaluate(
                record["plan_id"], body.model_id, _session_seed(record, body.seed)
            )
            record["report"] = report
            _save_session(record)
            return report

    # -- case library ----------------------------------------------------------------------

    @app.post("/api/library/documents", status_code=201)
    def ingest(body: IngestBody):
        file_id = case_library.ingest_document(
            source_uri=body.source_uri,
            title=body.title,
            metadata=DocumentMetadata(
                subject=body.metadata.subject,
                grade_band=body.metadata.grade_band,
                keywords=tuple(body.metadata.keywords),
            ),
            raw_text=body.raw_text,
        )
        case_library.save(library_dir)
        return {"file_id": file_id}

    @app.get("/api/library/search")
    def search(
        q: str,
        subject: str | None = None,
        grade_band: str | None = None,
        keywords: str | None = None,
        top_k: int = 5,
    ):
        hits = case_library.search(
            q,
            subject=subject,
            grade_band=grade_band,
            keywords=keywords.split(",") if keywords else None,
            top_k=top_k,
        )
        return {
            "results": [
                {
                    "file_id": h.file_id,
                    "ordinal": h.ordinal,
                    "score": h.score,
                    "snippet": h.snippet,
                }
                for h in hits
            ]
        }

    @app.post("/api/library/documents/{file_id}/qa")
    def document_qa(file_id: str, body: QABody):
        seed = config.fixed_seed if body.seed is None else body.seed
        answer = case_library.answer_question(
            gw, body.question, file_id, _model(body.model_id), seed
        )
        return answer.to_dict()

    # -- structured editing -------------------------------------------------------------------

    @app.get("/api/plans/{plan_id}/structure")
    def get_structure(plan_id: str):
        return _structure_for(plan_id).to_dict()

    @app.put("/api/plans/{plan_id}/structure")
    def put_structure(plan_id: str, body: StructurePutBody):
        with locks.get(plan_id):
            current = _structure_for(plan_id)
            names = [s.name for s in body.sections]
            if len(set(names)) != len(names):
                raise E.InvalidRequest("section names must be unique")
            for row in body.activity_rows:
                if row.section_name not in names and row.section_name != UNASSIGNED_SECTION:
                    raise E.UnknownSection(row.section_name)
            updated = StructuredPlan(
                plan_id=plan_id,
                sections=tuple(Section(s.name, s.body) for s in body.sections),
                activity_rows=tuple(
                    Row(r.section_name, r.driving_question, r.activity, r.assessment)
                    for r in body.activity_rows
                ),
                warnings=current.warnings,
                initial_rows=current.initial_rows,
            )
            _save_structure(updated)
            return updated.to_dict()

    @app.post("/api/plans/{plan_id}/structure/rows")
    def row_op(plan_id: str, body: RowOpBody):
        with locks.get(plan_id):
            structure = _structure_for(plan_id)
            if body.op == "add":
                if body.row is None or body.index is None:
                    raise E.InvalidRequest("add requires row and index")
                structure = add_row(
                    structure,
                    Row(
                        body.row.section_name,
                        body.row.driving_question,
                        body.row.activity,
                        body.row.assessment,
                    ),
                    body.index,
                )
            elif body.op == "delete":
                if body.index is None:
                    raise E.InvalidRequest("delete requires index")
                structure = delete_row(structure, body.index)
            elif body.op == "reset":
                structure = reset_rows(structure)
            else:
                raise E.InvalidRequest(f"unknown row op '{body.op}'")
            _save_structure(structure)
            return structure.to_dict()

    @app.get("/api/plans/{plan_id}/structure/export")
    def export_structure(plan_id: str, format: str = Query("markdown")):
        structure = _structure_for(plan_id)
        data = export_plan(structure, format)
        media = "text/markdown; charset=utf-8" if format == "markdown" else "application/json"
        return Response(content=data, media_type=media)

    # -- knowledge graph --------------------------------------------------------------------------

    @app.post("/api/plans/{plan_id}/kg", status_code=201)
    def build_graph(plan_id: str, body: BuildGraphBody):
        plan = plan_store.get(plan_id)
        seed = config.fixed_seed if body.seed is None else body.seed
        annotator = SpanDictionaryAnnotator(body.dictionary)
        entities = annotate_entities(plan.text, annotator)
        graph = KnowledgeGraph()
        if entities:
            triples = extract_triples(
                gw,
                entities,
                plan.text,
                _model(body.model_id),
                seed,
                batch_size=body.batch_size,
                plan_id=plan_id,
            )
            graph.fuse(triples)
        graph_id = graphs.next_id()
        graphs.save(graph_id, graph.to_dict())
        if body.session_id is not None:
            with locks.get(body.session_id):
                record = _load_session(body.session_id)
                record["graph_id"] = graph_id
                _save_session(record)
        return {"graph_id": graph_id, "version": graph.version,
                "nodes": len(graph.nodes), "edges": len(graph.edges)}

    @app.get("/api/kg/{graph_id}")
    def get_graph(graph_id: str):
        return _load_graph(graph_id).to_dict()

    @app.patch("/api/kg/{graph_id}")
    def patch_graph(graph_id: str, body: PatchGraphBody):
        with locks.get(graph_id):
            graph = _load_graph(graph_id)
            if body.version != graph.version:
                raise E.VersionConflict(body.version, graph.version)
            graph.apply_edit(body.mutation, body.payload)
            graphs.save(graph_id, graph.to_dict())
            return graph.to_dict()

    @app.get("/api/kg/{graph_id}/export")
    def export_graph_endpoint(graph_id: str, format: str = Query("json")):
        graph = _load_graph(graph_id)
        data = export_graph(graph, format)
        media = "application/json" if format == "json" else "text/plain; charset=utf-8"
        return Response(content=data, media_type=media)

    if config.static_dir is not None and config.static_dir.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="frontend")

    return app
