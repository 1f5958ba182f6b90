"""End-to-end offline run: prompts -> optimization -> plan -> report -> graph.

Shared by the CLI's ``generate`` command and the determinism checks, so both
produce artifacts through exactly the same call sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .gateway import Gateway
from .kgraph import KnowledgeGraph, SpanDictionaryAnnotator, annotate_entities, extract_triples
from .pipeline import EvaluationReport, LessonPlan, OptimizedPrompt, PlanPipeline
from .structurer import StructuredPlan, parse_plan
from .templates import (
    CurriculumInput,
    GeneratedPrompt,
    TemplateLibrary,
    default_template_library,
    generate_prompts_holistic,
)


@dataclass
class WorkflowArtifacts:
    prompts: list[GeneratedPrompt]
    optimized: dict[str, OptimizedPrompt]
    plan: LessonPlan
    report: EvaluationReport
    structure: StructuredPlan
    graph: KnowledgeGraph
    prompt_texts: dict[str, str] = field(default_factory=dict)


def compose_plan_prompt(optimized: dict[str, OptimizedPrompt], order: list[str]) -> str:
    """Join the final per-template prompts, dependency order, blank-line separated."""
    return "\n\n".join(optimized[tid].manual_final for tid in order if tid in optimized)


def run_offline(
    curriculum: CurriculumInput,
    gateway: Gateway,
    model_id: str,
    seed: int,
    library: TemplateLibrary | None = None,
    kg_dictionary: list[str] | None = None,
    kg_batch_size: int = 20,
) -> WorkflowArtifacts:
    library = library or default_template_library()
    pipeline = PlanPipeline(gateway)

    prompts = generate_prompts_holistic(library, curriculum)
    optimized: dict[str, OptimizedPrompt] = {}
    for prompt in prompts:
        optimized[prompt.template_id] = pipeline.optimize_prompt(prompt.text, model_id, seed)

    order = [p.template_id for p in prompts]
    plan_prompt = compose_plan_prompt(optimized, order)
    plan = pipeline.generate_plan_from_text(plan_prompt, model_id, seed)
    report = pipeline.evaluate_plan(plan, model_id, seed)
    structure = parse_plan(plan.text, plan.id)

    annotator = SpanDictionaryAnnotator(kg_dictionary or ())
    entities = annotate_entities(plan.text, annotator)
    graph = KnowledgeGraph()
    if entities:
        triples = extract_triples(
            gateway,
            entities,
            plan.text,
            model_id,
            seed,
            batch_size=kg_batch_size,
            plan_id=plan.id,
        )
        graph.fuse(triples)

    return WorkflowArtifacts(
        prompts=prompts,
        optimized=optimized,
        plan=plan,
        report=report,
        structure=structure,
        graph=graph,
        prompt_texts={p.template_id: p.text for p in prompts},
    )
