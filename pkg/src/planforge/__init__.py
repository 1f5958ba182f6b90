"""Copilot engine for interdisciplinary lesson-plan design."""

from .gateway import (
    ChatMessage,
    CompletionRequest,
    CompletionResult,
    Gateway,
    MockProvider,
)
from .kgraph import KnowledgeGraph, KnowledgeTriple
from .library import CaseLibrary
from .pipeline import (
    RUBRIC_DIMENSIONS,
    EvaluationReport,
    LessonPlan,
    OptimizedPrompt,
    PlanPipeline,
)
from .structurer import StructuredPlan, parse_plan
from .templates import (
    CurriculumInput,
    GeneratedPrompt,
    PromptTemplate,
    TemplateLibrary,
    default_template_library,
    dependency_order,
    generate_prompt_stepwise,
    generate_prompts_holistic,
)

__version__ = "0.1.0"

__all__ = [
    "CaseLibrary",
    "ChatMessage",
    "CompletionRequest",
    "CompletionResult",
    "CurriculumInput",
    "EvaluationReport",
    "Gateway",
    "GeneratedPrompt",
    "KnowledgeGraph",
    "KnowledgeTriple",
    "LessonPlan",
    "MockProvider",
    "OptimizedPrompt",
    "PlanPipeline",
    "PromptTemplate",
    "RUBRIC_DIMENSIONS",
    "StructuredPlan",
    "TemplateLibrary",
    "default_template_library",
    "dependency_order",
    "generate_prompt_stepwise",
    "generate_prompts_holistic",
    "parse_plan",
    "__version__",
]
