"""Generation spine: prompt optimization, plan generation, and rubric evaluation.

The optimizer sends the prompt through the gateway with a fixed system-role
guidance text, keeps the model rewrite, and lets callers stack manual edits on
top (full history retained). Plan generation wraps the final prompt with the
canonical output-format directive so the structurer can parse the result.
Evaluation scores eleven fixed dimensions, each as an independent model call
that must answer in SCORE:/REASON: lines.
"""

from __future__ import annotations

import datetime as _dt
import re
import threading
from dataclasses import dataclass, replace
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources

from .errors import (
    GenerationFailed,
    MalformedScore,
    OptimizationFailed,
    UnknownPlanError,
)
from .gateway import CompletionRequest, Gateway, system, user
from .hashing import fnv1a_64, hex64

STAGE_LLM = "llm"
STAGE_MANUAL = "manual"

_SCORE_RE = re.compile(r"SCORE:\s*(-?\d+)")
_REASON_RE = re.compile(r"REASON:\s*(.+)")

_REASK_SUFFIX = (
    "\n\nYour previous reply could not be parsed. Respond with exactly two lines:\n"
    "SCORE: <integer 1 to 5>\nREASON: <your justification>"
)

_PLANNER_ROLE = "You are an expert interdisciplinary lesson planner."
_EVALUATOR_ROLE = "You are a strict, fair reviewer of interdisciplinary lesson plans."


@dataclass(frozen=True)
class RubricDimension:
    key: str
    label: str


RUBRIC_DIMENSIONS: tuple[RubricDimension, ...] = (
    RubricDimension("rationality", "Rationality"),
    RubricDimension("comprehensiveness", "Comprehensiveness"),
    RubricDimension("interdisciplinarity", "Interdisciplinarity"),
    RubricDimension("authenticity", "Authenticity"),
    RubricDimension("scientific_rigor", "Scientific rigor"),
    RubricDimension("activity_challenge", "Activity challenge"),
    RubricDimension("organizational_effectiveness", "Organizational effectiveness"),
    RubricDimension("appropriateness_of_support", "Appropriateness of support"),
    RubricDimension("comprehensiveness_of_outcomes", "Comprehensiveness of outcomes"),
    RubricDimension("overall_completeness", "Overall completeness"),
    RubricDimension("consistency", "Consistency"),
)

DIMENSION_KEYS: tuple[str, ...] = tuple(d.key for d in RUBRIC_DIMENSIONS)


@dataclass(frozen=True)
class OptimizedPrompt:
    original: str
    llm_optimized: str
    manual_final: str
    history: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if not self.history:
            raise ValueError("history must hold at least one stage")
        if self.history[-1][1] != self.manual_final:
            raise ValueError("manual_final must equal the last history entry")

    def to_dict(self) -> dict:
        return {
            "original": self.original,
            "llm_optimized": self.llm_optimized,
            "manual_final": self.manual_final,
            "history": [[stage, text] for stage, text in self.history],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "OptimizedPrompt":
        return cls(
            original=data["original"],
            llm_optimized=data["llm_optimized"],
            manual_final=data["manual_final"],
            history=tuple((stage, text) for stage, text in data["history"]),
        )


@dataclass(frozen=True)
class LessonPlan:
    id: str
    prompt_fingerprint: str
    text: str
    created_at: str

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "prompt_fingerprint": self.prompt_fingerprint,
            "text": self.text,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LessonPlan":
        return cls(
            id=data["id"],
            prompt_fingerprint=data["prompt_fingerprint"],
            text=data["text"],
            created_at=data["created_at"],
        )


@dataclass(frozen=True)
class EvaluationReport:
    plan_id: str
    entries: tuple[tuple[str, int, str], ...]  # (dimension key, score, justification)
    overall: float

    def __post_init__(self):
        keys = tuple(key for key, _, _ in self.entries)
        if keys != DIMENSION_KEYS:
            raise ValueError("report must cover exactly the eleven dimensions, in order")
        for key, score, justification in self.entries:
            if not 1 <= score <= 5:
                raise ValueError(f"score for {key} out of range")
            if not justification.strip():
                raise ValueError(f"justification for {key} is empty")

    def to_dict(self) -> dict:
        return {
            "plan_id": self.plan_id,
            "overall": self.overall,
            "entries": {
                key: {"score": score, "justification": justification}
                for key, score, justification in self.entries
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvaluationReport":
        entries = tuple(
            (key, data["entries"][key]["score"], data["entries"][key]["justification"])
            for key in DIMENSION_KEYS
        )
        return cls(plan_id=data["plan_id"], entries=entries, overall=data["overall"])


def compute_overall(scores: list[int]) -> float:
    """Arithmetic mean of the scores, rounded half-up to two decimals."""
    mean = Decimal(sum(scores)) / Decimal(len(scores))
    return float(mean.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


class InMemoryPlanStore:
    """Default plan store; the service layer swaps in a file-backed one."""

    def __init__(self):
        self._plans: dict[str, LessonPlan] = {}
        self._lock = threading.Lock()

    def next_id(self) -> str:
        with self._lock:
            return f"plan-{len(self._plans) + 1:06d}"

    def save(self, plan: LessonPlan) -> None:
        with self._lock:
            self._plans[plan.id] = plan

    def get(self, plan_id: str) -> LessonPlan:
        try:
            return self._plans[plan_id]
        except KeyError:
            raise UnknownPlanError(plan_id) from None


def _load_data_text(name: str) -> str:
    return resources.files("planforge.data").joinpath(name).read_text("utf-8").strip()


def apply_manual_edit(prompt: OptimizedPrompt, edited_text: str) -> OptimizedPrompt:
    """Append one manual refinement stage; last write wins."""
    if not edited_text:
        raise ValueError("edited_text must be non-empty")
    return replace(
        prompt,
        manual_final=edited_text,
        history=prompt.history + ((STAGE_MANUAL, edited_text),),
    )


class PlanPipeline:
    def __init__(
        self,
        gateway: Gateway,
        store=None,
        optimizer_guidance: str | None = None,
        format_directive: str | None = None,
        rubric_template: str | None = None,
    ):
        self.gateway = gateway
        self.store = store if store is not None else InMemoryPlanStore()
        self.optimizer_guidance = optimizer_guidance or _load_data_text("optimizer_guidance.txt")
        self.format_directive = format_directive or _load_data_text("plan_format.txt")
        self.rubric_template = rubric_template or _load_data_text("rubric_prompt.txt")

    # -- optimization (two-stage: model rewrite, then manual edits) -----------

    def optimize_prompt(self, prompt: str, model_id: str, seed: int) -> OptimizedPrompt:
        if not prompt:
            raise ValueError("prompt must be non-empty")
        request = CompletionRequest(
            messages=(system(self.optimizer_guidance), user(prompt)),
            seed=seed,
            stream=True,
            model_id=model_id,
        )
        result = self.gateway.complete(request)
        if not result.text.strip():
            raise OptimizationFailed("model returned empty optimization")
        return OptimizedPrompt(
            original=prompt,
            llm_optimized=result.text,
            manual_final=result.text,
            history=((STAGE_LLM, result.text),),
        )

    # -- plan generation -------------------------------------------------------

    def plan_request_text(self, prompt_text: str) -> str:
        return f"{self.format_directive}\n\n{prompt_text}"

    def generate_plan_from_text(self, prompt_text: str, model_id: str, seed: int) -> LessonPlan:
        if not prompt_text:
            raise ValueError("prompt text must be non-empty")
        request = CompletionRequest(
            messages=(system(_PLANNER_ROLE), user(self.plan_request_text(prompt_text))),
            seed=seed,
            stream=True,
            model_id=model_id,
        )
        result = self.gateway.complete(request)
        if not result.text.strip():
            raise GenerationFailed("model returned empty plan")
        plan = LessonPlan(
            id=self.store.next_id(),
            prompt_fingerprint=hex64(fnv1a_64(prompt_text)),
            text=result.text,
            created_at=_dt.datetime.now(_dt.timezone.utc).isoformat(),
        )
        self.store.save(plan)
        return plan

    def generate_plan(self, optimized: OptimizedPrompt, model_id: str, seed: int) -> LessonPlan:
        if not optimized.manual_final:
            raise ValueError("optimized prompt has empty final text")
        return self.generate_plan_from_text(optimized.manual_final, model_id, seed)

    # -- rubric evaluation ------------------------------------------------------

    def _rubric_query(self, plan: LessonPlan, dimension: RubricDimension) -> str:
        query = self.rubric_template
        query = query.replace("{label}", dimension.label)
        query = query.replace("{key}", dimension.key)
        query = query.replace("{plan_text}", plan.text)
        return query

    @staticmethod
    def _parse_score_reply(text: str) -> tuple[int, str] | str:
        """Return (score, justification) or a human-readable parse failure."""
        score_match = _SCORE_RE.search(text)
        if score_match is None:
            return "no SCORE line"
        score = int(score_match.group(1))
        if not 1 <= score <= 5:
            return f"score {score} out of range 1..5"
        reason_match = _REASON_RE.search(text)
        if reason_match is None or not reason_match.group(1).strip():
            return "no REASON line"
        return score, reason_match.group(1).strip()

    def score_dimension(
        self, plan: LessonPlan, dimension: RubricDimension, model_id: str, seed: int
    ) -> tuple[int, str]:
        if not plan.text:
            raise ValueError("plan text must be non-empty")
        query = self._rubric_query(plan, dimension)
        attempts = (query, query + _REASK_SUFFIX)  # one automatic re-ask, then fail
        detail = ""
        for attempt in attempts:
            request = CompletionRequest(
                messages=(system(_EVALUATOR_ROLE), user(attempt)),
                seed=seed,
                stream=False,
                model_id=model_id,
            )
            result = self.gateway.complete(request)
            parsed = self._parse_score_reply(result.text)
            if isinstance(parsed, tuple):
                return parsed
            detail = parsed
        raise MalformedScore(dimension.key, detail)

    def evaluate_plan(self, plan: LessonPlan, model_id: str, seed: int) -> EvaluationReport:
        """Score all eleven dimensions; any malformed dimension aborts the report."""
        entries = []
        for index, dimension in enumerate(RUBRIC_DIMENSIONS):
            # Seed offset decorrelates the per-dimension mock hashes.
            score, justification = self.score_dimension(plan, dimension, model_id, seed + index)
            entries.append((dimension.key, score, justification))
        overall = compute_overall([score for _, score, _ in entries])
        return EvaluationReport(plan_id=plan.id, entries=tuple(entries), overall=overall)
