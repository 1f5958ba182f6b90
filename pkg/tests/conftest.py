import json
from pathlib import Path

import pytest

from planforge.gateway import Gateway, MockProvider
from planforge.pipeline import DIMENSION_KEYS
from planforge.templates import CurriculumInput

FIXTURES_DIR = Path(__file__).parent / "fixtures"

CANONICAL_PLAN = (FIXTURES_DIR / "canonical_plan.md").read_text(encoding="utf-8")


def pipeline_fixtures(scores: dict[str, int] | None = None) -> list[dict]:
    """Fixture set driving the whole mock pipeline.

    The plan fixture answers any request that carries the format directive; its
    response starts with a newline so the MOCK[] prefix stays off the first
    heading line. Scoring fixtures match the dimension key in parentheses as it
    appears in the rubric query.
    """
    scores = scores or {}
    fixtures = [
        {
            "match": "Write the complete interdisciplinary lesson plan",
            "response": "\n" + CANONICAL_PLAN,
        }
    ]
    for i, key in enumerate(DIMENSION_KEYS):
        score = scores.get(key, 3 + (i % 3))
        fixtures.append(
            {"match": f"({key})", "response": f"SCORE: {score}\nREASON: judged {key}"}
        )
    fixtures.append(
        {
            "match": "extract knowledge triplets",
            "response": (
                "(Water Cycle | connects | Geography)\n"
                "(Evaporation | is part of | Water Cycle)\n"
                "(Observational Drawing | belongs to | Art)"
            ),
        }
    )
    return fixtures


def make_mock_gateway(fixtures: list[dict] | None = None) -> tuple[Gateway, MockProvider]:
    gateway = Gateway()
    mock = MockProvider()
    for fixture in fixtures or []:
        mock.add_fixture(fixture["match"], fixture["response"])
    gateway.register_provider("mock", mock)
    return gateway, mock


def write_fixture_file(path: Path, fixtures: list[dict] | None = None) -> Path:
    path.write_text(
        json.dumps(fixtures if fixtures is not None else pipeline_fixtures(), ensure_ascii=False),
        encoding="utf-8",
    )
    return path


def sample_curriculum() -> CurriculumInput:
    return CurriculumInput(
        unit_theme="Water Cycle",
        grade_level="Grade 5",
        primary_subject="Science",
        supporting_subjects=("Geography", "Art"),
        class_hours=6,
    )


@pytest.fixture
def mock_gateway():
    return make_mock_gateway()


@pytest.fixture
def pipeline_gateway():
    return make_mock_gateway(pipeline_fixtures())


@pytest.fixture
def curriculum():
    return sample_curriculum()


@pytest.fixture
def canonical_plan_text():
    return CANONICAL_PLAN
