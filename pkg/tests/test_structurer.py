import json
import random

import pytest

from planforge.errors import IndexOutOfRange, UnknownSection
from planforge.structurer import (
    FULL_TEXT_SECTION,
    PREAMBLE_SECTION,
    UNASSIGNED_SECTION,
    Row,
    add_row,
    delete_row,
    export_plan,
    parse_plan,
    reset_rows,
)

NINE_ROLES = [
    "Case Background",
    "Learner Analysis",
    "Curriculum Standard Analysis",
    "Instructional Content",
    "Learning Objectives",
    "Learning Assessment Design",
    "Learning Activities and Design Rationale",
    "Theoretical Foundation and Case Design Philosophy",
    "Tools and Resources Selection",
]


# -- parsing ---------------------------------------------------------------------


def test_canonical_fixture_parses_nine_sections_three_rows(canonical_plan_text):
    plan = parse_plan(canonical_plan_text, "plan-000001")
    assert [s.name for s in plan.sections] == NINE_ROLES
    assert len(plan.activity_rows) == 3
    assert plan.warnings == ()
    assert plan.activity_rows[0] == Row(
        "Instructional Content",
        "Where does a puddle go?",
        "Evaporation race with timed sketches",
        "Observation log",
    )


def test_free_text_without_headers_degrades():
    plan = parse_plan("just a paragraph of prose\nwith two lines")
    assert len(plan.sections) == 1
    assert plan.sections[0].name == FULL_TEXT_SECTION
    assert len(plan.warnings) == 1
    assert plan.activity_rows == ()


def test_empty_input_is_total():
    plan = parse_plan("")
    assert plan.sections[0].name == FULL_TEXT_SECTION


def test_header_only_document():
    plan = parse_plan("## One\n## Two\n## Three")
    assert [s.name for s in plan.sections] == ["One", "Two", "Three"]
    assert all(s.body == "" for s in plan.sections)
    assert plan.activity_rows == ()


def test_preamble_text_is_kept_with_warning():
    plan = parse_plan("intro line before headings\n\n## One\nbody")
    assert plan.sections[0].name == PREAMBLE_SECTION
    assert "intro line" in plan.sections[0].body
    assert any("preamble" in w for w in plan.warnings)


def test_duplicate_section_names_renamed():
    plan = parse_plan("## Same\na\n## Same\nb")
    assert [s.name for s in plan.sections] == ["Same", "Same (2)"]
    assert any("duplicate" in w for w in plan.warnings)


def test_row_with_unknown_section_reassigned():
    text = (
        "## Activities\n\n"
        "| Section Name | Driving Questions | Activity | Assessment |\n"
        "| --- | --- | --- | --- |\n"
        "| Nowhere | Q | A | B |\n"
    )
    plan = parse_plan(text)
    assert plan.activity_rows[0].section_name == UNASSIGNED_SECTION
    assert any("Nowhere" in w for w in plan.warnings)


def test_malformed_table_row_stays_in_body():
    text = (
        "## Activities\n\n"
        "| Section Name | Driving Questions | Activity | Assessment |\n"
        "| --- | --- | --- | --- |\n"
        "| only | three | cells |\n"
    )
    plan = parse_plan(text)
    assert plan.activity_rows == ()
    assert "| only | three | cells |" in plan.sections[0].body
    assert any("3 cells" in w for w in plan.warnings)


def test_parse_is_total_on_arbitrary_text():
    rng = random.Random(13)
    alphabet = "ab|#\n- "
    for _ in range(100):
        text = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 300)))
        plan = parse_plan(text)
        names = plan.section_names()
        assert len(set(names)) == len(names)
        for row in plan.activity_rows:
            assert row.section_name in names or row.section_name == UNASSIGNED_SECTION


# -- row edits ---------------------------------------------------------------------


def sample_plan(canonical_text):
    return parse_plan(canonical_text, "plan-000001")


def test_add_then_delete_is_identity(canonical_plan_text):
    plan = sample_plan(canonical_plan_text)
    row = Row("Learning Objectives", "Q?", "New activity", "Checklist")
    for index in (0, 1, len(plan.activity_rows)):
        assert delete_row(add_row(plan, row, index), index) == plan


def test_insert_at_zero_shifts(canonical_plan_text):
    plan = sample_plan(canonical_plan_text)
    row = Row(UNASSIGNED_SECTION, "Q", "A", "B")
    edited = add_row(plan, row, 0)
    assert edited.activity_rows[0] == row
    assert edited.activity_rows[1:] == plan.activity_rows


def test_delete_then_reinsert_restores(canonical_plan_text):
    plan = sample_plan(canonical_plan_text)
    captured = plan.activity_rows[1]
    assert add_row(delete_row(plan, 1), captured, 1) == plan


def test_row_index_bounds(canonical_plan_text):
    plan = sample_plan(canonical_plan_text)
    with pytest.raises(IndexOutOfRange):
        add_row(plan, Row(UNASSIGNED_SECTION, "", "", ""), len(plan.activity_rows) + 1)
    with pytest.raises(IndexOutOfRange):
        add_row(plan, Row(UNASSIGNED_SECTION, "", "", ""), -1)
    with pytest.raises(IndexOutOfRange):
        delete_row(plan, len(plan.activity_rows))
    with pytest.raises(IndexOutOfRange):
        delete_row(plan, -1)


def test_add_row_unknown_section_rejected(canonical_plan_text):
    plan = sample_plan(canonical_plan_text)
    with pytest.raises(UnknownSection):
        add_row(plan, Row("No Such Section", "", "", ""), 0)


def test_delete_last_row_of_single_row_plan():
    text = (
        "## Activities\n\n"
        "| Section Name | Driving Questions | Activity | Assessment |\n"
        "| --- | --- | --- | --- |\n"
        "| (unassigned) | Q | A | B |\n"
    )
    plan = parse_plan(text)
    assert delete_row(plan, 0).activity_rows == ()


def test_reset_semantics(canonical_plan_text):
    plan = sample_plan(canonical_plan_text)
    edited = delete_row(delete_row(plan, 0), 0)
    edited = add_row(edited, Row(UNASSIGNED_SECTION, "Q", "A", "B"), 0)
    assert reset_rows(edited).activity_rows == plan.activity_rows
    assert reset_rows(reset_rows(edited)) == reset_rows(edited)
    assert reset_rows(plan) == plan


def test_random_edit_sequences_preserve_invariants(canonical_plan_text):
    rng = random.Random(4242)
    base = sample_plan(canonical_plan_text)
    names = base.section_names()
    for _ in range(30):
        plan = base
        for _ in range(rng.randint(1, 25)):
            op = rng.choice(["add", "delete", "reset"])
            if op == "add":
                row = Row(rng.choice(list(names) + [UNASSIGNED_SECTION]), "q", "a", "b")
                plan = add_row(plan, row, rng.randint(0, len(plan.activity_rows)))
            elif op == "delete" and plan.activity_rows:
                plan = delete_row(plan, rng.randrange(len(plan.activity_rows)))
            elif op == "reset":
                plan = reset_rows(plan)
        for row in plan.activity_rows:
            assert row.section_name in names or row.section_name == UNASSIGNED_SECTION
        assert reset_rows(plan).activity_rows == base.activity_rows


# -- export -------------------------------------------------------------------------


def test_markdown_round_trip_on_canonical_fixture(canonical_plan_text):
    plan = sample_plan(canonical_plan_text)
    reparsed = parse_plan(export_plan(plan, "markdown").decode("utf-8"), plan.plan_id)
    assert reparsed.sections == plan.sections
    assert reparsed.activity_rows == plan.activity_rows


def test_markdown_round_trip_after_edits(canonical_plan_text):
    plan = sample_plan(canonical_plan_text)
    plan = add_row(plan, Row("Learning Objectives", "Why?", "Inquiry", "Notes"), 1)
    plan = delete_row(plan, 0)
    reparsed = parse_plan(export_plan(plan, "markdown").decode("utf-8"), plan.plan_id)
    assert reparsed.sections == plan.sections
    assert reparsed.activity_rows == plan.activity_rows


def test_json_export_schema(canonical_plan_text):
    plan = sample_plan(canonical_plan_text)
    data = json.loads(export_plan(plan, "json"))
    assert set(data) == {"plan_id", "sections", "activity_rows", "warnings"}
    assert len(data["activity_rows"]) == 3
    assert data["sections"][0]["name"] == "Case Background"


def test_export_empty_plan_valid():
    plan = parse_plan("## Empty\n")
    plan = delete_row(plan, 0) if plan.activity_rows else plan
    markdown = export_plan(plan, "markdown").decode("utf-8")
    assert markdown.startswith("## Empty")
    data = json.loads(export_plan(plan, "json"))
    assert data["activity_rows"] == []


def test_export_unknown_format_rejected(canonical_plan_text):
    with pytest.raises(ValueError):
        export_plan(sample_plan(canonical_plan_text), "docx")
