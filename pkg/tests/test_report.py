from __future__ import annotations

import pytest

from helpers import fresh_state, make_gateways, snip
from roundtable.errors import EmptyMapError
from roundtable.report import (
    Reference,
    Report,
    Section,
    SectionDraft,
    generate_report,
    renumber_citations,
)


def build_report() -> Report:
    return Report(
        title="Grid storage",
        sections=[
            Section(("Costs",), ["Capital spend dominates [1]."]),
            Section(("Costs", "Operating"), ["Cycling wears cells [2]."]),
        ],
        references=[
            Reference(1, "https://a.example/one", "First source"),
            Reference(2, "https://b.example/two", "Second source"),
        ],
    )


# -- report validation ------------------------------------------------------------

def test_validate_accepts_contiguous_fully_cited_report():
    build_report().validate()


def test_validate_rejects_gapped_reference_indices():
    report = build_report()
    report.references[1] = Reference(3, "https://b.example/two", "Second source")
    with pytest.raises(ValueError, match="contiguous"):
        report.validate()


def test_validate_rejects_citation_of_missing_reference():
    report = build_report()
    report.sections[0].paragraphs[0] = "Capital spend dominates [9]."
    with pytest.raises(ValueError, match="missing reference"):
        report.validate()


def test_validate_rejects_orphan_references():
    report = build_report()
    report.sections[1].paragraphs[0] = "Cycling wears cells [1]."
    with pytest.raises(ValueError, match="orphan"):
        report.validate()


# -- renumbering ---------------------------------------------------------------------

def test_renumber_dedupes_by_url_and_orders_by_first_appearance():
    gw = make_gateways()
    snippets = {
        "s1": snip("s1", "q1", gw.embedder, url="https://a.example/shared"),
        "s2": snip("s2", "q2", gw.embedder, url="https://b.example/own"),
        "s3": snip("s3", "q3", gw.embedder, url="https://a.example/shared"),
    }
    drafts = [
        SectionDraft(("Costs",), ["First [2], then [1], again [2]."], {1: "s2", 2: "s1"}),
        SectionDraft(("Tech",), ["Same source as before [1]."], {1: "s3"}),
    ]
    report = renumber_citations(drafts, snippets, title="T")
    # s1's URL appears first, so it takes global [1]; s3 shares it
    assert report.sections[0].paragraphs == ["First [1], then [2], again [1]."]
    assert report.sections[1].paragraphs == ["Same source as before [1]."]
    assert [(r.index, r.url) for r in report.references] == [
        (1, "https://a.example/shared"),
        (2, "https://b.example/own"),
    ]


def test_renumber_rejects_dangling_local_citation():
    gw = make_gateways()
    snippets = {"s1": snip("s1", "q1", gw.embedder)}
    drafts = [SectionDraft(("A",), ["cites [4]"], {1: "s1"})]
    with pytest.raises(ValueError, match="dangling local citation"):
        renumber_citations(drafts, snippets, title="T")


def test_renumber_allows_uncited_sections():
    gw = make_gateways()
    snippets = {"s1": snip("s1", "q1", gw.embedder)}
    drafts = [
        SectionDraft(("A",), ["cited [1]"], {1: "s1"}),
        SectionDraft(("B",), ["nothing to cite here"], {}),
    ]
    report = renumber_citations(drafts, snippets, title="T")
    assert len(report.references) == 1
    report.validate()


# -- serialization ----------------------------------------------------------------------

def test_to_markdown_levels_follow_heading_depth():
    md = build_report().to_markdown()
    assert md == (
        "# Grid storage\n"
        "\n"
        "## Costs\n"
        "\n"
        "Capital spend dominates [1].\n"
        "\n"
        "### Operating\n"
        "\n"
        "Cycling wears cells [2].\n"
        "\n"
        "## References\n"
        "\n"
        "[1] First source. https://a.example/one\n"
        "[2] Second source. https://b.example/two\n"
    )


def test_to_json_text_is_deterministic():
    report = build_report()
    data = report.to_json()
    assert data["sections"][1] == {
        "heading": "Operating",
        "path": ["Costs", "Operating"],
        "paragraphs": ["Cycling wears cells [2]."],
    }
    assert report.to_json_text() == build_report().to_json_text()


# -- end-to-end generation -----------------------------------------------------------------

def make_populated_state(gw):
    state = fresh_state(topic="Grid storage")
    m = state.mind_map
    costs = m.create_child(m.root, "Costs")
    tech = m.create_child(m.root, "Tech")
    m.attach_snippet(snip("s1", "q1", gw.embedder, url="https://a.example/shared"), costs)
    m.attach_snippet(snip("s2", "q2", gw.embedder, url="https://b.example/own"), costs)
    m.attach_snippet(snip("s3", "q3", gw.embedder, url="https://a.example/shared"), tech)
    return state


def test_generate_report_writes_sections_in_outline_order():
    gw = make_gateways(
        cycles={
            "section_write": [
                "Costs claim [1] and detail [2].",
                "Tech claim [1].",
            ]
        }
    )
    state = make_populated_state(gw)
    report = generate_report(state.mind_map, state, gw)
    assert [s.heading_path for s in report.sections] == [("Costs",), ("Tech",)]
    # the Tech section's snippet shares a URL with the first Costs citation
    assert report.sections[1].paragraphs == ["Tech claim [1]."]
    assert len(report.references) == 2
    report.validate()
    event = state.event_log.events[-1]
    assert event.type == "report_generated"
    assert event.payload["sections"] == 2
    assert event.payload["references"] == 2
    assert event.payload["map_version"] == state.mind_map.mutation_count


def test_generate_report_flags_out_of_range_markers():
    gw = make_gateways(constants={"section_write": "Claim [1], bogus [7]."})
    state = fresh_state(topic="T")
    node = state.mind_map.create_child(state.mind_map.root, "Only")
    state.mind_map.attach_snippet(snip("s1", "q1", gw.embedder), node)
    report = generate_report(state.mind_map, state, gw)
    assert report.sections[0].paragraphs == ["Claim [1], bogus ."]
    warnings = [e.payload for e in state.event_log if e.type == "warning"]
    assert {
        "kind": "grounding_violation",
        "section": ["Only"],
        "stripped_indices": [7],
    } in warnings


def test_generate_report_keeps_uncited_section_with_warning():
    gw = make_gateways(constants={"section_write": "Nothing grounded here."})
    state = fresh_state(topic="T")
    node = state.mind_map.create_child(state.mind_map.root, "Only")
    state.mind_map.attach_snippet(snip("s1", "q1", gw.embedder), node)
    report = generate_report(state.mind_map, state, gw)
    assert report.sections[0].paragraphs == ["Nothing grounded here."]
    assert report.references == []
    warnings = [e.payload for e in state.event_log if e.type == "warning"]
    assert {"kind": "uncited_section", "section": ["Only"]} in warnings


def test_generate_report_splits_paragraphs():
    gw = make_gateways(constants={"section_write": "First para [1].\n\nSecond para [1]."})
    state = fresh_state(topic="T")
    node = state.mind_map.create_child(state.mind_map.root, "Only")
    state.mind_map.attach_snippet(snip("s1", "q1", gw.embedder), node)
    report = generate_report(state.mind_map, state, gw)
    assert report.sections[0].paragraphs == ["First para [1].", "Second para [1]."]


def test_generate_report_requires_nonempty_map():
    gw = make_gateways()
    state = fresh_state(topic="T")
    with pytest.raises(EmptyMapError):
        generate_report(state.mind_map, state, gw)
