"""Prompt registry tests. Several assertions pin exact template bytes,
including the two quirks ("eventss'" and "Contral Context") that downstream
consumers key on; do not "fix" them."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from memscrub.errors import MissingNeighbor, UnrecognizedPrompt
from memscrub.prompts import (
    EVENT_TEMPLATE,
    EXTRACTION_TEMPLATE,
    HOP0_TEMPLATE,
    NEIGHBOR_TEMPLATE,
    QA_TEMPLATE,
    ParsedPrompt,
    PromptKind,
    parse_prompt,
    render_event_prompt,
    render_extraction_prompt,
    render_prompt,
    render_qa_prompt,
)


class TestTemplateBytes:
    def test_hop0_exact(self):
        assert HOP0_TEMPLATE == (
            "Recall information from your own internal knowledge.\n"
            "Target: {target}\n"
            "Write 5-10 atomic statements about {target}."
        )

    def test_neighbor_exact(self):
        assert NEIGHBOR_TEMPLATE == (
            "Recall information from your own internal knowledge.\n"
            "Target: {target}\n"
            "Neighbor: {neighbor}\n"
            "Write 5-10 SHORT atomic statements specifically about how "
            "{neighbor} relates to {target}."
        )

    def test_event_template_quirks_preserved(self):
        assert "BOTH eventss' names" in EVENT_TEMPLATE
        assert EVENT_TEMPLATE.endswith(
            "Anchor Target: {target}\nEvent 1: {event_1}\nEvent 2: {event_2}"
        )
        assert EVENT_TEMPLATE.count("\n") == 7

    def test_qa_template_quirks_preserved(self):
        assert "about Contral Context." in QA_TEMPLATE
        assert "Central Context (Obj): {obj}" in QA_TEMPLATE
        assert QA_TEMPLATE.endswith("Statement: {event}")
        assert QA_TEMPLATE.count("\n") == 6


class TestRender:
    def test_hop0(self):
        text = render_prompt(PromptKind.HOP0, "Taylor Swift")
        assert text == (
            "Recall information from your own internal knowledge.\n"
            "Target: Taylor Swift\n"
            "Write 5-10 atomic statements about Taylor Swift."
        )

    def test_neighbor(self):
        text = render_prompt(PromptKind.NEIGHBOR_HOP, "Taylor Swift", neighbor="Blank Space")
        assert "Neighbor: Blank Space\n" in text
        assert text.endswith(
            "Write 5-10 SHORT atomic statements specifically about how "
            "Blank Space relates to Taylor Swift."
        )

    def test_neighbor_requires_neighbor(self):
        with pytest.raises(MissingNeighbor):
            render_prompt(PromptKind.NEIGHBOR_HOP, "Taylor Swift")

    def test_description_line_inserted_after_target(self):
        text = render_prompt(PromptKind.HOP0, "Mercury", description="the planet")
        assert "Target: Mercury\nDescription: the planet\nWrite 5-10" in text

    def test_synthesis_kinds_rejected(self):
        with pytest.raises(ValueError):
            render_prompt(PromptKind.EVENT_SYNTHESIS, "x")

    def test_event_prompt(self):
        text = render_event_prompt("T", "E1", "E2")
        assert text.endswith("Anchor Target: T\nEvent 1: E1\nEvent 2: E2")

    def test_qa_prompt(self):
        text = render_qa_prompt("T", "O", "S happened.")
        assert text.endswith(
            "Target Entity: T\nCentral Context (Obj): O\nStatement: S happened."
        )

    def test_extraction_prompt(self):
        text = render_extraction_prompt("some text")
        assert text.endswith("Text: some text")


_NAME = st.text(
    st.characters(categories=("Lu", "Ll"), include_characters=" "),
    min_size=1,
    max_size=20,
).filter(lambda s: s == " ".join(s.split()) and s.strip())


class TestParse:
    def test_round_trip_hop0(self):
        parsed = parse_prompt(render_prompt(PromptKind.HOP0, "Taylor Swift"))
        assert parsed == ParsedPrompt(PromptKind.HOP0, {"target": "Taylor Swift"})

    def test_round_trip_neighbor(self):
        parsed = parse_prompt(
            render_prompt(PromptKind.NEIGHBOR_HOP, "Taylor Swift", neighbor="Blank Space")
        )
        assert parsed.kind == PromptKind.NEIGHBOR_HOP
        assert parsed.fields == {"target": "Taylor Swift", "neighbor": "Blank Space"}

    def test_round_trip_with_description(self):
        parsed = parse_prompt(
            render_prompt(PromptKind.NEIGHBOR_HOP, "Mercury", neighbor="Apollo",
                          description="the planet")
        )
        assert parsed.fields["description"] == "the planet"
        assert parsed.fields["target"] == "Mercury"

    def test_round_trip_event(self):
        parsed = parse_prompt(render_event_prompt("T", "E one.", "E two."))
        assert parsed.kind == PromptKind.EVENT_SYNTHESIS
        assert parsed.fields == {"target": "T", "event_1": "E one.", "event_2": "E two."}

    def test_round_trip_qa(self):
        parsed = parse_prompt(render_qa_prompt("T", "O", "S."))
        assert parsed.kind == PromptKind.QA_SYNTHESIS
        assert parsed.fields == {"target": "T", "obj": "O", "event": "S."}

    def test_extraction_prompt_is_not_recognized(self):
        with pytest.raises(UnrecognizedPrompt):
            parse_prompt(render_extraction_prompt("whatever"))

    def test_free_text_is_not_recognized(self):
        with pytest.raises(UnrecognizedPrompt):
            parse_prompt("Tell me everything about Taylor Swift.")

    @given(_NAME, _NAME)
    def test_round_trip_any_names(self, target, neighbor):
        parsed = parse_prompt(render_prompt(PromptKind.HOP0, target))
        assert parsed.fields["target"] == target
        parsed = parse_prompt(
            render_prompt(PromptKind.NEIGHBOR_HOP, target, neighbor=neighbor)
        )
        assert parsed.fields == {"target": target, "neighbor": neighbor}
