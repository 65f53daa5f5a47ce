"""Elicitation and mining loop tests."""

from __future__ import annotations

import pytest

from memscrub.elicit import (
    ElicitationRecord,
    expand_graph,
    extract_entities,
    max_product_weight,
    merge_expansions,
    strength,
    _expansion_from_record,
)
from memscrub.errors import ResponderFailure, UnrecognizedPrompt
from memscrub.graph import MiningConfig, serialize_graph, validate_graph
from memscrub.oracle import OracleResponder
from memscrub.prompts import PromptKind

from conftest import make_graph, make_world_12


class TestHeuristicExtraction:
    def test_capitalized_runs_and_year(self):
        ext = extract_entities("Taylor Swift released Blank Space in 2014.", fallback=True)
        assert ext.ids() == {"taylor swift", "blank space", "2014"}
        assert ext.surfaces["taylor swift"] == {"Taylor Swift"}

    def test_sentence_boundary_closes_run(self):
        ext = extract_entities("Alice met Bob. Carol left early.", fallback=True)
        assert ext.ids() == {"alice", "bob", "carol"}

    def test_repeat_mentions_counted(self):
        ext = extract_entities("Bob saw Bob again.", fallback=True)
        assert ext.counts["bob"] == 2

    def test_lowercase_text_yields_nothing(self):
        assert extract_entities("nothing comes to mind.", fallback=True).ids() == set()

    def test_exclusions_applied_after_normalization(self):
        ext = extract_entities(
            "Taylor Swift released Blank Space.",
            fallback=True,
            exclude=frozenset({"taylor swift"}),
        )
        assert ext.ids() == {"blank space"}

    def test_empty_response(self):
        assert extract_entities("   ", fallback=True).ids() == set()

    def test_four_digit_year_only(self):
        ext = extract_entities("it happened around 1989, not 89 or 12345.", fallback=True)
        assert ext.ids() == {"1989"}


class _ListingResponder:
    """Returns a fixed entity list for extraction prompts."""

    def __init__(self, lines):
        self.lines = lines
        self.calls = 0

    def complete(self, prompt, sample_index):
        self.calls += 1
        return "\n".join(self.lines)


class _RefusingResponder:
    def complete(self, prompt, sample_index):
        raise UnrecognizedPrompt("nope")


def test_responder_extraction_path():
    responder = _ListingResponder(["Alpha One", "Beta Two"])
    ext = extract_entities("whatever text", responder=responder)
    assert ext.ids() == {"alpha one", "beta two"}
    assert responder.calls == 1


def test_extraction_falls_back_when_responder_refuses():
    ext = extract_entities("Gamma Ray struck.", responder=_RefusingResponder())
    assert ext.ids() == {"gamma ray"}


def _record(extractions, counts=None):
    return ElicitationRecord(
        anchor="hub",
        secondary_anchor=None,
        prompt_kind=PromptKind.HOP0,
        responses=["x"] * len(extractions),
        extractions=extractions,
        extraction_counts=counts or {},
        surface_forms={},
    )


class TestStrength:
    def test_fraction_of_responses(self):
        rec = _record([{"a"}, {"a", "b"}, set()])
        assert strength(rec, "a") == 2 / 3
        assert strength(rec, "b") == 1 / 3
        assert strength(rec, "c") == 0.0

    def test_empty_record_rejected(self):
        with pytest.raises(ValueError):
            strength(_record([]), "a")

    def test_retention_is_inclusive_at_tau(self):
        # 2 of 10 mentions at tau=0.2 sits exactly on the threshold
        rec = _record([{"a"}] * 2 + [set()] * 8, counts={"a": 2})
        exp = _expansion_from_record(rec, 0, MiningConfig(tau=0.2))
        assert exp.candidates["a"].retained
        exp = _expansion_from_record(rec, 0, MiningConfig(tau=0.21))
        assert not exp.candidates["a"].retained


class TestMergeExpansions:
    def test_order_independent(self):
        def build(order):
            g = make_graph("hub", {})
            recs = [
                _record([{"a"}] * 3, counts={"a": 3, "b": 1}),
                _record([{"b"}] * 3, counts={"b": 3}),
            ]
            recs[0].extraction_counts = {"a": 3, "b": 1}
            recs[0].extractions = [{"a", "b"}, {"a"}, {"a"}]
            recs[1].anchor = "other"
            exps = [_expansion_from_record(r, 0, MiningConfig(tau=0.2, k=2)) for r in recs]
            # "other" must exist for its edges to be recorded
            g.nodes["other"] = g.nodes["hub"]
            merge_expansions(g, list(order(exps)))
            return {k: (e.count, e.weight) for k, e in g.edges.items()}

        assert build(lambda e: e) == build(reversed)

    def test_weight_uses_full_denominator(self):
        g = make_graph("hub", {})
        rec = _record([{"a"}] * 10, counts={"a": 10, "junk": 10})
        rec.extractions = [{"a", "junk"} if i < 1 else {"a"} for i in range(10)]
        exp = _expansion_from_record(rec, 0, MiningConfig(tau=0.2))
        assert not exp.candidates["junk"].retained
        merge_expansions(g, [exp])
        # junk was extracted but not retained: no node, no edge, but it still
        # contributes to the denominator
        assert "junk" not in g.nodes
        assert g.edges[("hub", "a")].weight == 0.5


def test_max_product_weight_chain():
    g = make_graph("hub", {("hub", "a"): 1, ("hub", "b"): 1, ("a", "c"): 1})
    g.edges[("hub", "a")].__dict__  # frozen dataclass; weights already 0.5
    assert max_product_weight(g, "hub") == 1.0
    assert max_product_weight(g, "a") == 0.5
    assert max_product_weight(g, "c") == 0.5 * 1.0
    assert max_product_weight(g, "ghost") == 0.0


class TestExpandGraph:
    def test_mines_expected_structure(self, world_12, rich_config):
        graph = expand_graph(rich_config, "Aster Vale", None, OracleResponder(world_12))
        validate_graph(graph)
        assert len(graph.nodes) == 12
        hop1 = {n.id for n in graph.nodes.values() if n.hop == 1}
        assert hop1 == {"eldin marsh", "quartz bay", "coral synth", "nimbus forge"}
        assert len(graph.edges) == 12
        # every deterministic-recall strength is exactly 1.0
        assert all(n.strength == 1.0 for n in graph.nodes.values())
        # cross edge between hop-1 nodes was recorded
        assert ("eldin marsh", "quartz bay") in graph.edges

    def test_budget_accounting(self, world_12, rich_config):
        graph = expand_graph(rich_config, "Aster Vale", None, OracleResponder(world_12))
        b = graph.budget
        assert b.iterations == 5  # target + four hop-1 anchors
        assert b.queries_per_iteration == rich_config.n
        assert b.queries_issued == b.iterations * rich_config.n
        assert not b.truncated

    def test_truncation_flagged(self, world_12):
        cfg = MiningConfig(n=10, tau=0.2, k=2, max_iterations=1, seed=0)
        graph = expand_graph(cfg, "Aster Vale", None, OracleResponder(world_12))
        assert graph.budget.truncated
        assert graph.budget.iterations == 1
        assert graph.budget.queries_issued == 10
        # hop-1 nodes exist but were never expanded
        assert all(n.hop <= 1 for n in graph.nodes.values())

    def test_tau_monotonicity(self, world_12):
        responder = OracleResponder(world_12)
        lo = expand_graph(MiningConfig(tau=0.2, k=2), "Aster Vale", None, responder)
        hi = expand_graph(MiningConfig(tau=0.9, k=2), "Aster Vale", None, responder)
        assert set(hi.nodes) <= set(lo.nodes)

    def test_k_limits_depth(self, world_12):
        responder = OracleResponder(world_12)
        g1 = expand_graph(MiningConfig(k=1), "Aster Vale", None, responder)
        assert {n.hop for n in g1.nodes.values()} == {0, 1}
        assert len(g1.nodes) == 5

    def test_deterministic_across_runs_and_parallelism(self, world_12, rich_config):
        runs = [
            serialize_graph(
                expand_graph(
                    rich_config, "Aster Vale", None, OracleResponder(world_12), parallelism=p
                )
            )
            for p in (1, 4)
        ]
        assert runs[0] == runs[1]

    def test_record_sink_collects_all_anchors(self, world_12, rich_config):
        sink = []
        expand_graph(rich_config, "Aster Vale", None, OracleResponder(world_12),
                     record_sink=sink)
        assert len(sink) == 5
        assert sink[0].prompt_kind == PromptKind.HOP0
        assert all(r.prompt_kind == PromptKind.NEIGHBOR_HOP for r in sink[1:])
        assert all(len(r.responses) == rich_config.n for r in sink)

    def test_adaptive_stop_skips_weak_anchors(self, world_12):
        cfg = MiningConfig(n=10, tau=0.2, k=2, adaptive_stop_threshold=0.9, seed=0)
        graph = expand_graph(cfg, "Aster Vale", None, OracleResponder(world_12))
        # all hop-1 back-connections carry weight 0.25 < 0.9: nothing expands
        assert graph.budget.iterations == 1
        assert all(n.hop <= 1 for n in graph.nodes.values())
        assert not graph.budget.truncated

    def test_anchor_and_target_never_become_candidates(self, world_12, rich_config):
        graph = expand_graph(rich_config, "Aster Vale", None, OracleResponder(world_12))
        assert all((src, src) not in graph.edges for src in graph.nodes)
        assert all(dst != "aster vale" for (_, dst) in graph.edges)

    def test_empty_target_rejected(self, world_12, rich_config):
        with pytest.raises(ValueError):
            expand_graph(rich_config, "  ", None, OracleResponder(world_12))

    def test_responder_failure_carries_anchor_context(self, rich_config):
        class Boom:
            def complete(self, prompt, sample_index):
                raise ResponderFailure("connection reset")

        with pytest.raises(ResponderFailure, match="aster vale.*sample"):
            expand_graph(rich_config, "Aster Vale", None, Boom(), parallelism=1)


def test_description_threaded_into_prompts(world_12, rich_config):
    seen = []
    responder = OracleResponder(world_12)

    class Spy:
        def complete(self, prompt, sample_index):
            seen.append(prompt)
            return responder.complete(prompt, sample_index)

    expand_graph(rich_config, "Aster Vale", "a botanist", Spy())
    elicits = [p for p in seen if p.startswith("Recall information")]
    assert elicits and all("\nDescription: a botanist\n" in p for p in elicits)
