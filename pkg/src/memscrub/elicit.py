"""Elicitation and graph mining: responder contract, entity extraction,
mention-frequency scoring, and iterative target-conditioned expansion.

The hop merge is factored into ``merge_expansions`` so the analytic expected
graph (oracle module) and the empirical miner share one assembly code path;
any drift between the two would otherwise be invisible until fidelity tests
catch it at a distance.
"""

from __future__ import annotations

import logging
import re
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Protocol

from memscrub.errors import ResponderFailure, UnrecognizedPrompt
from memscrub.graph import (
    BudgetReport,
    EntityId,
    MemoryEdge,
    MemoryGraph,
    MemoryNode,
    MiningConfig,
    normalize_mention,
)
from memscrub.prompts import PromptKind, render_extraction_prompt, render_prompt

log = logging.getLogger(__name__)


class Responder(Protocol):
    """Anything that can answer a prompt; sample_index distinguishes the
    N independent draws for one prompt."""

    def complete(self, prompt: str, sample_index: int) -> str: ...


@dataclass
class Extraction:
    """Entities pulled out of one response: occurrence counts plus the raw
    surface strings that produced each normalized id."""

    counts: dict[EntityId, int] = field(default_factory=dict)
    surfaces: dict[EntityId, set[str]] = field(default_factory=dict)

    def add(self, surface: str, times: int = 1) -> None:
        try:
            key = normalize_mention(surface)
        except Exception:
            return
        self.counts[key] = self.counts.get(key, 0) + times
        self.surfaces.setdefault(key, set()).add(surface)

    def ids(self) -> set[EntityId]:
        return set(self.counts)


_YEAR = re.compile(r"\d{4}")


def _heuristic_spans(text: str) -> list[str]:
    """Maximal runs of capitalized tokens, plus standalone 4-digit years.

    A trailing punctuation mark on a token closes the current run, so runs
    never leak across sentence boundaries.
    """
    spans: list[str] = []
    run: list[str] = []
    for token in text.split():
        core = token.strip(string.punctuation)
        if core and core[0].isupper():
            run.append(core)
            if token[-1] in string.punctuation:
                spans.append(" ".join(run))
                run = []
        else:
            if run:
                spans.append(" ".join(run))
                run = []
            if core and _YEAR.fullmatch(core):
                spans.append(core)
    if run:
        spans.append(" ".join(run))
    return spans


def extract_entities(
    response: str,
    responder: Responder | None = None,
    fallback: bool = False,
    exclude: frozenset[EntityId] = frozenset(),
) -> Extraction:
    """Pull entity mentions out of one response.

    The primary path asks the responder for a line-delimited entity list;
    the heuristic path (``fallback=True``, no responder, or a failed
    extraction prompt) detects capitalized spans and years. Ids in
    ``exclude`` are dropped after normalization.
    """
    extraction = Extraction()
    if not response.strip():
        return extraction
    lines: list[str] | None = None
    if responder is not None and not fallback:
        try:
            listed = responder.complete(render_extraction_prompt(response), 0)
            lines = [line.strip() for line in listed.splitlines() if line.strip()]
        except (UnrecognizedPrompt, ResponderFailure):
            lines = None
    if lines is None:
        lines = _heuristic_spans(response)
    for surface in lines:
        extraction.add(surface)
    for key in exclude:
        extraction.counts.pop(key, None)
        extraction.surfaces.pop(key, None)
    return extraction


@dataclass
class ElicitationRecord:
    """One anchor's N elicitations with per-response extraction sets."""

    anchor: EntityId
    secondary_anchor: EntityId | None
    prompt_kind: PromptKind
    responses: list[str]
    extractions: list[set[EntityId]]
    extraction_counts: dict[EntityId, int]
    surface_forms: dict[EntityId, set[str]] = field(default_factory=dict)


def strength(record: ElicitationRecord, candidate: EntityId) -> float:
    """Mention frequency: fraction of responses whose extraction set holds
    the candidate."""
    n = len(record.responses)
    if n < 1:
        raise ValueError("record has no responses")
    return sum(candidate in hits for hits in record.extractions) / n


@dataclass
class CandidateStat:
    strength: float
    count: int
    retained: bool
    surfaces: set[str]


@dataclass
class AnchorExpansion:
    """Everything one anchor's elicitation round contributes to the graph."""

    anchor: EntityId
    hop: int
    candidates: dict[EntityId, CandidateStat]
    denominator: int


def merge_expansions(
    graph: MemoryGraph, expansions: list[AnchorExpansion]
) -> list[EntityId]:
    """Fold one hop's expansions into the graph; returns newly added ids.

    Two passes, each in sorted anchor order, so the result is independent of
    completion timing: first retained candidates become nodes, then every
    anchor records edges to whatever is now a graph node. Edge weight is the
    candidate's count over the anchor's full extraction total (retained or
    not), so stored outgoing weights may sum below 1.
    """
    new_ids: list[EntityId] = []
    for exp in sorted(expansions, key=lambda e: e.anchor):
        for cid in sorted(exp.candidates):
            stat = exp.candidates[cid]
            if stat.retained and cid not in graph.nodes:
                graph.nodes[cid] = MemoryNode(
                    id=cid,
                    surface_forms=frozenset(stat.surfaces),
                    strength=stat.strength,
                    hop=exp.hop + 1,
                    discovered_from=exp.anchor,
                )
                new_ids.append(cid)
    for exp in sorted(expansions, key=lambda e: e.anchor):
        if exp.denominator <= 0:
            continue
        for cid in sorted(exp.candidates):
            stat = exp.candidates[cid]
            if cid not in graph.nodes:
                continue
            graph.edges[(exp.anchor, cid)] = MemoryEdge(
                src=exp.anchor,
                dst=cid,
                count=stat.count,
                weight=stat.count / exp.denominator,
            )
            node = graph.nodes[cid]
            extra = stat.surfaces - set(node.surface_forms)
            if extra:
                graph.nodes[cid] = replace(
                    node, surface_forms=node.surface_forms | frozenset(extra)
                )
    return new_ids


def max_product_weight(graph: MemoryGraph, node: EntityId) -> float:
    """Best (max-product) edge-weight path from the target to ``node``.

    Used by the optional adaptive stop: anchors whose back-connection to the
    target is weaker than the threshold are not expanded.
    """
    best: dict[EntityId, float] = {graph.target: 1.0}
    frontier = {graph.target}
    while frontier:
        nxt: set[EntityId] = set()
        for u in frontier:
            for (src, dst), edge in graph.edges.items():
                if src != u:
                    continue
                score = best[u] * edge.weight
                if score > best.get(dst, 0.0):
                    best[dst] = score
                    nxt.add(dst)
        frontier = nxt
    return best.get(node, 0.0)


def _elicit_anchor(
    config: MiningConfig,
    target_raw: str,
    target_id: EntityId,
    anchor_id: EntityId,
    anchor_display: str,
    description: str | None,
    responder: Responder,
    parallelism: int,
) -> ElicitationRecord:
    if anchor_id == target_id:
        kind = PromptKind.HOP0
        prompt = render_prompt(kind, target_raw, description=description)
        secondary = None
    else:
        kind = PromptKind.NEIGHBOR_HOP
        prompt = render_prompt(kind, target_raw, neighbor=anchor_display, description=description)
        secondary = anchor_id

    def _one(i: int) -> str:
        try:
            return responder.complete(prompt, i)
        except ResponderFailure as exc:
            raise ResponderFailure(f"anchor {anchor_id!r}, sample {i}: {exc}") from exc

    if parallelism > 1 and config.n > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            responses = list(pool.map(_one, range(config.n)))
    else:
        responses = [_one(i) for i in range(config.n)]

    exclude = frozenset({target_id, anchor_id})
    per_response: list[Extraction] = [
        extract_entities(text, responder=responder, exclude=exclude) for text in responses
    ]
    counts: dict[EntityId, int] = {}
    surfaces: dict[EntityId, set[str]] = {}
    for extraction in per_response:
        for cid, c in extraction.counts.items():
            counts[cid] = counts.get(cid, 0) + c
            surfaces.setdefault(cid, set()).update(extraction.surfaces[cid])
    return ElicitationRecord(
        anchor=anchor_id,
        secondary_anchor=secondary,
        prompt_kind=kind,
        responses=responses,
        extractions=[e.ids() for e in per_response],
        extraction_counts=counts,
        surface_forms=surfaces,
    )


def _expansion_from_record(
    record: ElicitationRecord, hop: int, config: MiningConfig
) -> AnchorExpansion:
    candidates: dict[EntityId, CandidateStat] = {}
    for cid, count in record.extraction_counts.items():
        s = strength(record, cid)
        candidates[cid] = CandidateStat(
            strength=s,
            count=count,
            retained=s >= config.tau,
            surfaces=set(record.surface_forms.get(cid, set())),
        )
    return AnchorExpansion(
        anchor=record.anchor,
        hop=hop,
        candidates=candidates,
        denominator=sum(record.extraction_counts.values()),
    )


def expand_graph(
    config: MiningConfig,
    target: str,
    description: str | None,
    responder: Responder,
    parallelism: int = 4,
    record_sink: list[ElicitationRecord] | None = None,
) -> MemoryGraph:
    """Mine the memory graph by iterative expansion from the target.

    Hop h anchors are elicited N times each; candidates at mention frequency
    >= tau become hop h+1 nodes. Anchors are processed in sorted-id order;
    exhausting max_iterations truncates (flagged in the budget report, not an
    error). Queries are counted for elicitation completions only.
    """
    if not target.strip():
        raise ValueError("target must be non-empty")
    graph = MemoryGraph.rooted(target, description, config)
    target_id = graph.target
    frontier = [target_id]
    iterations = 0
    queries = 0
    truncated = False
    hop = 0
    while hop < config.k and frontier:
        expansions: list[AnchorExpansion] = []
        for anchor_id in sorted(frontier):
            if iterations >= config.max_iterations:
                truncated = True
                break
            if (
                config.adaptive_stop_threshold is not None
                and anchor_id != target_id
                and max_product_weight(graph, anchor_id) < config.adaptive_stop_threshold
            ):
                log.debug("adaptive stop: skipping anchor %r", anchor_id)
                continue
            record = _elicit_anchor(
                config,
                target,
                target_id,
                anchor_id,
                graph.display(anchor_id),
                description,
                responder,
                parallelism,
            )
            iterations += 1
            queries += config.n
            if record_sink is not None:
                record_sink.append(record)
            expansions.append(_expansion_from_record(record, hop, config))
        new_ids = merge_expansions(graph, expansions)
        if truncated:
            break
        frontier = new_ids
        hop += 1
    graph.budget = BudgetReport(
        iterations=iterations,
        queries_issued=queries,
        queries_per_iteration=config.n,
        truncated=truncated,
    )
    return graph
