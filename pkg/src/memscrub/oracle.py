"""Deterministic synthetic responder with known ground truth.

An OracleWorld lists (subject, object) facts with per-response recall
probabilities plus a pool of hallucination entities. oracle_complete renders
elicitation responses by drawing facts from an RNG stream keyed on
(world seed, prompt hash, sample index), so concurrent callers see the same
bytes regardless of order. expected_graph computes, with no sampling, the
graph a miner should recover, using the same extraction and merge code as
the miner itself.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
import re
from dataclasses import dataclass

from memscrub.elicit import (
    AnchorExpansion,
    CandidateStat,
    extract_entities,
    max_product_weight,
    merge_expansions,
)
from memscrub.errors import SchemaError
from memscrub.graph import (
    BudgetReport,
    EntityId,
    MemoryGraph,
    MiningConfig,
    normalize_mention,
)
from memscrub.prompts import ParsedPrompt, PromptKind, parse_prompt

EMPTY_RESPONSE = "nothing comes to mind."
_HALLUCINATION_TEMPLATE = "{entity} is sometimes mentioned here."
_LINK_TEMPLATE = "{e1} and {e2} are linked through {target}."


@dataclass(frozen=True)
class OracleFact:
    subject: str
    object: str
    template: str
    recall_prob: float

    def render(self) -> str:
        return self.template.format(subject=self.subject, object=self.object)


@dataclass(frozen=True)
class OracleWorld:
    seed: int
    hallucination_prob: float
    hallucination_pool: tuple[str, ...]
    facts: tuple[OracleFact, ...]

    def __post_init__(self) -> None:
        if not (0.0 <= self.hallucination_prob < 1.0):
            raise ValueError("hallucination_prob must be in [0, 1)")
        anchored: set[EntityId] = set()
        for fact in self.facts:
            if not (0.0 <= fact.recall_prob <= 1.0):
                raise ValueError(f"recall_prob out of range for {fact.subject!r}")
            s, o = normalize_mention(fact.subject), normalize_mention(fact.object)
            if s == o:
                raise ValueError(f"fact with subject = object: {fact.subject!r}")
            try:
                fact.render()
            except (KeyError, IndexError) as exc:
                raise ValueError(f"bad template {fact.template!r}: {exc}") from exc
            anchored.update((s, o))
        for entity in self.hallucination_pool:
            if normalize_mention(entity) in anchored:
                raise ValueError(f"hallucination pool entity {entity!r} collides with a fact")


def save_world(world: OracleWorld, path: str) -> None:
    doc = {
        "seed": world.seed,
        "hallucination_prob": world.hallucination_prob,
        "hallucination_pool": list(world.hallucination_pool),
        "facts": [
            {
                "subject": f.subject,
                "object": f.object,
                "template": f.template,
                "recall_prob": f.recall_prob,
            }
            for f in world.facts
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def load_world(path: str) -> OracleWorld:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError("<document>", f"invalid JSON: {exc}") from exc
    return world_from_dict(doc)


def world_from_dict(doc: dict) -> OracleWorld:
    if not isinstance(doc, dict):
        raise SchemaError("<document>", "expected a JSON object")
    for key, kinds in (
        ("seed", (int,)),
        ("hallucination_prob", (int, float)),
        ("hallucination_pool", (list,)),
        ("facts", (list,)),
    ):
        if key not in doc:
            raise SchemaError(key, "missing field")
        if not isinstance(doc[key], kinds) or isinstance(doc[key], bool):
            raise SchemaError(key, f"expected {kinds}")
    facts = []
    for i, item in enumerate(doc["facts"]):
        path = f"facts[{i}]"
        if not isinstance(item, dict):
            raise SchemaError(path, "expected an object")
        for key in ("subject", "object", "template", "recall_prob"):
            if key not in item:
                raise SchemaError(f"{path}.{key}", "missing field")
        facts.append(
            OracleFact(
                subject=str(item["subject"]),
                object=str(item["object"]),
                template=str(item["template"]),
                recall_prob=float(item["recall_prob"]),
            )
        )
    try:
        return OracleWorld(
            seed=doc["seed"],
            hallucination_prob=float(doc["hallucination_prob"]),
            hallucination_pool=tuple(str(e) for e in doc["hallucination_pool"]),
            facts=tuple(facts),
        )
    except ValueError as exc:
        raise SchemaError("<document>", str(exc)) from exc


def _stream(world_seed: int, prompt: str, sample_index: int) -> random.Random:
    digest = hashlib.sha256(
        f"{world_seed}\x1f{sample_index}\x1f{prompt}".encode()
    ).digest()
    return random.Random(digest)


def _fact_graph(world: OracleWorld) -> dict[EntityId, set[EntityId]]:
    adjacency: dict[EntityId, set[EntityId]] = {}
    for fact in world.facts:
        s, o = normalize_mention(fact.subject), normalize_mention(fact.object)
        adjacency.setdefault(s, set()).add(o)
        adjacency.setdefault(o, set()).add(s)
    return adjacency


def _connected(world: OracleWorld, a: str, b: str) -> bool:
    adjacency = _fact_graph(world)
    try:
        start, goal = normalize_mention(a), normalize_mention(b)
    except Exception:
        return False
    if start not in adjacency or goal not in adjacency:
        return False
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adjacency[u]:
                if v == goal:
                    return True
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return start == goal


def oracle_complete(world: OracleWorld, prompt: str, sample_index: int) -> str:
    """Answer a registry prompt deterministically.

    Elicitation prompts draw matching facts and hallucinations from the keyed
    stream; event prompts link connected pairs or answer UNKNOWN; QA prompts
    mask the target out of the statement and answer with the target.
    """
    parsed: ParsedPrompt = parse_prompt(prompt)
    fields = parsed.fields
    if parsed.kind in (PromptKind.HOP0, PromptKind.NEIGHBOR_HOP):
        anchor_raw = (
            fields["neighbor"] if parsed.kind == PromptKind.NEIGHBOR_HOP else fields["target"]
        )
        anchor = normalize_mention(anchor_raw)
        rng = _stream(world.seed, prompt, sample_index)
        lines: list[str] = []
        for fact in world.facts:
            if normalize_mention(fact.subject) != anchor:
                continue
            if rng.random() < fact.recall_prob:
                lines.append(fact.render())
        for entity in world.hallucination_pool:
            if rng.random() < world.hallucination_prob:
                lines.append(_HALLUCINATION_TEMPLATE.format(entity=entity))
        if not lines:
            return EMPTY_RESPONSE
        return "\n".join(f"{i}. {line}" for i, line in enumerate(lines, 1))
    if parsed.kind == PromptKind.EVENT_SYNTHESIS:
        e1, e2 = fields["event_1"], fields["event_2"]
        if _connected(world, e1, e2):
            return _LINK_TEMPLATE.format(e1=e1, e2=e2, target=fields["target"])
        return "UNKNOWN"
    # QA synthesis: a cloze question with the target masked out.
    target, event = fields["target"], fields["event"]
    masked = re.sub(re.escape(target), "___", event, flags=re.IGNORECASE)
    return f"Question: Fill in the blank: {masked} Answer: {target}"


class OracleResponder:
    """Responder adapter over an immutable world; safe for concurrent use."""

    def __init__(self, world: OracleWorld) -> None:
        self.world = world

    def complete(self, prompt: str, sample_index: int) -> str:
        return oracle_complete(self.world, prompt, sample_index)


def _binom_tail(n: int, p: float, c_min: int) -> float:
    """P(Binomial(n, p) >= c_min), computed exactly."""
    if c_min <= 0:
        return 1.0
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0 if c_min <= n else 0.0
    return sum(
        math.comb(n, c) * p**c * (1.0 - p) ** (n - c) for c in range(c_min, n + 1)
    )


def _min_retained_count(n: int, tau: float) -> int:
    for c in range(n + 1):
        if c / n >= tau:
            return c
    return n + 1


RETENTION_BAR = 0.999


def expected_graph(
    world: OracleWorld,
    config: MiningConfig,
    target: str,
    description: str | None = None,
) -> MemoryGraph:
    """Analytic reference graph: no sampling, exact probability math.

    A candidate becomes a node when its retention probability under (N, tau)
    exceeds 0.999, where retention needs >= ceil-equivalent of tau*N mentions
    across N independent responses. Edge counts and weights are conditioned
    on deterministic recall: every positive-probability fact is treated as
    always recalled and hallucinations as never occurring, which is exact in
    the {0,1}-recall regime. Extraction and merging reuse the miner's own
    code, so structural semantics cannot drift.
    """
    graph = MemoryGraph.rooted(target, description, config)
    target_id = graph.target
    c_min = _min_retained_count(config.n, config.tau)

    facts_by_anchor: dict[EntityId, list[OracleFact]] = {}
    for fact in world.facts:
        facts_by_anchor.setdefault(normalize_mention(fact.subject), []).append(fact)

    def analyze(anchor_id: EntityId, hop: int) -> AnchorExpansion:
        exclude = frozenset({target_id, anchor_id})
        mention_not: dict[EntityId, float] = {}
        occ: dict[EntityId, int] = {}
        surfaces: dict[EntityId, set[str]] = {}
        for fact in facts_by_anchor.get(anchor_id, []):
            if fact.recall_prob <= 0.0:
                continue
            extraction = extract_entities(fact.render(), fallback=True, exclude=exclude)
            for cid, c in extraction.counts.items():
                mention_not[cid] = mention_not.get(cid, 1.0) * (1.0 - fact.recall_prob)
                occ[cid] = occ.get(cid, 0) + c
                surfaces.setdefault(cid, set()).update(extraction.surfaces[cid])
        if world.hallucination_prob > 0.0:
            for entity in world.hallucination_pool:
                line = _HALLUCINATION_TEMPLATE.format(entity=entity)
                extraction = extract_entities(line, fallback=True, exclude=exclude)
                for cid in extraction.counts:
                    mention_not[cid] = mention_not.get(cid, 1.0) * (
                        1.0 - world.hallucination_prob
                    )
        candidates: dict[EntityId, CandidateStat] = {}
        for cid, not_p in mention_not.items():
            p_mention = 1.0 - not_p
            retained = _binom_tail(config.n, p_mention, c_min) > RETENTION_BAR
            count = config.n * occ.get(cid, 0)
            if count == 0:
                # hallucination-only candidate: never retained at the bar,
                # and contributes nothing to deterministic counts.
                continue
            candidates[cid] = CandidateStat(
                strength=p_mention,
                count=count,
                retained=retained,
                surfaces=surfaces.get(cid, set()),
            )
        return AnchorExpansion(
            anchor=anchor_id,
            hop=hop,
            candidates=candidates,
            denominator=sum(st.count for st in candidates.values()),
        )

    frontier = [target_id]
    iterations = 0
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
                continue
            expansions.append(analyze(anchor_id, hop))
            iterations += 1
        new_ids = merge_expansions(graph, expansions)
        if truncated:
            break
        frontier = new_ids
        hop += 1
    graph.budget = BudgetReport(
        iterations=iterations,
        queries_issued=config.n * iterations,
        queries_per_iteration=config.n,
        truncated=truncated,
    )
    return graph
