"""Target-rooted weighted memory graph: domain types, invariants, JSON I/O.

Nodes carry a memorization strength (fraction of elicitations mentioning the
entity) and the hop at which they were discovered; edges carry co-elicitation
counts normalized over everything extracted from the source anchor. Graphs are
built once by the miner and treated as immutable afterwards, so they are safe
to share across readers.
"""

from __future__ import annotations

import json
import math
import string
from collections import deque
from dataclasses import dataclass, field, replace

from memscrub.errors import (
    EmptyMention,
    EmptyNeighborhood,
    OrphanNode,
    SchemaError,
)

EntityId = str

_TRIM = string.punctuation


def normalize_mention(raw: str) -> EntityId:
    """Case-fold, collapse whitespace, and trim surrounding punctuation.

    Idempotent by construction; raises EmptyMention when nothing survives
    (e.g. a mention consisting only of punctuation).
    """
    key = " ".join(raw.split()).casefold()
    key = key.strip(_TRIM)
    key = " ".join(key.split())
    if not key:
        raise EmptyMention(f"mention normalizes to empty: {raw!r}")
    return key


def display_form(surface_forms: frozenset[str], fallback: str) -> str:
    """Deterministic human-readable representative of a surface-form set."""
    if not surface_forms:
        return fallback
    return min(surface_forms, key=lambda s: (len(s), s))


@dataclass(frozen=True)
class MemoryNode:
    id: EntityId
    surface_forms: frozenset[str]
    strength: float
    hop: int
    discovered_from: EntityId | None = None

    def display(self) -> str:
        return display_form(self.surface_forms, self.id)


@dataclass(frozen=True)
class MemoryEdge:
    src: EntityId
    dst: EntityId
    count: int
    weight: float


@dataclass(frozen=True)
class BudgetReport:
    """Query accounting for one mining run: Q <= queries_per_iteration * iterations."""

    iterations: int = 0
    queries_issued: int = 0
    queries_per_iteration: int = 0
    truncated: bool = False


@dataclass(frozen=True)
class MiningConfig:
    """Knobs for graph mining.

    Defaults follow the rich-knowledge profile (n=10, tau=0.2, k=2); use
    ``sparse_profile`` for sparsely memorized targets (tau=0.3, k=3).
    """

    n: int = 10
    tau: float = 0.2
    k: int = 2
    adaptive_stop_threshold: float | None = None
    max_iterations: int = 512
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not (0.0 < self.tau <= 1.0):
            raise ValueError("tau must be in (0, 1]")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    @classmethod
    def sparse_profile(cls, **overrides) -> MiningConfig:
        base = {"tau": 0.3, "k": 3}
        base.update(overrides)
        return cls(**base)


@dataclass
class MemoryGraph:
    target: EntityId
    target_description: str | None
    nodes: dict[EntityId, MemoryNode]
    edges: dict[tuple[EntityId, EntityId], MemoryEdge]
    config_snapshot: MiningConfig
    budget: BudgetReport = field(default_factory=BudgetReport)

    @classmethod
    def rooted(
        cls,
        target_raw: str,
        description: str | None,
        config: MiningConfig,
    ) -> MemoryGraph:
        """Fresh graph holding only the hop-0 target node."""
        key = normalize_mention(target_raw)
        node = MemoryNode(
            id=key,
            surface_forms=frozenset({target_raw.strip()}),
            strength=1.0,
            hop=0,
            discovered_from=None,
        )
        return cls(
            target=key,
            target_description=description,
            nodes={key: node},
            edges={},
            config_snapshot=config,
        )

    def target_node(self) -> MemoryNode:
        return self.nodes[self.target]

    def out_edges(self, src: EntityId) -> list[MemoryEdge]:
        return [e for (s, _), e in sorted(self.edges.items()) if s == src]

    def out_neighbors(self, src: EntityId) -> list[EntityId]:
        return sorted(dst for (s, dst) in self.edges if s == src)

    def display(self, key: EntityId) -> str:
        node = self.nodes.get(key)
        return node.display() if node else key


def upsert_node(graph: MemoryGraph, node: MemoryNode) -> MemoryGraph:
    """Insert or merge a node: surface forms union, strength replaced.

    Hop-h nodes (h > 0) need an existing parent at hop h-1, otherwise the
    reachability invariant could not hold.
    """
    if not (0.0 <= node.strength <= 1.0):
        raise ValueError(f"strength out of range: {node.strength}")
    if node.hop > 0 and not any(n.hop == node.hop - 1 for n in graph.nodes.values()):
        raise OrphanNode(f"no hop-{node.hop - 1} parent for {node.id!r}")
    existing = graph.nodes.get(node.id)
    if existing is None:
        graph.nodes[node.id] = node
    else:
        graph.nodes[node.id] = replace(
            node,
            surface_forms=existing.surface_forms | node.surface_forms,
            hop=min(existing.hop, node.hop),
            discovered_from=existing.discovered_from
            if existing.hop <= node.hop
            else node.discovered_from,
        )
    return graph


def edge_weights(extraction_counts: dict[EntityId, int]) -> dict[EntityId, float]:
    """Normalize extraction counts into co-elicitation weights (sum to 1)."""
    if not extraction_counts:
        raise EmptyNeighborhood("no extracted neighbors to weight")
    for key, count in extraction_counts.items():
        if count < 1:
            raise ValueError(f"count for {key!r} must be >= 1, got {count}")
    total = sum(extraction_counts.values())
    return {key: count / total for key, count in extraction_counts.items()}


def validate_graph(graph: MemoryGraph) -> None:
    """Assert the structural invariants; raises ValueError on violation."""
    hops0 = [n for n in graph.nodes.values() if n.hop == 0]
    if len(hops0) != 1 or hops0[0].id != graph.target:
        raise ValueError("exactly one hop-0 node, the target, is required")
    tau = graph.config_snapshot.tau
    for node in graph.nodes.values():
        if not (0.0 <= node.strength <= 1.0):
            raise ValueError(f"node {node.id!r} strength out of range")
        if node.hop > 0 and node.strength < tau:
            raise ValueError(f"retained node {node.id!r} below tau")
    out_sums: dict[EntityId, float] = {}
    for (src, dst), edge in graph.edges.items():
        if src == dst:
            raise ValueError(f"self-loop on {src!r}")
        if src not in graph.nodes or dst not in graph.nodes:
            raise ValueError(f"edge endpoint missing: {src!r}->{dst!r}")
        if edge.count < 1:
            raise ValueError(f"edge {src!r}->{dst!r} count < 1")
        if not (0.0 < edge.weight <= 1.0):
            raise ValueError(f"edge {src!r}->{dst!r} weight out of (0, 1]")
        out_sums[src] = out_sums.get(src, 0.0) + edge.weight
    for src, total in out_sums.items():
        if total > 1.0 + 1e-9:
            raise ValueError(f"outgoing weights of {src!r} sum to {total} > 1")
    # BFS: every node reachable from the target within k hops.
    dist = {graph.target: 0}
    queue = deque([graph.target])
    adjacency: dict[EntityId, list[EntityId]] = {}
    for src, dst in graph.edges:
        adjacency.setdefault(src, []).append(dst)
    while queue:
        u = queue.popleft()
        for v in adjacency.get(u, ()):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    k = graph.config_snapshot.k
    for node in graph.nodes.values():
        if node.id not in dist:
            raise ValueError(f"node {node.id!r} unreachable from target")
        if dist[node.id] > k:
            raise ValueError(f"node {node.id!r} beyond {k} hops")
        if node.hop > k:
            raise ValueError(f"node {node.id!r} stored hop beyond {k}")


def _config_to_dict(config: MiningConfig) -> dict:
    return {
        "n": config.n,
        "tau": config.tau,
        "k": config.k,
        "adaptive_stop_threshold": config.adaptive_stop_threshold,
        "max_iterations": config.max_iterations,
        "seed": config.seed,
    }


def serialize_graph(graph: MemoryGraph) -> bytes:
    """Deterministic JSON rendering: arrays sorted by id / (src, dst)."""
    doc = {
        "target": graph.target,
        "description": graph.target_description,
        "nodes": [
            {
                "id": node.id,
                "surface_forms": sorted(node.surface_forms),
                "strength": node.strength,
                "hop": node.hop,
                "discovered_from": node.discovered_from,
            }
            for _, node in sorted(graph.nodes.items())
        ],
        "edges": [
            {
                "src": edge.src,
                "dst": edge.dst,
                "count": edge.count,
                "weight": edge.weight,
            }
            for _, edge in sorted(graph.edges.items())
        ],
        "config": _config_to_dict(graph.config_snapshot),
        "budget": {
            "iterations": graph.budget.iterations,
            "queries_issued": graph.budget.queries_issued,
            "queries_per_iteration": graph.budget.queries_per_iteration,
            "truncated": graph.budget.truncated,
        },
    }
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _expect(obj: dict, key: str, kinds: tuple[type, ...], path: str, optional: bool = False):
    if key not in obj:
        if optional:
            return None
        raise SchemaError(f"{path}{key}", "missing field")
    value = obj[key]
    if value is None and optional:
        return None
    if not isinstance(value, kinds) or isinstance(value, bool) and bool not in kinds:
        raise SchemaError(f"{path}{key}", f"expected {kinds}, got {type(value).__name__}")
    return value


def deserialize_graph(data: bytes | str) -> MemoryGraph:
    """Parse and structurally validate a serialized graph."""
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError("<document>", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("<document>", "expected a JSON object")

    target = _expect(doc, "target", (str,), "")
    description = _expect(doc, "description", (str,), "", optional=True)

    cfg_doc = _expect(doc, "config", (dict,), "")
    try:
        config = MiningConfig(
            n=_expect(cfg_doc, "n", (int,), "config."),
            tau=_expect(cfg_doc, "tau", (int, float), "config."),
            k=_expect(cfg_doc, "k", (int,), "config."),
            adaptive_stop_threshold=_expect(
                cfg_doc, "adaptive_stop_threshold", (int, float), "config.", optional=True
            ),
            max_iterations=_expect(cfg_doc, "max_iterations", (int,), "config."),
            seed=_expect(cfg_doc, "seed", (int,), "config."),
        )
    except ValueError as exc:
        raise SchemaError("config", str(exc)) from exc

    bud_doc = _expect(doc, "budget", (dict,), "")
    budget = BudgetReport(
        iterations=_expect(bud_doc, "iterations", (int,), "budget."),
        queries_issued=_expect(bud_doc, "queries_issued", (int,), "budget."),
        queries_per_iteration=_expect(bud_doc, "queries_per_iteration", (int,), "budget."),
        truncated=bool(bud_doc.get("truncated", False)),
    )

    nodes: dict[EntityId, MemoryNode] = {}
    for i, node_doc in enumerate(_expect(doc, "nodes", (list,), "")):
        path = f"nodes[{i}]."
        if not isinstance(node_doc, dict):
            raise SchemaError(f"nodes[{i}]", "expected an object")
        forms = _expect(node_doc, "surface_forms", (list,), path)
        if not all(isinstance(s, str) for s in forms):
            raise SchemaError(f"{path}surface_forms", "expected strings")
        node = MemoryNode(
            id=_expect(node_doc, "id", (str,), path),
            surface_forms=frozenset(forms),
            strength=float(_expect(node_doc, "strength", (int, float), path)),
            hop=_expect(node_doc, "hop", (int,), path),
            discovered_from=_expect(node_doc, "discovered_from", (str,), path, optional=True),
        )
        if not (0.0 <= node.strength <= 1.0):
            raise SchemaError(f"{path}strength", f"out of [0, 1]: {node.strength}")
        if node.hop < 0:
            raise SchemaError(f"{path}hop", "negative")
        if node.id in nodes:
            raise SchemaError(f"{path}id", f"duplicate node id {node.id!r}")
        nodes[node.id] = node

    edges: dict[tuple[EntityId, EntityId], MemoryEdge] = {}
    for i, edge_doc in enumerate(_expect(doc, "edges", (list,), "")):
        path = f"edges[{i}]."
        if not isinstance(edge_doc, dict):
            raise SchemaError(f"edges[{i}]", "expected an object")
        edge = MemoryEdge(
            src=_expect(edge_doc, "src", (str,), path),
            dst=_expect(edge_doc, "dst", (str,), path),
            count=_expect(edge_doc, "count", (int,), path),
            weight=float(_expect(edge_doc, "weight", (int, float), path)),
        )
        if edge.src not in nodes:
            raise SchemaError(f"{path}src", f"unknown node {edge.src!r}")
        if edge.dst not in nodes:
            raise SchemaError(f"{path}dst", f"unknown node {edge.dst!r}")
        key = (edge.src, edge.dst)
        if key in edges:
            raise SchemaError(f"edges[{i}]", f"duplicate edge {key!r}")
        edges[key] = edge

    if target not in nodes:
        raise SchemaError("target", f"target node {target!r} not present in nodes")

    return MemoryGraph(
        target=target,
        target_description=description,
        nodes=nodes,
        edges=edges,
        config_snapshot=config,
        budget=budget,
    )


def weights_sum_to_one(weights: dict[EntityId, float]) -> bool:
    return math.isclose(sum(weights.values()), 1.0, rel_tol=0.0, abs_tol=1e-9)
