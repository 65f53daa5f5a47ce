"""Strength-weighted exploratory path sampling over a mined memory graph.

Walk stepping runs in the kernels backend (compiled when available) over a
CSR projection of the graph; everything here stays deterministic for a fixed
seed because the RNG stream is a single SplitMix64 sequence and the shared
visit counters make walk order part of the semantics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from memscrub import kernels
from memscrub.errors import (
    DeadEnd,
    IoFailure,
    IsolatedTarget,
    NoNeighbors,
    NotAPath,
    SchemaError,
    TooShort,
)
from memscrub.graph import EntityId, MemoryGraph

_MASK64 = (1 << 64) - 1


class PathKind(str, Enum):
    FORGET = "forget"
    NEIGHBOR = "neighbor"


@dataclass(frozen=True)
class SamplingConfig:
    r: int = 200
    l: int = 5
    alpha: float = 1.0
    eta: float = 0.3
    coverage_target: float | None = None
    seed: int = 0
    visit_update: str = "per_step"

    def __post_init__(self) -> None:
        if self.r < 1:
            raise ValueError("r must be >= 1")
        if self.l < 2:
            raise ValueError("l must be >= 2")
        if self.alpha < 0.0:
            raise ValueError("alpha must be >= 0")
        if not (0.0 <= self.eta <= 1.0):
            raise ValueError("eta must be in [0, 1]")
        if self.coverage_target is not None and not (0.0 < self.coverage_target <= 1.0):
            raise ValueError("coverage_target must be in (0, 1]")
        if self.visit_update not in ("per_step", "per_walk"):
            raise ValueError("visit_update must be per_step or per_walk")


@dataclass(frozen=True)
class MemoryPath:
    nodes: tuple[EntityId, ...]
    quality: float
    kind: PathKind


@dataclass
class VisitLedger:
    visits: dict[EntityId, int] = field(default_factory=dict)

    def get(self, node: EntityId) -> int:
        return self.visits.get(node, 0)

    def bump(self, node: EntityId) -> None:
        self.visits[node] = self.visits.get(node, 0) + 1


@dataclass
class CsrGraph:
    ids: list[EntityId]
    index: dict[EntityId, int]
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray


def build_csr(graph: MemoryGraph) -> CsrGraph:
    """Project the graph onto CSR arrays with a stable (sorted-id) order."""
    ids = sorted(graph.nodes)
    index = {nid: i for i, nid in enumerate(ids)}
    per_row: list[list[tuple[int, float]]] = [[] for _ in ids]
    for (src, dst), edge in sorted(graph.edges.items()):
        per_row[index[src]].append((index[dst], edge.weight))
    indptr = np.zeros(len(ids) + 1, dtype=np.int64)
    cols: list[int] = []
    weights: list[float] = []
    for i, row in enumerate(per_row):
        for col, w in row:
            cols.append(col)
            weights.append(w)
        indptr[i + 1] = len(cols)
    return CsrGraph(
        ids=ids,
        index=index,
        indptr=indptr,
        indices=np.asarray(cols, dtype=np.int64),
        weights=np.asarray(weights, dtype=np.float64),
    )


def transition_distribution(
    graph: MemoryGraph,
    u: EntityId,
    ledger: VisitLedger,
    alpha: float,
    banned: EntityId | None = None,
) -> dict[EntityId, float]:
    """Normalized Eq. of motion for one step: weight times inverse-visit
    penalty, renormalized over the allowed out-edges. Reference (dict-based)
    implementation used for audits; the kernel computes the same numbers."""
    scores: dict[EntityId, float] = {}
    found = False
    for edge in graph.out_edges(u):
        found = True
        if banned is not None and edge.dst == banned:
            continue
        scores[edge.dst] = edge.weight * (1.0 / (1.0 + ledger.get(edge.dst))) ** alpha
    if not found:
        raise DeadEnd(f"node {u!r} has no outgoing edges")
    total = sum(scores.values())
    if total <= 0.0:
        return {}
    return {dst: s / total for dst, s in scores.items()}


def path_quality(graph: MemoryGraph, nodes: list[EntityId] | tuple[EntityId, ...]) -> float:
    """Mean traversed edge weight."""
    if len(nodes) < 2:
        raise TooShort(f"path of {len(nodes)} node(s) has no edges")
    total = 0.0
    for a, b in zip(nodes, nodes[1:]):
        edge = graph.edges.get((a, b))
        if edge is None:
            raise NotAPath(f"no edge {a!r} -> {b!r}")
        total += edge.weight
    return total / (len(nodes) - 1)


class _WalkRun:
    """Mutable walk state shared across batches of one sampling run."""

    def __init__(self, graph: MemoryGraph, config: SamplingConfig, kind: PathKind) -> None:
        self.graph = graph
        self.config = config
        self.kind = kind
        self.csr = build_csr(graph)
        self.visits = np.zeros(len(self.csr.ids), dtype=np.int64)
        self.state = config.seed & _MASK64
        target_idx = self.csr.index[graph.target]
        if kind == PathKind.FORGET:
            lo, hi = self.csr.indptr[target_idx], self.csr.indptr[target_idx + 1]
            if hi == lo:
                raise IsolatedTarget(f"target {graph.target!r} has no outgoing edges")
            self.starts = [target_idx]
            self.banned = -1
        else:
            neighbors = graph.out_neighbors(graph.target)
            if not neighbors:
                raise NoNeighbors(f"target {graph.target!r} has no out-neighbors")
            ranked = sorted(neighbors, key=lambda n: (-graph.nodes[n].strength, n))
            self.starts = [self.csr.index[n] for n in ranked]
            self.banned = target_idx
        self.walk_count = 0

    def walk_batch(self, count: int) -> list[list[EntityId]]:
        """Run `count` walks, returning raw (unfiltered) node-id paths."""
        out: list[list[EntityId]] = []
        per_step = self.config.visit_update == "per_step"
        for _ in range(count):
            start = self.starts[self.walk_count % len(self.starts)]
            idx_path, self.state = kernels.run_walk(
                self.csr.indptr,
                self.csr.indices,
                self.csr.weights,
                self.visits,
                start,
                self.config.l,
                self.config.alpha,
                self.banned,
                per_step,
                self.state,
            )
            self.walk_count += 1
            out.append([self.csr.ids[i] for i in idx_path])
        return out

    def ledger(self) -> VisitLedger:
        return VisitLedger(
            {nid: int(c) for nid, c in zip(self.csr.ids, self.visits) if c}
        )


def _filter(graph: MemoryGraph, walks: list[list[EntityId]], config: SamplingConfig, kind: PathKind) -> list[MemoryPath]:
    kept: list[MemoryPath] = []
    for walk in walks:
        if len(walk) < 2:
            continue
        q = path_quality(graph, walk)
        if q >= config.eta:
            kept.append(MemoryPath(nodes=tuple(walk), quality=q, kind=kind))
    return kept


def run_forget_walks(graph: MemoryGraph, config: SamplingConfig) -> list[list[EntityId]]:
    """Unfiltered walk trace from the target: all R raw walks in order.

    Exposed for audits; sample_paths is exactly this plus the quality filter.
    """
    return _WalkRun(graph, config, PathKind.FORGET).walk_batch(config.r)


def sample_paths(graph: MemoryGraph, config: SamplingConfig) -> list[MemoryPath]:
    """R exploratory walks from the target, quality-filtered per eta.

    Discarded walks still advance the RNG and the visit counters, keeping the
    walk budget fixed and the run replayable.
    """
    run = _WalkRun(graph, config, PathKind.FORGET)
    return _filter(graph, run.walk_batch(config.r), config, PathKind.FORGET)


def sample_neighbor_paths(graph: MemoryGraph, config: SamplingConfig) -> list[MemoryPath]:
    """R walks from the target's out-neighbors (strength-ranked round-robin)
    with the target banned from every transition; fresh visit ledger."""
    run = _WalkRun(graph, config, PathKind.NEIGHBOR)
    return _filter(graph, run.walk_batch(config.r), config, PathKind.NEIGHBOR)


def coverage(graph: MemoryGraph, paths: list[MemoryPath]) -> float:
    """Fraction of non-target nodes on at least one retained forget path."""
    others = set(graph.nodes) - {graph.target}
    if not others:
        return 1.0
    seen: set[EntityId] = set()
    for path in paths:
        if path.kind == PathKind.FORGET:
            seen.update(path.nodes)
    return len(seen & others) / len(others)


MAX_COVERAGE_BATCHES = 10


@dataclass
class CoverageRun:
    paths: list[MemoryPath]
    coverage: float
    coverage_by_batch: list[float]
    walks_used: int
    reached: bool


def sample_paths_with_coverage(graph: MemoryGraph, config: SamplingConfig) -> CoverageRun:
    """Forget sampling with the coverage stop rule.

    Without a coverage_target this is a single batch of R walks. With one,
    batches of R continue on the same RNG stream and shared visits until the
    target is met or the hard cap of 10R walks is reached, so a longer run is
    always a prefix-extension of a shorter one.
    """
    run = _WalkRun(graph, config, PathKind.FORGET)
    paths: list[MemoryPath] = []
    by_batch: list[float] = []
    batches = 1 if config.coverage_target is None else MAX_COVERAGE_BATCHES
    reached = config.coverage_target is None
    for _ in range(batches):
        paths.extend(_filter(graph, run.walk_batch(config.r), config, PathKind.FORGET))
        by_batch.append(coverage(graph, paths))
        if config.coverage_target is not None and by_batch[-1] >= config.coverage_target:
            reached = True
            break
    return CoverageRun(
        paths=paths,
        coverage=by_batch[-1],
        coverage_by_batch=by_batch,
        walks_used=run.walk_count,
        reached=reached,
    )


def write_paths(paths: list[MemoryPath], destination: str) -> int:
    """Dump paths as JSONL; returns bytes written."""
    try:
        with open(destination, "w", encoding="utf-8") as fh:
            total = 0
            for path in paths:
                line = json.dumps(
                    {"kind": path.kind.value, "nodes": list(path.nodes), "quality": path.quality},
                    ensure_ascii=False,
                )
                total += fh.write(line + "\n")
        return total
    except OSError as exc:
        raise IoFailure(f"cannot write paths to {destination}: {exc}") from exc


def load_paths(source: str) -> list[MemoryPath]:
    paths: list[MemoryPath] = []
    try:
        with open(source, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                raw = raw.strip()
                if not raw:
                    continue
                try:
                    doc = json.loads(raw)
                    paths.append(
                        MemoryPath(
                            nodes=tuple(doc["nodes"]),
                            quality=float(doc["quality"]),
                            kind=PathKind(doc["kind"]),
                        )
                    )
                except (json.JSONDecodeError, KeyError, ValueError) as exc:
                    raise SchemaError(f"{source}:{lineno}", f"bad path line: {exc}") from exc
    except OSError as exc:
        raise IoFailure(f"cannot read paths from {source}: {exc}") from exc
    return paths
