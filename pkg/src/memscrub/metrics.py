"""Graph-agreement metrics and ROUGE-L recall for probe scoring."""

from __future__ import annotations

import math

import numpy as np

from memscrub import kernels
from memscrub.errors import EmptyInput, EmptyReference
from memscrub.graph import EntityId, MemoryGraph, MiningConfig
from memscrub.oracle import OracleWorld, expected_graph


def graph_frequency(graph: MemoryGraph) -> dict[EntityId, float]:
    """Strengths of the non-target nodes, normalized to sum 1."""
    raw = {
        nid: node.strength
        for nid, node in graph.nodes.items()
        if nid != graph.target and node.strength > 0.0
    }
    if not raw:
        raise EmptyInput("graph has no non-target nodes with positive strength")
    total = sum(raw.values())
    return {nid: s / total for nid, s in raw.items()}


def rank_entities(weights: dict[EntityId, float]) -> list[EntityId]:
    """Descending weight, ties broken lexicographically."""
    return sorted(weights, key=lambda nid: (-weights[nid], nid))


def jaccard_topk(a: list[EntityId], b: list[EntityId], k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    if not a or not b:
        raise EmptyInput("ranked lists must be non-empty")
    sa, sb = set(a[:k]), set(b[:k])
    return len(sa & sb) / len(sa | sb)


def frequency_cosine(a: dict[EntityId, float], b: dict[EntityId, float]) -> float:
    """Cosine over the union support of two normalized distributions."""
    if not a or not b:
        raise EmptyInput("distributions must be non-empty")
    keys = set(a) | set(b)
    dot = sum(a.get(k, 0.0) * b.get(k, 0.0) for k in keys)
    norm_a = math.sqrt(sum(v * v for v in a.values()))
    norm_b = math.sqrt(sum(v * v for v in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        raise EmptyInput("distributions must have positive mass")
    return min(1.0, max(0.0, dot / (norm_a * norm_b)))


def rouge_l_recall(candidate: str, reference: str) -> float:
    """LCS(candidate, reference) / |reference| over case-folded whitespace
    tokens."""
    ref_tokens = reference.casefold().split()
    if not ref_tokens:
        raise EmptyReference("reference tokenizes to nothing")
    cand_tokens = candidate.casefold().split()
    if not cand_tokens:
        return 0.0
    vocab: dict[str, int] = {}
    for tok in cand_tokens + ref_tokens:
        vocab.setdefault(tok, len(vocab))
    a = np.asarray([vocab[t] for t in cand_tokens], dtype=np.int64)
    b = np.asarray([vocab[t] for t in ref_tokens], dtype=np.int64)
    return kernels.lcs_length(a, b) / len(ref_tokens)


def recovery_fidelity(
    mined: MemoryGraph, truth: OracleWorld, config: MiningConfig
) -> tuple[float, float]:
    """Precision/recall of mined non-target nodes against the analytic
    expected graph; empty sides score 1.0 by convention."""
    expected = expected_graph(
        truth,
        config,
        target=mined.target_node().display(),
        description=mined.target_description,
    )
    mined_set = set(mined.nodes) - {mined.target}
    truth_set = set(expected.nodes) - {expected.target}
    hit = len(mined_set & truth_set)
    precision = hit / len(mined_set) if mined_set else 1.0
    recall = hit / len(truth_set) if truth_set else 1.0
    return precision, recall
