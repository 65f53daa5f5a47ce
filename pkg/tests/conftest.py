"""Shared fixtures: synthetic worlds with known ground truth and hand-built
graphs with exact edge weights."""

from __future__ import annotations

import pytest

from memscrub.graph import (
    MemoryEdge,
    MemoryGraph,
    MemoryNode,
    MiningConfig,
)
from memscrub.oracle import OracleFact, OracleWorld

TARGET = "Aster Vale"
TARGET_ID = "aster vale"


def make_world_12(seed: int = 0) -> OracleWorld:
    """Twelve entities, all recall probabilities 1.0, no hallucinations.

    Four hop-1 anchors under the target, seven hop-2 leaves, one cross edge
    between hop-1 nodes. Every template keeps the subject sentence-initial
    and the object as the only other capitalized span.
    """
    return OracleWorld(
        seed=seed,
        hallucination_prob=0.0,
        hallucination_pool=(),
        facts=(
            OracleFact("Aster Vale", "Eldin Marsh", "{subject} studied under {object}.", 1.0),
            OracleFact("Aster Vale", "Quartz Bay", "{subject} grew up near {object}.", 1.0),
            OracleFact("Aster Vale", "Coral Synth", "{subject} founded {object}.", 1.0),
            OracleFact("Aster Vale", "Nimbus Forge", "{subject} later joined {object}.", 1.0),
            OracleFact("Eldin Marsh", "Tide Atlas", "{subject} wrote {object}.", 1.0),
            OracleFact("Eldin Marsh", "Gale Harbor", "{subject} lectured at {object}.", 1.0),
            OracleFact("Eldin Marsh", "Quartz Bay", "{subject} often visits {object}.", 1.0),
            OracleFact("Quartz Bay", "Slate Pier", "{subject} faces {object}.", 1.0),
            OracleFact("Coral Synth", "Helix Grove", "{subject} produced {object}.", 1.0),
            OracleFact("Coral Synth", "Opal Registry", "{subject} merged with {object}.", 1.0),
            OracleFact("Nimbus Forge", "Ember Quay", "{subject} operates from {object}.", 1.0),
            OracleFact("Nimbus Forge", "Drift Lantern", "{subject} sponsors {object}.", 1.0),
        ),
    )


def make_noisy_world(seed: int, hallucination_prob: float = 0.05) -> OracleWorld:
    """Recall-0.9 facts plus one hallucination-pool entity."""
    return OracleWorld(
        seed=seed,
        hallucination_prob=hallucination_prob,
        hallucination_pool=("Phantom Quartz",),
        facts=(
            OracleFact("Aster Vale", "Eldin Marsh", "{subject} studied under {object}.", 0.9),
            OracleFact("Aster Vale", "Quartz Bay", "{subject} grew up near {object}.", 0.9),
            OracleFact("Aster Vale", "Coral Synth", "{subject} founded {object}.", 1.0),
        ),
    )


def make_coverage_world(seed: int = 0) -> OracleWorld:
    """Ten entities arranged so every non-target node sits on some path of
    quality >= 0.3: three hop-1 anchors (weight 1/3) with two leaves each
    (weight 1/2)."""
    return OracleWorld(
        seed=seed,
        hallucination_prob=0.0,
        hallucination_pool=(),
        facts=(
            OracleFact("Aster Vale", "Eldin Marsh", "{subject} studied under {object}.", 1.0),
            OracleFact("Aster Vale", "Quartz Bay", "{subject} grew up near {object}.", 1.0),
            OracleFact("Aster Vale", "Coral Synth", "{subject} founded {object}.", 1.0),
            OracleFact("Eldin Marsh", "Tide Atlas", "{subject} wrote {object}.", 1.0),
            OracleFact("Eldin Marsh", "Gale Harbor", "{subject} lectured at {object}.", 1.0),
            OracleFact("Quartz Bay", "Slate Pier", "{subject} faces {object}.", 1.0),
            OracleFact("Quartz Bay", "Ember Quay", "{subject} overlooks {object}.", 1.0),
            OracleFact("Coral Synth", "Helix Grove", "{subject} produced {object}.", 1.0),
            OracleFact("Coral Synth", "Opal Registry", "{subject} merged with {object}.", 1.0),
        ),
    )


def make_graph(
    target: str,
    edge_counts: dict[tuple[str, str], int],
    strengths: dict[str, float] | None = None,
    config: MiningConfig | None = None,
) -> MemoryGraph:
    """Hand-build a graph; weights are counts normalized per source node and
    hops come from BFS depth."""
    config = config or MiningConfig()
    strengths = strengths or {}
    nodes = {target} | {n for pair in edge_counts for n in pair}
    hops = {target: 0}
    frontier = [target]
    while frontier:
        nxt = []
        for u in frontier:
            for (src, dst) in edge_counts:
                if src == u and dst not in hops:
                    hops[dst] = hops[u] + 1
                    nxt.append(dst)
        frontier = nxt
    graph = MemoryGraph(
        target=target,
        target_description=None,
        nodes={
            n: MemoryNode(
                id=n,
                surface_forms=frozenset({n}),
                strength=1.0 if n == target else strengths.get(n, 1.0),
                hop=hops[n],
                discovered_from=None if n == target else target,
            )
            for n in nodes
        },
        edges={},
        config_snapshot=config,
    )
    totals: dict[str, int] = {}
    for (src, _), count in edge_counts.items():
        totals[src] = totals.get(src, 0) + count
    for (src, dst), count in edge_counts.items():
        graph.edges[(src, dst)] = MemoryEdge(
            src=src, dst=dst, count=count, weight=count / totals[src]
        )
    return graph


@pytest.fixture
def world_12() -> OracleWorld:
    return make_world_12()


@pytest.fixture
def coverage_world() -> OracleWorld:
    return make_coverage_world()


@pytest.fixture
def rich_config() -> MiningConfig:
    return MiningConfig(n=10, tau=0.2, k=2, max_iterations=64, seed=0)


@pytest.fixture
def star_graph() -> MemoryGraph:
    return make_graph("hub", {("hub", "a"): 1, ("hub", "b"): 1, ("hub", "c"): 1})


@pytest.fixture
def boundary_graph() -> MemoryGraph:
    # hub -> a carries weight 3/10 = eta exactly; hub -> b the rest.
    return make_graph("hub", {("hub", "a"): 3, ("hub", "b"): 7})
