"""memscrub: corpus-free supervision mining for targeted unlearning.

Mines a strength-weighted memory graph around a target entity straight from
a model's own elicited outputs, samples high-salience paths, and synthesizes
scoped forget/neighbor QA datasets with answer-span masks.
"""

from memscrub.graph import (
    BudgetReport,
    MemoryEdge,
    MemoryGraph,
    MemoryNode,
    MiningConfig,
    deserialize_graph,
    normalize_mention,
    serialize_graph,
    validate_graph,
)
from memscrub.elicit import Responder, expand_graph, extract_entities, strength
from memscrub.oracle import (
    OracleFact,
    OracleResponder,
    OracleWorld,
    expected_graph,
    load_world,
    oracle_complete,
    save_world,
)
from memscrub.sampler import (
    MemoryPath,
    PathKind,
    SamplingConfig,
    coverage,
    path_quality,
    sample_neighbor_paths,
    sample_paths,
    sample_paths_with_coverage,
    transition_distribution,
)
from memscrub.synth import (
    SupervisionSample,
    build_datasets,
    emit_dataset,
    load_dataset,
    mix_forget_set,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetReport",
    "MemoryEdge",
    "MemoryGraph",
    "MemoryNode",
    "MemoryPath",
    "MiningConfig",
    "OracleFact",
    "OracleResponder",
    "OracleWorld",
    "PathKind",
    "Responder",
    "SamplingConfig",
    "SupervisionSample",
    "build_datasets",
    "coverage",
    "deserialize_graph",
    "emit_dataset",
    "expand_graph",
    "expected_graph",
    "extract_entities",
    "load_dataset",
    "load_world",
    "mix_forget_set",
    "normalize_mention",
    "oracle_complete",
    "path_quality",
    "sample_neighbor_paths",
    "sample_paths",
    "sample_paths_with_coverage",
    "save_world",
    "serialize_graph",
    "strength",
    "transition_distribution",
    "validate_graph",
]
