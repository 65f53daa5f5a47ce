"""Command-line orchestration: mine, sample, synth, pipeline, compare.

Exit codes are stable for scripting: 0 success, 2 configuration problems,
3 responder failures, 4 invariant violations.
"""

from __future__ import annotations

import functools
import hashlib
import json
import os
import sys
from dataclasses import dataclass, replace

import click

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - 3.10 fallback
    import tomli as tomllib

from memscrub.errors import (
    ConfigError,
    IoFailure,
    MemscrubError,
    ResponderFailure,
    SchemaError,
)
from memscrub.graph import (
    MemoryGraph,
    MiningConfig,
    deserialize_graph,
    serialize_graph,
    validate_graph,
)
from memscrub.elicit import expand_graph
from memscrub.metrics import frequency_cosine, graph_frequency, jaccard_topk, rank_entities
from memscrub.oracle import load_world
from memscrub.responders import (
    HttpConfig,
    HttpResponder,
    OracleResponder,
    TranscriptRecorder,
    TranscriptReplayer,
)
from memscrub.sampler import (
    PathKind,
    SamplingConfig,
    load_paths,
    sample_neighbor_paths,
    sample_paths_with_coverage,
    write_paths,
)
from memscrub.synth import build_datasets, emit_dataset

EXIT_CONFIG = 2
EXIT_RESPONDER = 3
EXIT_INVARIANT = 4


@dataclass
class PipelineConfig:
    responder_kind: str
    world_file: str | None
    transcript_file: str | None
    http: HttpConfig | None
    mining: MiningConfig
    sampling: SamplingConfig
    output_dir: str
    parallelism: int = 4


def _section(doc: dict, name: str) -> dict:
    value = doc.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"[{name}] must be a table")
    return value


def load_pipeline_config(
    path: str, seed: int | None = None, out: str | None = None
) -> PipelineConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from exc

    resp = _section(doc, "responder")
    kind = resp.get("kind", "oracle")
    if kind not in ("http", "oracle", "replay"):
        raise ConfigError(f"responder.kind must be http, oracle, or replay, got {kind!r}")
    world_file = resp.get("world_file")
    transcript_file = resp.get("transcript_file")
    if kind == "oracle":
        if not world_file:
            raise ConfigError("responder.kind=oracle requires responder.world_file")
        if not os.path.exists(world_file):
            raise ConfigError(f"world file not found: {world_file}")
    if kind == "replay":
        if not transcript_file:
            raise ConfigError("responder.kind=replay requires responder.transcript_file")
        if not os.path.exists(transcript_file):
            raise ConfigError(f"transcript file not found: {transcript_file}")
    http = None
    if kind == "http":
        if "endpoint" not in resp or "model" not in resp:
            raise ConfigError("responder.kind=http requires endpoint and model")
        http = HttpConfig(
            endpoint=resp["endpoint"],
            model=resp["model"],
            temperature=float(resp.get("temperature", 0.0)),
            timeout=float(resp.get("timeout", 30.0)),
            retries=int(resp.get("retries", 3)),
            api_key_env=resp.get("api_key_env", "MEMSCRUB_API_KEY"),
        )

    try:
        mining = MiningConfig(**_section(doc, "mining"))
        sampling = SamplingConfig(**_section(doc, "sampling"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if seed is not None:
        mining = replace(mining, seed=seed)
        sampling = replace(sampling, seed=seed)

    output = _section(doc, "output")
    output_dir = out or output.get("dir", "out")
    parallelism = int(doc.get("parallelism", 4))
    if parallelism < 1:
        raise ConfigError("parallelism must be >= 1")
    return PipelineConfig(
        responder_kind=kind,
        world_file=world_file,
        transcript_file=transcript_file,
        http=http,
        mining=mining,
        sampling=sampling,
        output_dir=output_dir,
        parallelism=parallelism,
    )


def build_responder(config: PipelineConfig, record: bool = True):
    if config.responder_kind == "replay":
        return TranscriptReplayer(config.transcript_file)
    if config.responder_kind == "oracle":
        inner = OracleResponder(load_world(config.world_file))
    else:
        inner = HttpResponder(config.http)
    if record and config.transcript_file:
        return TranscriptRecorder(inner, config.transcript_file)
    return inner


def _exit_codes(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ConfigError, SchemaError, IoFailure) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except ResponderFailure as exc:
            click.echo(f"responder error: {exc}", err=True)
            sys.exit(EXIT_RESPONDER)
        except (MemscrubError, ValueError) as exc:
            click.echo(f"invariant violation: {exc}", err=True)
            sys.exit(EXIT_INVARIANT)

    return wrapper


@click.group()
def main() -> None:
    """Corpus-free unlearning supervision: mine a memory graph around a
    target entity, sample weighted paths, and synthesize scoped QA data."""


def _config_options(fn):
    fn = click.option("--config", "config_path", required=True, type=click.Path())(fn)
    fn = click.option("--seed", type=int, default=None, help="Override both seeds.")(fn)
    fn = click.option("--out", type=click.Path(), default=None, help="Output directory.")(fn)
    return fn


def _mine(config: PipelineConfig, target: str, description: str | None) -> MemoryGraph:
    responder = build_responder(config)
    try:
        graph = expand_graph(
            config.mining,
            target,
            description,
            responder,
            parallelism=config.parallelism,
        )
    finally:
        if isinstance(responder, TranscriptRecorder):
            responder.close()
    validate_graph(graph)
    return graph


def _write(path: str, data: bytes) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _graph_path(config: PipelineConfig) -> str:
    return os.path.join(config.output_dir, "graph.json")


def _paths_path(config: PipelineConfig) -> str:
    return os.path.join(config.output_dir, "paths.jsonl")


@main.command()
@_config_options
@click.option("--target", required=True)
@click.option("--description", default=None)
@_exit_codes
def mine(config_path, seed, out, target, description) -> None:
    """Mine the memory graph for a target."""
    config = load_pipeline_config(config_path, seed=seed, out=out)
    os.makedirs(config.output_dir, exist_ok=True)
    graph = _mine(config, target, description)
    _write(_graph_path(config), serialize_graph(graph))
    b = graph.budget
    click.echo(
        f"mined {len(graph.nodes)} nodes, {len(graph.edges)} edges | "
        f"iterations={b.iterations} queries={b.queries_issued} "
        f"(cap {b.queries_per_iteration}/iteration, truncated={b.truncated})"
    )
    click.echo(f"graph: {_graph_path(config)}")


def _sample(config: PipelineConfig, graph: MemoryGraph):
    run = sample_paths_with_coverage(graph, config.sampling)
    neighbor = sample_neighbor_paths(graph, config.sampling)
    return run, neighbor


@main.command()
@_config_options
@click.option("--graph", "graph_file", type=click.Path(), default=None)
@_exit_codes
def sample(config_path, seed, out, graph_file) -> None:
    """Sample forget and neighbor paths from a mined graph."""
    config = load_pipeline_config(config_path, seed=seed, out=out)
    os.makedirs(config.output_dir, exist_ok=True)
    graph = _load_graph(graph_file or _graph_path(config))
    run, neighbor = _sample(config, graph)
    write_paths(run.paths + neighbor, _paths_path(config))
    click.echo(
        f"retained {len(run.paths)} forget + {len(neighbor)} neighbor paths | "
        f"coverage={run.coverage:.3f} after {run.walks_used} walks "
        f"(reached={run.reached})"
    )
    click.echo(f"paths: {_paths_path(config)}")


def _load_graph(path: str) -> MemoryGraph:
    try:
        with open(path, "rb") as fh:
            return deserialize_graph(fh.read())
    except FileNotFoundError as exc:
        raise ConfigError(f"graph file not found: {path}") from exc


@main.command()
@_config_options
@click.option("--graph", "graph_file", type=click.Path(), default=None)
@click.option("--paths", "paths_file", type=click.Path(), default=None)
@_exit_codes
def synth(config_path, seed, out, graph_file, paths_file) -> None:
    """Synthesize forget/neighbor QA datasets from sampled paths."""
    config = load_pipeline_config(config_path, seed=seed, out=out)
    os.makedirs(config.output_dir, exist_ok=True)
    graph = _load_graph(graph_file or _graph_path(config))
    paths = load_paths(paths_file or _paths_path(config))
    responder = build_responder(config)
    try:
        forget, neighbor = build_datasets(
            graph,
            [p for p in paths if p.kind == PathKind.FORGET],
            [p for p in paths if p.kind == PathKind.NEIGHBOR],
            responder,
        )
    finally:
        if isinstance(responder, TranscriptRecorder):
            responder.close()
    forget_path = os.path.join(config.output_dir, "forget.jsonl")
    neighbor_path = os.path.join(config.output_dir, "neighbor.jsonl")
    emit_dataset(forget, forget_path)
    emit_dataset(neighbor, neighbor_path)
    click.echo(f"wrote {len(forget)} forget samples: {forget_path}")
    click.echo(f"wrote {len(neighbor)} neighbor samples: {neighbor_path}")


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


@main.command()
@_config_options
@click.option("--target", required=True)
@click.option("--description", default=None)
@_exit_codes
def pipeline(config_path, seed, out, target, description) -> None:
    """Run mine, sample, and synth end to end and write a hash manifest."""
    config = load_pipeline_config(config_path, seed=seed, out=out)
    os.makedirs(config.output_dir, exist_ok=True)
    manifest_path = os.path.join(config.output_dir, "manifest.json")
    previous = None
    if os.path.exists(manifest_path):
        with open(manifest_path, encoding="utf-8") as fh:
            previous = json.load(fh)

    graph = _mine(config, target, description)
    _write(_graph_path(config), serialize_graph(graph))
    run, neighbor = _sample(config, graph)
    write_paths(run.paths + neighbor, _paths_path(config))
    responder = build_responder(config)
    try:
        forget_set, neighbor_set = build_datasets(graph, run.paths, neighbor, responder)
    finally:
        if isinstance(responder, TranscriptRecorder):
            responder.close()
    forget_path = os.path.join(config.output_dir, "forget.jsonl")
    neighbor_path = os.path.join(config.output_dir, "neighbor.jsonl")
    emit_dataset(forget_set, forget_path)
    emit_dataset(neighbor_set, neighbor_path)

    artifacts = {
        os.path.basename(p): _sha256(p)
        for p in (_graph_path(config), _paths_path(config), forget_path, neighbor_path)
    }
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump({"artifacts": artifacts}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for name, digest in sorted(artifacts.items()):
        click.echo(f"{digest}  {name}")
    if previous is not None:
        stale = {
            name
            for name, digest in previous.get("artifacts", {}).items()
            if artifacts.get(name) != digest
        }
        if stale:
            raise MemscrubError(
                f"artifacts changed since last manifest: {', '.join(sorted(stale))}"
            )
        click.echo("manifest verified: all artifact hashes match the previous run")


@main.command()
@click.argument("graph_a", type=click.Path())
@click.argument("graph_b", type=click.Path())
@click.option("--k", type=int, default=50, show_default=True)
@_exit_codes
def compare(graph_a, graph_b, k) -> None:
    """Agreement metrics between two mined graphs."""
    freq_a = graph_frequency(_load_graph(graph_a))
    freq_b = graph_frequency(_load_graph(graph_b))
    report = {
        f"jaccard_top{k}": jaccard_topk(rank_entities(freq_a), rank_entities(freq_b), k),
        "freq_cosine": frequency_cosine(freq_a, freq_b),
    }
    click.echo(json.dumps(report, indent=2))


if __name__ == "__main__":
    main()
