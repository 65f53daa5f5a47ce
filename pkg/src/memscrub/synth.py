"""Edge-to-event synthesis and QA supervision generation.

Each adjacent pair on a sampled path becomes one event statement and one QA
pair. Forget samples put the target in the answer and keep it out of the
question so span-masked losses touch only target-identifying tokens;
neighbor samples never involve the target at all. Violations are retried
once, then dropped.
"""

from __future__ import annotations

import json
import logging
import random
import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable

from memscrub.errors import (
    InfeasibleRatio,
    IoFailure,
    ResponderFailure,
    SchemaError,
    UnparseableQA,
)
from memscrub.graph import EntityId, MemoryGraph, normalize_mention
from memscrub.prompts import render_event_prompt, render_qa_prompt
from memscrub.sampler import MemoryPath, PathKind

log = logging.getLogger(__name__)


class EventStatus(str, Enum):
    OK = "ok"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class EventStatement:
    pair: tuple[str, str]
    target: str
    text: str
    status: EventStatus


@dataclass(frozen=True)
class SupervisionSample:
    kind: PathKind
    question: str
    answer: str
    target: EntityId
    obj: EntityId
    event_text: str
    source_path: tuple[EntityId, ...]
    answer_span: tuple[int, int]
    multiplicity: int = 1

    def canonical(self) -> str:
        return f"Question: {self.question} Answer: {self.answer}"


_SENTENCE_END = re.compile(r"[.!?](?=\s|$)")
_QA_SHAPE = re.compile(r"\s*Question:\s*(.+?)\s*Answer:\s*(.+?)\s*\Z", re.DOTALL)


def _first_sentence(text: str) -> str:
    match = _SENTENCE_END.search(text)
    if match:
        return text[: match.end()].strip()
    return text.strip()


def _contains_any(text: str, forms) -> bool:
    folded = text.casefold()
    return any(form.casefold() in folded for form in forms if form)


def synthesize_event(
    pair: tuple[str, str], target: str, responder
) -> EventStatement:
    """One concise factual statement connecting a path pair, or Unknown.

    The response is truncated at the first sentence terminator; a statement
    that fails to name both pair members literally is downgraded to Unknown
    rather than emitted.
    """
    prompt = render_event_prompt(target, pair[0], pair[1])
    response = responder.complete(prompt, 0).strip()
    first_line = response.splitlines()[0].strip() if response else ""
    if not response or first_line.casefold() == "unknown":
        return EventStatement(pair=pair, target=target, text="", status=EventStatus.UNKNOWN)
    text = _first_sentence(response)
    if not (_contains_any(text, [pair[0]]) and _contains_any(text, [pair[1]])):
        return EventStatement(pair=pair, target=target, text="", status=EventStatus.UNKNOWN)
    return EventStatement(pair=pair, target=target, text=text, status=EventStatus.OK)


def _parse_qa(response: str) -> tuple[str, str] | None:
    match = _QA_SHAPE.match(response)
    if not match:
        return None
    question, answer = match.group(1).strip(), match.group(2).strip()
    if not question or not answer:
        return None
    return question, answer


def _span(question: str, answer: str) -> tuple[int, int]:
    prefix = f"Question: {question} Answer: "
    return (len(prefix), len(prefix) + len(answer))


def synthesize_forget_qa(
    event: EventStatement,
    obj: str,
    target: str,
    responder,
    target_forms=None,
    source_path: tuple[EntityId, ...] = (),
) -> SupervisionSample:
    """QA pair whose answer identifies the target and whose question avoids
    every target surface form. One retry, then UnparseableQA."""
    if event.status != EventStatus.OK:
        raise ValueError("event statement must have status Ok")
    if obj not in event.pair:
        raise ValueError(f"obj {obj!r} is not a member of the event pair")
    forms = list(target_forms) if target_forms else [target]
    prompt = render_qa_prompt(target=target, obj=obj, event=event.text)
    failure = "no parseable QA"
    for attempt in range(2):
        response = responder.complete(prompt, attempt)
        parsed = _parse_qa(response)
        if parsed is None:
            failure = f"unparseable response {response[:60]!r}"
            continue
        question, answer = parsed
        if not _contains_any(answer, forms):
            failure = "answer does not name the target"
            continue
        if _contains_any(question, forms):
            failure = "question leaks a target surface form"
            continue
        return SupervisionSample(
            kind=PathKind.FORGET,
            question=question,
            answer=answer,
            target=normalize_mention(target),
            obj=normalize_mention(obj),
            event_text=event.text,
            source_path=tuple(source_path),
            answer_span=_span(question, answer),
        )
    raise UnparseableQA(f"forget QA for obj {obj!r}: {failure}")


def synthesize_neighbor_qa(
    path: MemoryPath,
    target: str,
    responder,
    displays: Callable[[EntityId], str] | None = None,
    target_forms=None,
) -> SupervisionSample:
    """QA about the path's first pair, anchored at the start node; the real
    target must appear nowhere. Rejects target-bearing paths before any
    responder call."""
    target_id = normalize_mention(target)
    if target_id in path.nodes:
        raise ValueError(f"neighbor path contains the target {target_id!r}")
    if len(path.nodes) < 2:
        raise ValueError("neighbor path needs at least two nodes")
    show = displays or (lambda nid: nid)
    d0, d1 = show(path.nodes[0]), show(path.nodes[1])
    event = synthesize_event((d0, d1), target=d0, responder=responder)
    if event.status != EventStatus.OK:
        raise UnparseableQA(f"no event statement for neighbor pair ({d0!r}, {d1!r})")
    forms = list(target_forms) if target_forms else [target]
    prompt = render_qa_prompt(target=d0, obj=d1, event=event.text)
    failure = "no parseable QA"
    for attempt in range(2):
        response = responder.complete(prompt, attempt)
        parsed = _parse_qa(response)
        if parsed is None:
            failure = f"unparseable response {response[:60]!r}"
            continue
        question, answer = parsed
        if not _contains_any(answer, [d0]):
            failure = "answer is not the start node"
            continue
        if _contains_any(question, forms) or _contains_any(answer, forms):
            failure = "target surface form leaked into a neighbor sample"
            continue
        return SupervisionSample(
            kind=PathKind.NEIGHBOR,
            question=question,
            answer=answer,
            target=target_id,
            obj=path.nodes[1],
            event_text=event.text,
            source_path=path.nodes,
            answer_span=_span(question, answer),
        )
    raise UnparseableQA(f"neighbor QA for path {path.nodes!r}: {failure}")


def _dedup(samples: list[SupervisionSample]) -> list[SupervisionSample]:
    by_key: dict[tuple[str, str], int] = {}
    out: list[SupervisionSample] = []
    for sample in samples:
        key = (sample.question, sample.answer)
        if key in by_key:
            i = by_key[key]
            out[i] = replace(out[i], multiplicity=out[i].multiplicity + 1)
        else:
            by_key[key] = len(out)
            out.append(sample)
    return out


def build_datasets(
    graph: MemoryGraph,
    forget_paths: list[MemoryPath],
    neighbor_paths: list[MemoryPath],
    responder,
) -> tuple[list[SupervisionSample], list[SupervisionSample]]:
    """Sliding-window synthesis over sampled paths.

    Every adjacent pair of every forget path yields one candidate sample
    (obj = the earlier node); each neighbor path yields one. Item failures
    are logged and skipped. Exact (question, answer) duplicates collapse into
    one sample carrying a multiplicity count, so pair sampling frequency
    survives as trainable weight without bloating files.
    """
    target_node = graph.target_node()
    target_display = target_node.display()
    target_forms = set(target_node.surface_forms) | {graph.target, target_display}
    show = graph.display

    forget: list[SupervisionSample] = []
    for pi, path in enumerate(forget_paths):
        for wi in range(len(path.nodes) - 1):
            vi, vj = path.nodes[wi], path.nodes[wi + 1]
            try:
                event = synthesize_event(
                    (show(vi), show(vj)), target_display, responder
                )
                if event.status != EventStatus.OK:
                    continue
                forget.append(
                    synthesize_forget_qa(
                        event,
                        obj=show(vi),
                        target=target_display,
                        responder=responder,
                        target_forms=target_forms,
                        source_path=path.nodes,
                    )
                )
            except (UnparseableQA, ResponderFailure) as exc:
                log.warning("forget sample %d/%d skipped: %s", pi, wi, exc)

    neighbor: list[SupervisionSample] = []
    for pi, path in enumerate(neighbor_paths):
        try:
            neighbor.append(
                synthesize_neighbor_qa(
                    path,
                    target=target_display,
                    responder=responder,
                    displays=show,
                    target_forms=target_forms,
                )
            )
        except (UnparseableQA, ResponderFailure) as exc:
            log.warning("neighbor sample %d skipped: %s", pi, exc)

    return _dedup(forget), _dedup(neighbor)


def mix_forget_set(
    samples: list[SupervisionSample],
    correctness_labels: list[bool],
    ratio: float,
    seed: int,
) -> list[SupervisionSample]:
    """Largest no-duplication mix whose correct fraction is within one sample
    of the requested ratio; selection within each class is seeded."""
    if len(samples) != len(correctness_labels):
        raise ValueError("labels must align with samples")
    if not (0.0 <= ratio <= 1.0):
        raise ValueError("ratio must be in [0, 1]")
    correct = [i for i, ok in enumerate(correctness_labels) if ok]
    incorrect = [i for i, ok in enumerate(correctness_labels) if not ok]
    if ratio >= 1.0:
        if not correct:
            raise InfeasibleRatio("ratio 1.0 with no correct-labeled samples")
        return [samples[i] for i in correct]
    if ratio <= 0.0:
        if not incorrect:
            raise InfeasibleRatio("ratio 0.0 with no incorrect-labeled samples")
        return [samples[i] for i in incorrect]
    if not correct or not incorrect:
        raise InfeasibleRatio("both label classes must be non-empty for a mixed ratio")

    best: tuple[int, int] | None = None
    for kc in range(1, len(correct) + 1):
        ki = round(kc * (1.0 - ratio) / ratio)
        ki = max(1, min(len(incorrect), ki))
        total = kc + ki
        if abs(kc / total - ratio) <= 1.0 / total:
            if best is None or total > sum(best):
                best = (kc, ki)
    if best is None:
        raise InfeasibleRatio(f"no achievable mix at ratio {ratio}")
    kc, ki = best
    rng = random.Random(seed)
    chosen = set(rng.sample(correct, kc)) | set(rng.sample(incorrect, ki))
    return [samples[i] for i in sorted(chosen)]


_FIELDS = (
    "kind",
    "question",
    "answer",
    "target",
    "obj",
    "event",
    "source_path",
    "answer_span",
    "multiplicity",
)


def emit_dataset(samples: list[SupervisionSample], destination: str) -> int:
    """JSONL emission with stable field order; returns bytes written."""
    try:
        with open(destination, "w", encoding="utf-8") as fh:
            total = 0
            for sample in samples:
                doc = {
                    "kind": sample.kind.value,
                    "question": sample.question,
                    "answer": sample.answer,
                    "target": sample.target,
                    "obj": sample.obj,
                    "event": sample.event_text,
                    "source_path": list(sample.source_path),
                    "answer_span": list(sample.answer_span),
                    "multiplicity": sample.multiplicity,
                }
                total += fh.write(json.dumps(doc, ensure_ascii=False) + "\n")
        return total
    except OSError as exc:
        raise IoFailure(f"cannot write dataset to {destination}: {exc}") from exc


def load_dataset(source: str) -> list[SupervisionSample]:
    samples: list[SupervisionSample] = []
    try:
        with open(source, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                raw = raw.strip()
                if not raw:
                    continue
                try:
                    doc = json.loads(raw)
                    samples.append(
                        SupervisionSample(
                            kind=PathKind(doc["kind"]),
                            question=doc["question"],
                            answer=doc["answer"],
                            target=doc["target"],
                            obj=doc["obj"],
                            event_text=doc["event"],
                            source_path=tuple(doc["source_path"]),
                            answer_span=(int(doc["answer_span"][0]), int(doc["answer_span"][1])),
                            multiplicity=int(doc["multiplicity"]),
                        )
                    )
                except (json.JSONDecodeError, KeyError, ValueError, IndexError) as exc:
                    raise SchemaError(f"{source}:{lineno}", f"bad sample line: {exc}") from exc
    except OSError as exc:
        raise IoFailure(f"cannot read dataset from {source}: {exc}") from exc
    return samples
