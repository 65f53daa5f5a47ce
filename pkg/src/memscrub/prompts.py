"""Prompt registry: the four fixed templates plus rendering and detection.

Templates are stored verbatim, quirks included, and every consumer goes
through this module so rendering and detection can never drift apart.
Detection regexes are compiled from the same template strings.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from memscrub.errors import MissingNeighbor, UnrecognizedPrompt


class PromptKind(str, Enum):
    HOP0 = "hop0"
    NEIGHBOR_HOP = "neighbor_hop"
    EVENT_SYNTHESIS = "event_synthesis"
    QA_SYNTHESIS = "qa_synthesis"


HOP0_TEMPLATE = (
    "Recall information from your own internal knowledge.\n"
    "Target: {target}\n"
    "Write 5-10 atomic statements about {target}."
)

NEIGHBOR_TEMPLATE = (
    "Recall information from your own internal knowledge.\n"
    "Target: {target}\n"
    "Neighbor: {neighbor}\n"
    "Write 5-10 SHORT atomic statements specifically about how {neighbor} relates to {target}."
)

EVENT_TEMPLATE = (
    "Please act as an information assistant to help users learn about pertinent details regarding the target.\n"
    "Given an anchor target, according to known knowledge about the target, and two key event about the target, please provide ONE concise factual statement about the target's main information.\n"
    "The statement should highlight details about the {target} that users may find important.\n"
    "Do NOT invent fictional or hypothetical scenarios. If you are not confident the connection is real, output UNKNOWN.\n"
    "The statement should explicitly include BOTH eventss' names (do not use pronouns), and keep it to ONE sentence.\n"
    "Anchor Target: {target}\n"
    "Event 1: {event_1}\n"
    "Event 2: {event_2}"
)

QA_TEMPLATE = (
    "Please act as an information assistant to help users learn about pertinent details.\n"
    "Given a factual statement about the target, rewrite it into ONE QA pair.\n"
    "The question should highlight an important detail from the statement about Contral Context.\n"
    "The question MUST include the target entity's name (do not use pronouns).\n"
    "Target Entity: {target}\n"
    "Central Context (Obj): {obj}\n"
    "Statement: {event}"
)

# Extraction is plumbing, not a registry template: synthetic responders do
# not recognize it, which routes extraction onto the heuristic path.
EXTRACTION_TEMPLATE = (
    "List the named entities mentioned in the text below.\n"
    "Output one entity per line and nothing else.\n"
    "Text: {text}"
)

# Optional disambiguating line inserted after "Target: ..." when the caller
# supplies a short description for the target.
_DESCRIPTION_LINE = "Description: {description}\n"

_TEMPLATES: dict[PromptKind, str] = {
    PromptKind.HOP0: HOP0_TEMPLATE,
    PromptKind.NEIGHBOR_HOP: NEIGHBOR_TEMPLATE,
    PromptKind.EVENT_SYNTHESIS: EVENT_TEMPLATE,
    PromptKind.QA_SYNTHESIS: QA_TEMPLATE,
}

_PLACEHOLDER = re.compile(r"\{(target|neighbor|event_1|event_2|obj|event|description)\}")


def _template_regex(template: str) -> re.Pattern[str]:
    """Turn a template into an anchored regex with one group per field."""
    parts: list[str] = []
    seen: set[str] = set()
    pos = 0
    for match in _PLACEHOLDER.finditer(template):
        parts.append(re.escape(template[pos : match.start()]))
        name = match.group(1)
        if name in seen:
            parts.append(f"(?P={name})")
        else:
            seen.add(name)
            parts.append(f"(?P<{name}>.+?)")
        pos = match.end()
    parts.append(re.escape(template[pos:]))
    # Allow the Description line to appear after the Target line (elicitation
    # templates only; the neighbor variant needs it before the Neighbor line).
    body = "".join(parts)
    marker = "\nNeighbor:" if "\nNeighbor:" in template else "\nWrite 5-10"
    if marker in template:
        body = body.replace(
            re.escape(marker),
            r"(?:\nDescription:\ (?P<description>.+?))?" + re.escape(marker),
            1,
        )
    return re.compile(r"\A" + body + r"\Z", re.DOTALL)


_REGEXES: dict[PromptKind, re.Pattern[str]] = {
    kind: _template_regex(tpl) for kind, tpl in _TEMPLATES.items()
}


def render_prompt(
    kind: PromptKind,
    target: str,
    neighbor: str | None = None,
    description: str | None = None,
) -> str:
    """Render an elicitation prompt.

    ``neighbor`` is required iff kind is NEIGHBOR_HOP; ``description``, when
    given, is inserted as its own line right after the Target line.
    """
    if kind == PromptKind.HOP0:
        text = HOP0_TEMPLATE.format(target=target)
    elif kind == PromptKind.NEIGHBOR_HOP:
        if neighbor is None:
            raise MissingNeighbor("neighbor-hop prompt needs a neighbor")
        text = NEIGHBOR_TEMPLATE.format(target=target, neighbor=neighbor)
    else:
        raise ValueError(f"render_prompt handles elicitation kinds only, got {kind}")
    if description is not None:
        anchor = f"Target: {target}\n"
        text = text.replace(anchor, anchor + _DESCRIPTION_LINE.format(description=description), 1)
    return text


def render_event_prompt(target: str, event_1: str, event_2: str) -> str:
    return EVENT_TEMPLATE.format(target=target, event_1=event_1, event_2=event_2)


def render_qa_prompt(target: str, obj: str, event: str) -> str:
    return QA_TEMPLATE.format(target=target, obj=obj, event=event)


def render_extraction_prompt(text: str) -> str:
    return EXTRACTION_TEMPLATE.format(text=text)


@dataclass(frozen=True)
class ParsedPrompt:
    kind: PromptKind
    fields: dict[str, str]


def parse_prompt(prompt: str) -> ParsedPrompt:
    """Detect which registry template produced a prompt and recover its fields.

    Tries the more specific templates first so the neighbor variant is not
    mistaken for hop-0. Raises UnrecognizedPrompt when nothing matches.
    """
    order = (
        PromptKind.NEIGHBOR_HOP,
        PromptKind.HOP0,
        PromptKind.EVENT_SYNTHESIS,
        PromptKind.QA_SYNTHESIS,
    )
    for kind in order:
        match = _REGEXES[kind].match(prompt)
        if match:
            fields = {k: v for k, v in match.groupdict().items() if v is not None}
            return ParsedPrompt(kind=kind, fields=fields)
    raise UnrecognizedPrompt(f"prompt matches no registry template: {prompt[:80]!r}...")
