"""The retrieval-action grammar, parser, dedup, and the planning stage.

Planner output is one action per line, e.g.::

    web_search("New Zealand Food Bill 2020")
    geolocate(<image:1232>)

Text arguments sit in double quotes, image arguments use ``<image:k>``.
Unknown names and malformed lines degrade to warnings so one bad line never
sinks a batch.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from .claims import MediaRegistry
from .errors import UnknownImageRef
from .llm import LlmClient, PromptTemplate, extract_code_block, fill_template
from .report import Report, snapshot_for_prompt

logger = logging.getLogger(__name__)

WEB_SEARCH = "web_search"
IMAGE_SEARCH = "image_search"
REVERSE_SEARCH = "reverse_search"
GEOLOCATE = "geolocate"

QUERY_VARIANTS = (WEB_SEARCH, IMAGE_SEARCH)
IMAGE_VARIANTS = (REVERSE_SEARCH, GEOLOCATE)
ALL_VARIANTS = QUERY_VARIANTS + IMAGE_VARIANTS

# how each action is advertised in the [Valid Actions] prompt block
VARIANT_DESCRIPTIONS = {
    GEOLOCATE: (
        "Determine the country where an image was taken by providing an image ID.",
        "geolocate(<image:k>)",
    ),
    REVERSE_SEARCH: (
        "Perform a reverse image search on the web for similar images.",
        "reverse_search(<image:k>)",
    ),
    WEB_SEARCH: (
        "Run an open web search for related webpages.",
        'web_search("your query")',
    ),
    IMAGE_SEARCH: (
        "Retrieve related images for a given query.",
        'image_search("your query")',
    ),
}


def normalize_query(query: str) -> str:
    return " ".join(query.lower().split())


@dataclass(frozen=True)
class Action:
    """One planned tool invocation with its dedup key."""

    variant: str
    query: str | None = None
    image_id: int | None = None
    canonical_key: str = ""

    @classmethod
    def for_query(cls, variant: str, query: str) -> "Action":
        query = query.strip()
        if variant not in QUERY_VARIANTS:
            raise ValueError(f"{variant} does not take a text query")
        if not query:
            raise ValueError("query must be non-empty after trimming")
        return cls(variant=variant, query=query, canonical_key=f"{variant}:{normalize_query(query)}")

    @classmethod
    def for_image(cls, variant: str, image_id: int, registry: MediaRegistry) -> "Action":
        if variant not in IMAGE_VARIANTS:
            raise ValueError(f"{variant} does not take an image")
        if not registry.resolves(image_id):
            raise UnknownImageRef(image_id)
        digest = registry.get(image_id).content_hash.hex()
        return cls(variant=variant, image_id=image_id, canonical_key=f"{variant}:{digest}")


def serialize_action(action: Action) -> str:
    if action.variant in QUERY_VARIANTS:
        return f'{action.variant}("{action.query}")'
    return f"{action.variant}(<image:{action.image_id}>)"


_LINE_RE = re.compile(r"^\s*(?:[-*+]|\d+[.)])?\s*([A-Za-z_]\w*)\s*\((.*)\)\s*[.;,]?\s*$")
_IMAGE_ARG_RE = re.compile(r"^<image:(\d+)>$")


def _parse_query_arg(raw: str) -> str | None:
    raw = raw.strip()
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
        raw = raw[1:-1]
    raw = raw.strip()
    return raw or None


def parse_actions(
    block: str,
    registry: MediaRegistry,
    on_unknown_ref: str = "raise",
) -> tuple[list[Action], list[str]]:
    """Parse planner output into actions plus warnings for the rejects.

    A well-formed image action whose id does not resolve raises
    UnknownImageRef by default; ``on_unknown_ref="skip"`` downgrades it to a
    warning (used by the planning loop so one hallucinated id cannot abort the
    fact-check).
    """
    actions: list[Action] = []
    warnings: list[str] = []
    for raw_line in block.split("\n"):
        line = raw_line.strip().strip("`")
        if not line:
            continue
        match = _LINE_RE.match(line)
        if not match:
            warnings.append(f"malformed action line: {raw_line.strip()!r}")
            continue
        name = match.group(1).lower()
        arg = match.group(2)
        if name not in ALL_VARIANTS:
            warnings.append(f"unknown action: {name!r}")
            continue
        if name in QUERY_VARIANTS:
            query = _parse_query_arg(arg)
            if query is None:
                warnings.append(f"empty query in action line: {raw_line.strip()!r}")
                continue
            actions.append(Action.for_query(name, query))
        else:
            ref = _IMAGE_ARG_RE.match(arg.strip().strip("\"'"))
            if not ref:
                warnings.append(f"expected <image:k> argument: {raw_line.strip()!r}")
                continue
            image_id = int(ref.group(1))
            if not registry.resolves(image_id):
                if on_unknown_ref == "skip":
                    warnings.append(f"unknown image id in action: {raw_line.strip()!r}")
                    continue
                raise UnknownImageRef(image_id)
            actions.append(Action.for_image(name, image_id, registry))
    return actions, warnings


def dedup(actions: list[Action], history: set[str]) -> list[Action]:
    """Drop actions already in the history and collapse within-batch repeats."""
    seen: set[str] = set()
    result = []
    for action in actions:
        key = action.canonical_key
        if key in history or key in seen:
            continue
        seen.add(key)
        result.append(action)
    return result


def valid_actions_text(available: list[str]) -> str:
    lines = []
    for variant in available:
        description, usage = VARIANT_DESCRIPTIONS[variant]
        lines.append(f"* `{variant}`: {description} Format: `{usage}`")
    return "\n".join(lines)


class Planner:
    """Stage 1: ask the model for a batch of new retrieval actions."""

    def __init__(self, llm: LlmClient, template: PromptTemplate, examples: str):
        self.llm = llm
        self.template = template
        self.examples = examples

    def plan(
        self,
        report: Report,
        available: list[str],
        extra_rules: str = "",
        action_cap: int = 5,
        snapshot_budget: int = 8000,
    ) -> tuple[list[Action], list[str]]:
        """Propose, parse, and dedup actions; may legitimately return none."""
        if not available:
            return [], ["no actions available to plan with"]
        record = snapshot_for_prompt(report, snapshot_budget)
        content = fill_template(
            self.template,
            {
                "Extra Rules": extra_rules,
                "Valid Actions": valid_actions_text(available),
                "Examples": self.examples,
                "Record": record,
            },
            report.claim.registry,
        )
        response = self.llm.complete(content)
        block = extract_code_block(response)
        actions, warnings = parse_actions(
            block.text, report.claim.registry, on_unknown_ref="skip"
        )
        if block.fallback and not actions:
            warnings.append("planner response had no code block and no parseable lines")
        actions = [a for a in actions if a.variant in available]
        actions = dedup(actions, report.action_history)
        if len(actions) > action_cap:
            warnings.append(f"plan truncated from {len(actions)} to {action_cap} actions")
            actions = actions[:action_cap]
        for warning in warnings:
            logger.warning("planner: %s", warning)
        return actions, warnings
