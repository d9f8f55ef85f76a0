"""The fact-check report: ordered blocks accumulated across pipeline stages.

A report starts with the claim block, grows by actions, evidence, and
elaboration while the check iterates, and is finalized by a justification.
Rendering to Markdown is deterministic so recorded runs replay byte-identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from pathlib import Path

from .claims import (
    Claim,
    IMAGE_REF_RE,
    file_extension_for,
    parse_image_refs,
    render_claim,
)
from .errors import AlreadyFinalized, BudgetTooSmall, UnresolvedImage

DEFAULT_CHARS_PER_TOKEN = 4
TRUNCATION_NOTICE = "[Note: older evidence was omitted here to fit the context budget.]"


class BlockKind(Enum):
    CLAIM = "claim"
    ACTIONS = "actions"
    EVIDENCE = "evidence"
    ELABORATION = "elaboration"
    VERDICT = "verdict"
    JUSTIFICATION = "justification"
    QA = "qa"


@dataclass(frozen=True)
class ReportBlock:
    """One report entry. Fields beyond ``body`` apply to specific kinds only:

    evidence: source_url, tool_name, result_date
    actions:  action_keys (canonical keys of the planned batch)
    verdict:  label
    qa:       question, answer, sources
    """

    kind: BlockKind
    body: str = ""
    source_url: str | None = None
    tool_name: str | None = None
    result_date: date | None = None
    action_keys: tuple[str, ...] = ()
    label: str | None = None
    question: str | None = None
    answer: str | None = None
    sources: tuple[str, ...] = ()


@dataclass
class Report:
    """Mutable state threaded through the stages of one fact-check."""

    claim: Claim
    blocks: list[ReportBlock] = field(default_factory=list)
    iteration: int = 0
    action_history: set[str] = field(default_factory=set)

    def __post_init__(self):
        if not self.blocks:
            self.blocks.append(ReportBlock(kind=BlockKind.CLAIM, body=render_claim(self.claim)))

    @property
    def finalized(self) -> bool:
        return any(b.kind is BlockKind.JUSTIFICATION for b in self.blocks)

    def blocks_of(self, kind: BlockKind) -> list[ReportBlock]:
        return [b for b in self.blocks if b.kind is kind]

    def verdict_label(self) -> str | None:
        for b in self.blocks:
            if b.kind is BlockKind.VERDICT:
                return b.label
        return None

    def append_block(self, block: ReportBlock) -> "Report":
        """Append a block, enforcing report shape invariants.

        Verdict and justification blocks replace a previous block of the same
        kind in place (iterative re-judging keeps exactly one of each). Any
        other append to a finalized report raises AlreadyFinalized.
        """
        for k in parse_image_refs(block.body):
            if not self.claim.registry.resolves(k):
                raise UnresolvedImage(k)
        if block.kind in (BlockKind.VERDICT, BlockKind.JUSTIFICATION):
            for i, existing in enumerate(self.blocks):
                if existing.kind is block.kind:
                    self.blocks[i] = block
                    return self
            self.blocks.append(block)
            return self
        if self.finalized:
            raise AlreadyFinalized(f"cannot append {block.kind.value} after justification")
        self.blocks.append(block)
        return self


def estimate_tokens(text: str, chars_per_token: int = DEFAULT_CHARS_PER_TOKEN) -> int:
    """Deterministic token-count estimate used for budgeting, not billing."""
    return math.ceil(len(text) / chars_per_token)


def _snapshot_block_text(block: ReportBlock, verdict_display: str | None = None) -> str:
    if block.kind is BlockKind.CLAIM:
        return f'Claim: "{block.body}"'
    if block.kind is BlockKind.ACTIONS:
        return f"Actions performed:\n{block.body}"
    if block.kind is BlockKind.EVIDENCE:
        header = f"Evidence from {block.tool_name or 'tool'}"
        details = []
        if block.source_url:
            details.append(f"source: {block.source_url}")
        if block.result_date:
            details.append(f"date: {block.result_date.isoformat()}")
        if details:
            header += f" ({', '.join(details)})"
        return f"{header}:\n{block.body}"
    if block.kind is BlockKind.ELABORATION:
        return f"Analysis:\n{block.body}"
    if block.kind is BlockKind.VERDICT:
        label = verdict_display or block.label or ""
        return f"Verdict: {label}\n{block.body}"
    if block.kind is BlockKind.JUSTIFICATION:
        return f"Justification:\n{block.body}"
    if block.kind is BlockKind.QA:
        lines = [f"Question: {block.question}", f"Answer: {block.answer}"]
        if block.sources:
            lines.append("Sources: " + ", ".join(block.sources))
        return "\n".join(lines)
    raise AssertionError(f"unhandled block kind {block.kind}")


def snapshot_for_prompt(
    report: Report,
    budget: int,
    chars_per_token: int = DEFAULT_CHARS_PER_TOKEN,
) -> str:
    """Plain-text report view fitted to a token budget.

    Evidence blocks are dropped oldest-first, then elaboration blocks
    oldest-first. The claim block always survives; a notice line marks any
    omission. ``<image:k>`` markers stay inline so the prompt layer can expand
    them to image segments.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")

    def render(dropped: set[int], notice: bool) -> str:
        chunks = []
        for i, block in enumerate(report.blocks):
            if i in dropped:
                continue
            chunks.append(_snapshot_block_text(block))
        text = "\n\n".join(chunks)
        if notice:
            text += f"\n\n{TRUNCATION_NOTICE}"
        return text

    claim_text = _snapshot_block_text(report.blocks[0])
    if estimate_tokens(claim_text, chars_per_token) > budget:
        raise BudgetTooSmall(
            f"claim alone needs {estimate_tokens(claim_text, chars_per_token)} tokens, "
            f"budget is {budget}"
        )

    full = render(set(), False)
    if estimate_tokens(full, chars_per_token) <= budget:
        return full

    dropped: set[int] = set()
    for kind in (BlockKind.EVIDENCE, BlockKind.ELABORATION):
        for i, block in enumerate(report.blocks):
            if block.kind is kind:
                dropped.add(i)
                if estimate_tokens(render(dropped, True), chars_per_token) <= budget:
                    return render(dropped, True)
    # nothing left to drop; return the best-effort remainder
    return render(dropped, True)


_SECTION_TITLES = {
    BlockKind.ACTIONS: "Actions",
    BlockKind.EVIDENCE: "Evidence",
    BlockKind.ELABORATION: "Analysis",
    BlockKind.VERDICT: "Verdict",
    BlockKind.JUSTIFICATION: "Justification",
    BlockKind.QA: "Q&A",
}


def render_markdown(report: Report, asset_dir: Path) -> tuple[str, list[Path]]:
    """Render the report to Markdown, writing image assets next to it.

    Image files are named by content hash so identical inputs yield
    byte-identical output. Links use ``<asset_dir name>/<file>`` and expect the
    asset directory to sit beside the Markdown file.
    """
    asset_dir = Path(asset_dir)
    registry = report.claim.registry
    written: list[Path] = []
    written_ids: set[int] = set()

    def replace_refs(text: str) -> str:
        def repl(match):
            k = int(match.group(1))
            ref = registry.get(k)  # raises UnresolvedImage
            fname = f"{ref.content_hash.hex()}.{file_extension_for(ref.mime)}"
            path = asset_dir / fname
            if k not in written_ids:
                asset_dir.mkdir(parents=True, exist_ok=True)
                if not path.exists() or path.read_bytes() != ref.data:
                    path.write_bytes(ref.data)
                written.append(path)
                written_ids.add(k)
            return f"![image {k}]({asset_dir.name}/{fname})"

        return IMAGE_REF_RE.sub(repl, text)

    lines: list[str] = ["# Fact-Check Report", ""]
    for block in report.blocks:
        if block.kind is BlockKind.CLAIM:
            lines += ["## Claim", "", replace_refs(block.body), ""]
            continue
        lines += [f"## {_SECTION_TITLES[block.kind]}", ""]
        if block.kind is BlockKind.ACTIONS:
            lines += ["```", block.body, "```", ""]
        elif block.kind is BlockKind.EVIDENCE:
            meta = []
            if block.tool_name:
                meta.append(f"Tool: {block.tool_name}")
            if block.source_url:
                meta.append(f"Source: [{block.source_url}]({block.source_url})")
            if block.result_date:
                meta.append(f"Published: {block.result_date.isoformat()}")
            if meta:
                lines += [" \\\n".join(meta), ""]
            lines += [replace_refs(block.body), ""]
        elif block.kind is BlockKind.VERDICT:
            display = block.label or ""
            lines += [f"**{display}**", "", replace_refs(block.body), ""]
        elif block.kind is BlockKind.QA:
            lines += [f"**Q:** {block.question}", "", f"**A:** {block.answer}", ""]
            if block.sources:
                lines += ["Sources: " + ", ".join(f"<{u}>" for u in block.sources), ""]
        else:
            lines += [replace_refs(block.body), ""]
    markdown = "\n".join(lines)
    return markdown, written
