"""Tool-using fact-checking engine for multimodal claims."""

from .claims import (
    Claim,
    LabelTaxonomy,
    MediaRef,
    MediaRegistry,
    Verdict,
    get_taxonomy,
    parse_image_refs,
    render_claim,
)
from .pipeline import FactChecker, FactCheckOutcome, PipelineConfig, RunLog
from .report import BlockKind, Report, ReportBlock, render_markdown, snapshot_for_prompt
from .replay import Cassette, fingerprint, intercept

__version__ = "0.1.0"

__all__ = [
    "BlockKind",
    "Cassette",
    "Claim",
    "FactCheckOutcome",
    "FactChecker",
    "LabelTaxonomy",
    "MediaRef",
    "MediaRegistry",
    "PipelineConfig",
    "Report",
    "ReportBlock",
    "RunLog",
    "Verdict",
    "fingerprint",
    "get_taxonomy",
    "intercept",
    "parse_image_refs",
    "render_claim",
    "render_markdown",
    "snapshot_for_prompt",
]
