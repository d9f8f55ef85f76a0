"""Stage 3: condense raw tool output into evidence blocks.

Search results go through the model with a NONE escape hatch for irrelevant
pages. Geolocation output is structured already, so it is templated
deterministically without a model call.
"""

from __future__ import annotations

import json
import logging
from functools import lru_cache
from importlib import resources

from .claims import MediaRef, sanitize_image_refs
from .llm import LlmClient, PromptTemplate, detect_none, fill_template
from .report import BlockKind, Report, ReportBlock, snapshot_for_prompt
from .tools.base import GeoDistribution, SearchResult

logger = logging.getLogger(__name__)


def render_search_result(result: SearchResult) -> str:
    """The [Search_Result] prompt block for one scraped page."""
    lines = [f"Title: {result.title}", f"URL: {result.url}"]
    if result.published:
        lines.append(f"Date: {result.published.isoformat()}")
    if result.images:
        lines.append("Images: " + " ".join(f"<image:{k}>" for k in result.images))
    lines.append("")
    lines.append(result.content)
    return "\n".join(lines)


class Summarizer:
    def __init__(self, llm: LlmClient, template: PromptTemplate, examples: str):
        self.llm = llm
        self.template = template
        self.examples = examples

    def summarize_result(
        self,
        result: SearchResult,
        report: Report,
        snapshot_budget: int = 8000,
    ) -> ReportBlock | None:
        """Summarize one result in report context; None when irrelevant.

        Image references surviving into the summary are kept only if they
        resolve in the run registry; unknown ones are stripped with a warning.
        """
        content = fill_template(
            self.template,
            {
                "Examples": self.examples,
                "Record": snapshot_for_prompt(report, snapshot_budget),
                "Search_Result": render_search_result(result),
            },
            report.claim.registry,
        )
        response = self.llm.complete(content)
        if detect_none(response):
            return None
        body, warnings = sanitize_image_refs(response.strip(), report.claim.registry)
        for warning in warnings:
            logger.warning("summary for %s: %s", result.url, warning)
        return ReportBlock(
            kind=BlockKind.EVIDENCE,
            body=body,
            source_url=result.url,
            tool_name=result.tool,
            result_date=result.published,
        )


@lru_cache(maxsize=1)
def _country_names() -> dict[str, str]:
    raw = resources.files("claimcheck").joinpath("data/country_names.json").read_text(
        encoding="utf-8"
    )
    return json.loads(raw)


def country_name(code: str) -> str:
    return _country_names().get(code.upper(), code)


def summarize_geolocation(dist: GeoDistribution, image: MediaRef) -> ReportBlock:
    """Deterministic one-sentence evidence block for a geolocation result."""
    parts = ", ".join(
        f"{country_name(code)} ({prob * 100:.1f}%)" for code, prob in dist.entries
    )
    body = f"<image:{image.id}> Geolocation: most likely {parts}."
    return ReportBlock(kind=BlockKind.EVIDENCE, body=body, tool_name="geolocate")
