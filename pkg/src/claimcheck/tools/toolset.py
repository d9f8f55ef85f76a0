"""Executor turning planned actions into evidence (pipeline stage 2)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import date

from ..actions import Action, GEOLOCATE, IMAGE_SEARCH, REVERSE_SEARCH, WEB_SEARCH
from ..claims import MediaRegistry
from ..errors import ScrapeFailed
from ..usage import UsageCounters
from .base import GeoDistribution, SearchResult
from .kb import KnowledgeBase, kb_search
from .policy import DomainPolicy, filter_urls
from .scrape import ScrapeClient
from .search import SearchClient
from .vision import GeoClient, VisionClient

logger = logging.getLogger(__name__)


@dataclass
class ToolOutput:
    """What one action produced: scraped results or a geo distribution."""

    action: Action
    results: list[SearchResult] = field(default_factory=list)
    geo: GeoDistribution | None = None
    warnings: list[str] = field(default_factory=list)


class ToolSet:
    """Executes actions for one fact-check run against shared clients.

    Applies the domain policy, the temporal restriction (sources published
    after the claim date are dropped when the date is known), and the
    per-search result caps. When a knowledge base is configured, web searches
    run against it instead of the open web.
    """

    def __init__(
        self,
        registry: MediaRegistry,
        policy: DomainPolicy,
        search: SearchClient | None = None,
        vision: VisionClient | None = None,
        geo: GeoClient | None = None,
        scraper: ScrapeClient | None = None,
        kb: KnowledgeBase | None = None,
        kb_embedder=None,
        counters: UsageCounters | None = None,
        web_results: int = 3,
        image_results: int = 3,
        ris_results: int = 3,
        kb_results: int = 5,
        temporal_filtering: bool = True,
        max_total_images: int = 96,
    ):
        self.registry = registry
        self.policy = policy
        self.search = search
        self.vision = vision
        self.geo = geo
        self.scraper = scraper
        self.kb = kb
        self.kb_embedder = kb_embedder
        self.counters = counters or UsageCounters()
        self.web_results = web_results
        self.image_results = image_results
        self.ris_results = ris_results
        self.kb_results = kb_results
        self.temporal_filtering = temporal_filtering
        self.max_total_images = max_total_images
        self._claim_media = len(registry)

    def available_variants(self, enabled: list[str]) -> list[str]:
        """Drop variants whose backing clients are missing."""
        can_scrape = self.scraper is not None
        out = []
        for variant in enabled:
            if variant == WEB_SEARCH and (
                self.kb is not None or (self.search and can_scrape)
            ):
                out.append(variant)
            elif variant == IMAGE_SEARCH and self.search and can_scrape:
                out.append(variant)
            elif variant == REVERSE_SEARCH and self.vision and can_scrape:
                out.append(variant)
            elif variant == GEOLOCATE and self.geo:
                out.append(variant)
        return out

    def execute(self, action: Action, before: date | None = None) -> ToolOutput:
        cutoff = before if self.temporal_filtering else None
        if action.variant == WEB_SEARCH:
            return self._web_search(action, cutoff)
        if action.variant == IMAGE_SEARCH:
            return self._image_search(action, cutoff)
        if action.variant == REVERSE_SEARCH:
            return self._reverse_search(action, cutoff)
        if action.variant == GEOLOCATE:
            return self._geolocate(action)
        raise ValueError(f"unknown action variant {action.variant}")

    # --- individual tools ---

    def _scrape_hits(
        self,
        action: Action,
        hits: list[dict],
        cutoff: date | None,
        cap: int,
        tool: str,
        require_image: bool = False,
    ) -> ToolOutput:
        output = ToolOutput(action=action)
        urls = filter_urls([h["url"] for h in hits], self.policy)
        kept = {u for u in urls}
        for hit in hits:
            if len(output.results) >= cap:
                break
            url = hit["url"]
            if url not in kept:
                continue
            api_date = hit.get("published")
            if cutoff and api_date and api_date > cutoff:
                output.warnings.append(f"dropped {url}: published {api_date} after claim date")
                continue
            # evidence images are additionally capped per fact-check
            image_budget = max(
                0, self.max_total_images - (len(self.registry) - self._claim_media)
            )
            try:
                content, image_ids, page_date = self.scraper.scrape(
                    url, self.registry, max_images=image_budget
                )
            except ScrapeFailed as exc:
                output.warnings.append(str(exc))
                continue
            published = api_date or page_date
            if cutoff and published and published > cutoff:
                output.warnings.append(f"dropped {url}: published {published} after claim date")
                continue
            if require_image and not image_ids:
                output.warnings.append(f"dropped {url}: no scrapeable image")
                continue
            output.results.append(
                SearchResult(
                    url=url,
                    title=hit.get("title", ""),
                    content=content,
                    images=tuple(image_ids),
                    published=published,
                    tool=tool,
                )
            )
        for warning in output.warnings:
            logger.warning("%s: %s", tool, warning)
        return output

    def _web_search(self, action: Action, cutoff: date | None) -> ToolOutput:
        self.counters.add_search()
        if self.kb is not None:
            return self._kb_search(action)
        hits = self.search.search(action.query, vertical="web")
        return self._scrape_hits(action, hits, cutoff, self.web_results, WEB_SEARCH)

    def _kb_search(self, action: Action) -> ToolOutput:
        k = min(self.kb_results, len(self.kb))
        docs = kb_search(self.kb, action.query, self.kb_embedder, k=k)
        results = [
            SearchResult(
                url=doc.url,
                title=f"Knowledge base document {doc.doc_id}",
                content=doc.text,
                tool=WEB_SEARCH,
            )
            for doc in docs
        ]
        return ToolOutput(action=action, results=results)

    def _image_search(self, action: Action, cutoff: date | None) -> ToolOutput:
        self.counters.add_search()
        hits = self.search.search(action.query, vertical="images")
        return self._scrape_hits(
            action, hits, cutoff, self.image_results, IMAGE_SEARCH, require_image=True
        )

    def _reverse_search(self, action: Action, cutoff: date | None) -> ToolOutput:
        self.counters.add_search()
        image = self.registry.get(action.image_id)
        hits = self.vision.match_pages(image)
        return self._scrape_hits(action, hits, cutoff, self.ris_results, REVERSE_SEARCH)

    def _geolocate(self, action: Action) -> ToolOutput:
        image = self.registry.get(action.image_id)
        dist = self.geo.locate(image)
        return ToolOutput(action=action, geo=dist)
