"""Page scraping: text extraction plus referenced-image download.

Scrape and image-fetch failures are non-fatal (the affected result is
dropped), so they are stored as error responses rather than raised inside the
interception layer; a recorded failure then replays identically.
"""

from __future__ import annotations

import logging
import time
from datetime import date

import requests

from ..claims import MediaRegistry
from ..errors import ClaimCheckError, NotAnImage, ScrapeFailed
from ..netutil import with_retries
from ..replay import Cassette
from .base import CachedClient, MAX_IMAGES_PER_PAGE, parse_date_guess

logger = logging.getLogger(__name__)


class _Transport(ClaimCheckError):
    """Internal marker for retryable transport failures."""


class ScrapeClient(CachedClient):
    """Client for a scraping service that returns page text and asset URLs.

    Referenced images are downloaded in document order, capped at 32 per page,
    and registered into the run's media registry.
    """

    kind = "scrape"

    def __init__(
        self,
        endpoint: str,
        api_key: str | None = None,
        cassette: Cassette | None = None,
        session: requests.Session | None = None,
        retries: int = 3,
        backoff_base: float = 1.0,
        timeout: float = 60.0,
        sleep=time.sleep,
    ):
        super().__init__(cassette=cassette, sleep=sleep)
        self.endpoint = endpoint.rstrip("/")
        self.api_key = api_key
        self.session = session
        self.retries = retries
        self.backoff_base = backoff_base
        self.timeout = timeout

    def _scrape_page(self, url: str) -> dict:
        request = {"url": url}

        def live() -> dict:
            session = self.session or requests
            headers = {}
            if self.api_key:
                headers["Authorization"] = f"Bearer {self.api_key}"

            def call():
                return session.post(
                    f"{self.endpoint}/scrape",
                    json={"url": url},
                    headers=headers,
                    timeout=self.timeout,
                )

            try:
                response = with_retries(
                    call,
                    _Transport,
                    retries=self.retries,
                    backoff_base=self.backoff_base,
                    sleep=self._sleep,
                )
            except _Transport as exc:
                return {"error": str(exc)}
            data = response.json()
            if "content" not in data:
                return {"error": "scrape service returned no content"}
            return {
                "content": data["content"],
                "images": list(data.get("images", [])),
                "published": data.get("published"),
            }

        page = self._cached_call(request, live)
        if "error" in page:
            raise ScrapeFailed(url, page["error"])
        return page

    def _fetch_image(self, url: str) -> bytes:
        request = {"image_url": url}

        def live():
            session = self.session or requests

            def call():
                return session.get(url, timeout=self.timeout)

            try:
                response = with_retries(
                    call,
                    _Transport,
                    retries=self.retries,
                    backoff_base=self.backoff_base,
                    sleep=self._sleep,
                )
            except _Transport as exc:
                return {"error": str(exc)}
            return response.content

        response = self._cached_call(request, live)
        if isinstance(response, dict):
            raise ScrapeFailed(url, response.get("error", "fetch failed"))
        return response

    def scrape(
        self, url: str, registry: MediaRegistry, max_images: int = MAX_IMAGES_PER_PAGE
    ) -> tuple[str, list[int], date | None]:
        """Scrape one page: (text content, registered image ids, publish date).

        Raises ScrapeFailed when the page itself is unreachable; individual
        image download failures only drop that image.
        """
        page = self._scrape_page(url)
        cap = min(max_images, MAX_IMAGES_PER_PAGE)
        image_ids: list[int] = []
        for image_url in page["images"]:
            if len(image_ids) >= cap:
                break
            try:
                data = self._fetch_image(image_url)
                ref = registry.register_image(data, source_url=image_url)
            except (ScrapeFailed, NotAnImage) as exc:
                logger.warning("dropping image %s from %s: %s", image_url, url, exc)
                continue
            if ref.id not in image_ids:
                image_ids.append(ref.id)
        return page["content"], image_ids, parse_date_guess(page.get("published"))
