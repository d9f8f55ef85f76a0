"""Web and image search API client."""

from __future__ import annotations

import time

import requests

from ..errors import SearchUnavailable
from ..netutil import with_retries
from ..replay import Cassette
from .base import CachedClient, parse_date_guess


class SearchClient(CachedClient):
    """Client for a keyed search API with web and image verticals.

    ``search`` returns raw hits (url, title, date string) in the engine's
    ranking order; downstream code filters, scrapes, and caps them.
    """

    kind = "search"

    def __init__(
        self,
        endpoint: str,
        api_key: str | None = None,
        cassette: Cassette | None = None,
        session: requests.Session | None = None,
        depth: int = 10,
        retries: int = 3,
        backoff_base: float = 1.0,
        timeout: float = 30.0,
        sleep=time.sleep,
    ):
        super().__init__(cassette=cassette, sleep=sleep)
        self.endpoint = endpoint.rstrip("/")
        self.api_key = api_key
        self.session = session
        self.depth = depth
        self.retries = retries
        self.backoff_base = backoff_base
        self.timeout = timeout

    def _post(self, path: str, payload: dict) -> dict:
        session = self.session or requests
        headers = {}
        if self.api_key:
            headers["X-API-KEY"] = self.api_key

        def call():
            return session.post(
                f"{self.endpoint}{path}", json=payload, headers=headers, timeout=self.timeout
            )

        response = with_retries(
            call,
            SearchUnavailable,
            retries=self.retries,
            backoff_base=self.backoff_base,
            sleep=self._sleep,
        )
        return response.json()

    def search(self, query: str, vertical: str = "web") -> list[dict]:
        """Raw hits for a query: [{url, title, date}] in ranking order."""
        if vertical not in ("web", "images"):
            raise ValueError(f"unknown search vertical {vertical!r}")
        request = {"query": query, "vertical": vertical, "depth": self.depth}

        def live() -> dict:
            path = "/search" if vertical == "web" else "/images"
            data = self._post(path, {"q": query, "num": self.depth})
            hits = []
            for item in data.get("organic", []) or data.get("images", []):
                url = item.get("link") or item.get("url")
                if not url:
                    continue
                hits.append(
                    {
                        "url": url,
                        "title": item.get("title", ""),
                        "date": item.get("date"),
                    }
                )
            return {"hits": hits}

        response = self._cached_call(request, live)
        hits = list(response["hits"])
        for hit in hits:
            hit["published"] = parse_date_guess(hit.get("date"))
        return hits
