"""Reverse image search and geolocation service clients."""

from __future__ import annotations

import base64
import time

import requests

from ..claims import MediaRef
from ..errors import GeoServiceUnavailable, VisionApiUnavailable
from ..netutil import with_retries
from ..replay import Cassette
from .base import CachedClient, GeoDistribution


class VisionClient(CachedClient):
    """Finds web pages containing a given image via a vision-match endpoint."""

    kind = "vision"

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

    def match_pages(self, image: MediaRef) -> list[dict]:
        """Pages containing the image: [{url, title}] in API order."""
        request = {"image": image.data}

        def live() -> dict:
            session = self.session or requests
            payload = {
                "requests": [
                    {
                        "image": {"content": base64.b64encode(image.data).decode("ascii")},
                        "features": [{"type": "WEB_DETECTION"}],
                    }
                ]
            }
            headers = {}
            if self.api_key:
                headers["Authorization"] = f"Bearer {self.api_key}"

            def call():
                return session.post(
                    f"{self.endpoint}/images:annotate",
                    json=payload,
                    headers=headers,
                    timeout=self.timeout,
                )

            response = with_retries(
                call,
                VisionApiUnavailable,
                retries=self.retries,
                backoff_base=self.backoff_base,
                sleep=self._sleep,
            )
            data = response.json()
            pages = []
            try:
                detected = data["responses"][0].get("webDetection", {})
            except (KeyError, IndexError):
                detected = {}
            for page in detected.get("pagesWithMatchingImages", []):
                url = page.get("url")
                if url:
                    pages.append({"url": url, "title": page.get("pageTitle", "")})
            return {"pages": pages}

        response = self._cached_call(request, live)
        return list(response["pages"])


class GeoClient(CachedClient):
    """Estimates the most probable source countries of an image."""

    kind = "geo"

    def __init__(
        self,
        endpoint: str,
        api_key: str | None = None,
        cassette: Cassette | None = None,
        session: requests.Session | None = None,
        top_k: int = 5,
        retries: int = 3,
        backoff_base: float = 1.0,
        timeout: float = 60.0,
        sleep=time.sleep,
    ):
        super().__init__(cassette=cassette, sleep=sleep)
        self.endpoint = endpoint.rstrip("/")
        self.api_key = api_key
        self.session = session
        self.top_k = top_k
        self.retries = retries
        self.backoff_base = backoff_base
        self.timeout = timeout

    def locate(self, image: MediaRef) -> GeoDistribution:
        """Top-k country distribution, renormalized when scores overshoot 1."""
        request = {"image": image.data, "top_k": self.top_k}

        def live() -> dict:
            session = self.session or requests
            payload = {
                "image": base64.b64encode(image.data).decode("ascii"),
                "top_k": self.top_k,
            }
            headers = {}
            if self.api_key:
                headers["Authorization"] = f"Bearer {self.api_key}"

            def call():
                return session.post(
                    f"{self.endpoint}/locate", json=payload, headers=headers, timeout=self.timeout
                )

            response = with_retries(
                call,
                GeoServiceUnavailable,
                retries=self.retries,
                backoff_base=self.backoff_base,
                sleep=self._sleep,
            )
            data = response.json()
            predictions = [
                {"country": p["country"], "score": float(p["score"])}
                for p in data.get("predictions", [])
            ]
            return {"predictions": predictions}

        response = self._cached_call(request, live)
        return normalize_geo(response["predictions"], self.top_k)


def normalize_geo(predictions: list[dict], top_k: int) -> GeoDistribution:
    """Sort, truncate to top_k, renormalize overshooting scores, clip to [0,1]."""
    scores = [(p["country"], max(0.0, float(p["score"]))) for p in predictions]
    scores.sort(key=lambda cs: (-cs[1], cs[0]))
    scores = scores[:top_k]
    total = sum(s for _, s in scores)
    if total > 1.0:
        scores = [(c, s / total) for c, s in scores]
    scores = [(c, min(1.0, s)) for c, s in scores]
    return GeoDistribution(entries=tuple(scores))
