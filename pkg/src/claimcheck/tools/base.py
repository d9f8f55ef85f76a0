"""Shared evidence types and client plumbing."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from datetime import date, datetime

from ..replay import Cassette, fingerprint, intercept

MAX_IMAGES_PER_PAGE = 32

_DATE_FORMATS = ("%Y-%m-%d", "%b %d, %Y", "%B %d, %Y", "%d %b %Y", "%d %B %Y")


def parse_date_guess(raw: str | None) -> date | None:
    """Best-effort parse of a publish-date string; None when unparseable."""
    if not raw:
        return None
    raw = raw.strip()
    for fmt in _DATE_FORMATS:
        try:
            return datetime.strptime(raw, fmt).date()
        except ValueError:
            continue
    try:
        return datetime.fromisoformat(raw).date()
    except ValueError:
        return None


@dataclass(frozen=True)
class SearchResult:
    """One scraped web page ready for summarization."""

    url: str
    title: str
    content: str
    images: tuple[int, ...] = ()  # media ids, at most 32
    published: date | None = None
    tool: str = ""

    def __post_init__(self):
        if len(self.images) > MAX_IMAGES_PER_PAGE:
            raise ValueError(f"at most {MAX_IMAGES_PER_PAGE} images per result")


@dataclass(frozen=True)
class GeoDistribution:
    """Country probabilities for one image, sorted by descending probability."""

    entries: tuple[tuple[str, float], ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("geolocation distribution must be non-empty")
        probs = [p for _, p in self.entries]
        if any(p < 0 or p > 1 for p in probs):
            raise ValueError("probabilities must lie in [0, 1]")
        if any(probs[i] < probs[i + 1] for i in range(len(probs) - 1)):
            raise ValueError("entries must be sorted by descending probability")


class CachedClient:
    """Base for tool clients: replay interception plus a per-client memo.

    The memo ensures one live call per canonical request per client instance,
    independent of cassette mode.
    """

    kind = ""

    def __init__(self, cassette: Cassette | None = None, sleep=time.sleep):
        self.cassette = cassette
        self._sleep = sleep
        self._memo: dict[str, object] = {}
        self._memo_lock = threading.Lock()

    def _cached_call(self, request, live_call):
        fp = fingerprint(self.kind, request)
        with self._memo_lock:
            if fp in self._memo:
                return self._memo[fp]
        response = intercept(self.cassette, self.kind, request, live_call)
        with self._memo_lock:
            self._memo[fp] = response
        return response
