"""Shared HTTP plumbing: retry policy and key resolution."""

from __future__ import annotations

import logging
import os
import time

import requests

logger = logging.getLogger(__name__)

# sleeps between attempts: 1s, 4s, 16s (3 retries after the initial try)
DEFAULT_BACKOFFS = (1.0, 4.0, 16.0)


def with_retries(call, error_cls, retries: int = 3, backoff_base: float = 1.0, sleep=time.sleep):
    """Run ``call`` retrying transient transport failures with backoff.

    Retries cover connection errors, timeouts, HTTP 429, and HTTP 5xx. Other
    HTTP errors fail immediately. After exhausting retries, raises
    ``error_cls`` chained to the last failure.
    """
    last = None
    for attempt in range(retries + 1):
        try:
            response = call()
        except requests.RequestException as exc:
            last = exc
        else:
            if response.status_code == 429 or response.status_code >= 500:
                last = requests.HTTPError(
                    f"HTTP {response.status_code}", response=response
                )
            elif response.status_code >= 400:
                raise error_cls(f"HTTP {response.status_code}: {response.text[:200]}")
            else:
                return response
        if attempt < retries:
            delay = backoff_base * (4 ** attempt)
            logger.warning("transport failure (%s), retrying in %.0fs", last, delay)
            sleep(delay)
    raise error_cls(str(last)) from last


def resolve_api_key(key: str | None, key_env: str | None) -> str | None:
    """Literal key wins; otherwise read the named environment variable."""
    if key:
        return key
    if key_env:
        return os.environ.get(key_env)
    return None
