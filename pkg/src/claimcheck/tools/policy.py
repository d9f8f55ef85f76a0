"""URL exclusion policy: fact-checker domains and bot-hostile platforms.

The shipped default lists live under ``claimcheck/data`` as plain text, one
substring per line. Matching is case-insensitive substring over the full URL.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path


@dataclass(frozen=True)
class DomainPolicy:
    excluded_factcheckers: tuple[str, ...]
    unsupported: tuple[str, ...]

    def blocks(self, url: str) -> bool:
        lowered = url.lower()
        return any(s in lowered for s in self.excluded_factcheckers) or any(
            s in lowered for s in self.unsupported
        )


def _parse_lines(text: str) -> tuple[str, ...]:
    lines = []
    for line in text.splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            lines.append(line)
    return tuple(lines)


def load_policy_file(path: str | Path) -> tuple[str, ...]:
    return _parse_lines(Path(path).read_text(encoding="utf-8"))


def default_policy(
    excluded_path: str | Path | None = None,
    unsupported_path: str | Path | None = None,
) -> DomainPolicy:
    """Policy from explicit files, falling back to the packaged defaults."""
    if excluded_path is not None:
        excluded = load_policy_file(excluded_path)
    else:
        excluded = _parse_lines(
            resources.files("claimcheck").joinpath("data/excluded_factcheckers.txt").read_text()
        )
    if unsupported_path is not None:
        unsupported = load_policy_file(unsupported_path)
    else:
        unsupported = _parse_lines(
            resources.files("claimcheck").joinpath("data/unsupported_domains.txt").read_text()
        )
    return DomainPolicy(excluded_factcheckers=excluded, unsupported=unsupported)


def filter_urls(urls: list[str], policy: DomainPolicy) -> list[str]:
    """Order-preserving removal of URLs matching any policy substring."""
    return [u for u in urls if not policy.blocks(u)]
