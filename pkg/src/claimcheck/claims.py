"""Core domain types: media registry, claims, label taxonomies, verdicts.

Images travel through the system as small integer ids rendered as
``<image:k>`` markers inside text. The registry owns the id space for one
fact-check run and dedups payloads by content hash.
"""

from __future__ import annotations

import hashlib
import re
import threading
from dataclasses import dataclass
from datetime import date

from .errors import NotAnImage, UnresolvedImage

IMAGE_REF_RE = re.compile(r"<image:(\d+)>")

# magic-byte table used for sniffing; payloads are never decoded
_MAGIC = [
    (b"\x89PNG\r\n\x1a\n", "image/png"),
    (b"\xff\xd8\xff", "image/jpeg"),
    (b"GIF87a", "image/gif"),
    (b"GIF89a", "image/gif"),
]

_EXT_BY_MIME = {
    "image/png": "png",
    "image/jpeg": "jpg",
    "image/gif": "gif",
    "image/webp": "webp",
}


def sniff_image_mime(data: bytes) -> str | None:
    """Return the image mime type for ``data``, or None if not an image."""
    for magic, mime in _MAGIC:
        if data.startswith(magic):
            return mime
    if len(data) >= 12 and data[:4] == b"RIFF" and data[8:12] == b"WEBP":
        return "image/webp"
    return None


def file_extension_for(mime: str) -> str:
    return _EXT_BY_MIME.get(mime, "bin")


@dataclass(frozen=True)
class MediaRef:
    """One registered image: the ``k`` behind an ``<image:k>`` marker."""

    id: int
    data: bytes
    mime: str
    content_hash: bytes  # sha256 of data, 32 bytes
    source_url: str | None = None

    def ref(self) -> str:
        return f"<image:{self.id}>"


class MediaRegistry:
    """Per-run image store with sequential ids and content-hash dedup.

    Shareable across threads; id allocation is serialized by a lock.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._by_id: dict[int, MediaRef] = {}
        self._by_hash: dict[bytes, MediaRef] = {}
        self._next_id = 1

    def register_image(self, data: bytes, source_url: str | None = None) -> MediaRef:
        """Register an image payload, returning the existing entry on dedup.

        Raises NotAnImage when the payload fails magic-byte sniffing.
        """
        if not data:
            raise NotAnImage("empty payload")
        mime = sniff_image_mime(data)
        if mime is None:
            raise NotAnImage(f"payload of {len(data)} bytes is not a known image format")
        digest = hashlib.sha256(data).digest()
        with self._lock:
            existing = self._by_hash.get(digest)
            if existing is not None:
                return existing
            ref = MediaRef(
                id=self._next_id,
                data=data,
                mime=mime,
                content_hash=digest,
                source_url=source_url,
            )
            self._next_id += 1
            self._by_id[ref.id] = ref
            self._by_hash[digest] = ref
            return ref

    def get(self, image_id: int) -> MediaRef:
        try:
            return self._by_id[image_id]
        except KeyError:
            raise UnresolvedImage(image_id) from None

    def resolves(self, image_id: int) -> bool:
        return image_id in self._by_id

    def __len__(self) -> int:
        return len(self._by_id)

    def ids(self) -> list[int]:
        return sorted(self._by_id)

    def clone(self) -> "MediaRegistry":
        """Copy for one fact-check run so evidence images stay run-local."""
        other = MediaRegistry()
        other._by_id = dict(self._by_id)
        other._by_hash = dict(self._by_hash)
        other._next_id = self._next_id
        return other


def parse_image_refs(text: str) -> list[int]:
    """All ids appearing as ``<image:k>``, first-occurrence order, deduped.

    Malformed refs (non-decimal ids) are ignored.
    """
    seen: list[int] = []
    for match in IMAGE_REF_RE.finditer(text):
        k = int(match.group(1))
        if k not in seen:
            seen.append(k)
    return seen


def sanitize_image_refs(text: str, registry: MediaRegistry) -> tuple[str, list[str]]:
    """Strip ``<image:k>`` markers that do not resolve; report them as warnings."""
    warnings: list[str] = []

    def repl(match: re.Match) -> str:
        k = int(match.group(1))
        if registry.resolves(k):
            return match.group(0)
        warnings.append(f"stripped unknown image reference <image:{k}>")
        return ""

    return IMAGE_REF_RE.sub(repl, text), warnings


@dataclass(frozen=True)
class Claim:
    """A checkable statement: ordered text/image segments plus context fields.

    ``content`` holds strings and image ids (ints). Every id must resolve in
    ``registry``, which also owns any evidence images registered later in the
    same run.
    """

    content: tuple[str | int, ...]
    registry: MediaRegistry
    claimant: str | None = None
    date: date | None = None
    origin: str | None = None

    def __post_init__(self):
        if not self.content:
            raise ValueError("claim content must be non-empty")
        for segment in self.content:
            if isinstance(segment, int) and not self.registry.resolves(segment):
                raise UnresolvedImage(segment)

    @classmethod
    def build(
        cls,
        text: str,
        images: list[bytes] | None = None,
        registry: MediaRegistry | None = None,
        claimant: str | None = None,
        claim_date: date | None = None,
        origin: str | None = None,
    ) -> "Claim":
        """Convenience constructor: images (if any) precede the text."""
        registry = registry if registry is not None else MediaRegistry()
        segments: list[str | int] = []
        for payload in images or []:
            segments.append(registry.register_image(payload).id)
        if text:
            segments.append(text)
        return cls(
            content=tuple(segments),
            registry=registry,
            claimant=claimant,
            date=claim_date,
            origin=origin,
        )

    def image_ids(self) -> list[int]:
        return [seg for seg in self.content if isinstance(seg, int)]


def render_claim(claim: Claim) -> str:
    """Render a claim to text with media segments as ``<image:k>`` markers.

    Claimant and date, when present, follow on separate labeled lines.
    """
    parts: list[str] = []
    for segment in claim.content:
        parts.append(f"<image:{segment}>" if isinstance(segment, int) else segment)
    text = "".join(parts)
    if claim.claimant:
        text += f"\nClaimant: {claim.claimant}"
    if claim.date:
        text += f"\nDate: {claim.date.isoformat()}"
    return text


@dataclass(frozen=True)
class Label:
    label_id: str
    display: str
    definition: str


@dataclass(frozen=True)
class LabelTaxonomy:
    """Ordered decision options for one benchmark, with class definitions."""

    name: str
    labels: tuple[Label, ...]
    nei_label: str | None = None

    def __post_init__(self):
        ids = [l.label_id for l in self.labels]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate label ids in taxonomy {self.name}")
        if self.nei_label is not None and self.nei_label not in ids:
            raise ValueError(f"nei_label {self.nei_label!r} not in taxonomy {self.name}")

    def ids(self) -> list[str]:
        return [l.label_id for l in self.labels]

    def has(self, label_id: str) -> bool:
        return any(l.label_id == label_id for l in self.labels)

    def get(self, label_id: str) -> Label:
        for l in self.labels:
            if l.label_id == label_id:
                return l
        raise KeyError(label_id)

    def decision_options_text(self) -> str:
        """The [Decision Options] block given to the judge stage."""
        lines = [f"* `{l.display}`: {l.definition}" for l in self.labels]
        return "\n".join(lines)


@dataclass(frozen=True)
class Verdict:
    label: str
    rationale: str


_NEI_DEF = "The claim does not have enough information to be verified."
_SUPPORTED_DEF = "The claim is accurate based on evidence."
_REFUTED_DEF = "A claim is considered refuted when the evidence contradicts the claim."

AVERITEC = LabelTaxonomy(
    name="averitec",
    labels=(
        Label("supported", "Supported", _SUPPORTED_DEF),
        Label("refuted", "Refuted", _REFUTED_DEF),
        Label("nei", "Not Enough Information", _NEI_DEF),
        Label(
            "conflicting",
            "Conflicting Evidence/Cherrypicking",
            "The evidence is conflicting, or the claim is technically true but "
            "misleads by leaving out important context.",
        ),
    ),
    nei_label="nei",
)

MOCHEG = LabelTaxonomy(
    name="mocheg",
    labels=(
        Label("supported", "Supported", _SUPPORTED_DEF),
        Label("refuted", "Refuted", _REFUTED_DEF),
        Label("nei", "Not Enough Information", _NEI_DEF),
    ),
    nei_label="nei",
)

VERITE = LabelTaxonomy(
    name="verite",
    labels=(
        Label(
            "true",
            "True",
            "The image and the caption belong together and the caption describes "
            "the image accurately.",
        ),
        Label(
            "ooc",
            "Out-of-Context",
            "The image is authentic but used out of context: it shows a different "
            "event, place, or time than the caption describes.",
        ),
        Label(
            "miscaptioned",
            "Miscaptioned",
            "The caption misstates what the image shows, such as wrong people, "
            "date, location, or circumstances.",
        ),
    ),
    nei_label=None,
)

CLAIMREVIEW = LabelTaxonomy(
    name="claimreview",
    labels=(
        Label("refuted", "Refuted", _REFUTED_DEF),
        Label("supported", "Supported", _SUPPORTED_DEF),
        Label(
            "misleading",
            "Misleading",
            "The claim is misleading or requires additional context.",
        ),
        Label("nei", "NEI", _NEI_DEF),
    ),
    nei_label="nei",
)

_TAXONOMIES = {t.name: t for t in (AVERITEC, MOCHEG, VERITE, CLAIMREVIEW)}


def get_taxonomy(name: str) -> LabelTaxonomy:
    try:
        return _TAXONOMIES[name]
    except KeyError:
        raise KeyError(
            f"unknown taxonomy {name!r}; known: {sorted(_TAXONOMIES)}"
        ) from None
