"""Shared test utilities: deterministic image payloads and fake HTTP sessions.

Image bytes are pure functions of a seed (checksums only, no compression
library variance), so cassette fingerprints recorded once stay valid forever.
"""

from __future__ import annotations

import binascii
import hashlib
import json
import struct
import zlib


def _png_chunk(chunk_type: bytes, data: bytes) -> bytes:
    crc = binascii.crc32(chunk_type + data) & 0xFFFFFFFF
    return struct.pack(">I", len(data)) + chunk_type + data + struct.pack(">I", crc)


def _zlib_stored(raw: bytes) -> bytes:
    """A zlib stream using only uncompressed deflate blocks (stable bytes)."""
    out = [b"\x78\x01"]
    i = 0
    while True:
        block = raw[i : i + 65535]
        i += len(block)
        final = 1 if i >= len(raw) else 0
        out.append(bytes([final]))
        out.append(struct.pack("<HH", len(block), 0xFFFF - len(block)))
        out.append(block)
        if final:
            break
    out.append(struct.pack(">I", zlib.adler32(raw) & 0xFFFFFFFF))
    return b"".join(out)


def make_png(seed: int, size: int = 4) -> bytes:
    """A tiny valid grayscale PNG whose pixels derive from the seed."""
    stream = b""
    counter = 0
    while len(stream) < size * size:
        stream += hashlib.sha256(f"png:{seed}:{counter}".encode()).digest()
        counter += 1
    raw = b""
    for y in range(size):
        raw += b"\x00" + stream[y * size : (y + 1) * size]
    ihdr = struct.pack(">IIBBBBB", size, size, 8, 0, 0, 0, 0)
    return (
        b"\x89PNG\r\n\x1a\n"
        + _png_chunk(b"IHDR", ihdr)
        + _png_chunk(b"IDAT", _zlib_stored(raw))
        + _png_chunk(b"IEND", b"")
    )


def make_jpeg(seed: int) -> bytes:
    body = hashlib.sha256(f"jpeg:{seed}".encode()).digest()
    return b"\xff\xd8\xff\xe0\x00\x10JFIF\x00" + body + b"\xff\xd9"


def make_webp(seed: int) -> bytes:
    body = hashlib.sha256(f"webp:{seed}".encode()).digest()
    payload = b"VP8 " + body
    return b"RIFF" + struct.pack("<I", 4 + len(payload)) + b"WEBP" + payload


def make_gif(seed: int) -> bytes:
    body = hashlib.sha256(f"gif:{seed}".encode()).digest()
    return b"GIF89a" + body


class FakeResponse:
    def __init__(self, payload=None, content: bytes = b"", status: int = 200):
        self.status_code = status
        self._payload = payload
        self.content = content
        self.text = json.dumps(payload) if payload is not None else ""

    def json(self):
        if self._payload is None:
            raise ValueError("no JSON payload")
        return self._payload


class FakeChatSession:
    """Stands in for requests when recording model interactions.

    ``responder(prompt_text) -> str`` sees the concatenated text parts of the
    outgoing message (images elided) and returns the model reply.
    """

    def __init__(self, responder):
        self.responder = responder
        self.calls: list[str] = []

    def post(self, url, json=None, headers=None, timeout=None):
        parts = json["messages"][0]["content"]
        prompt = "".join(p["text"] for p in parts if p.get("type") == "text")
        self.calls.append(prompt)
        reply = self.responder(prompt)
        return FakeResponse({"choices": [{"message": {"content": reply}}]})


class FakeToolBackend:
    """One fake session covering search, vision, geolocation, and scraping.

    Configure with plain dicts:
      web[query]     -> list of {url, title, date?}
      images[query]  -> list of {url, title, date?}
      vision_pages   -> list of {url, title} (single-image scenarios) or
                        dict keyed by sha256 hex of the image payload
      geo            -> list of {country, score}
      pages[url]     -> {content, images: [urls], published?}
      files[url]     -> raw image bytes
      embeddings(texts) -> list of vectors
    """

    def __init__(
        self,
        web=None,
        images=None,
        vision_pages=None,
        geo=None,
        pages=None,
        files=None,
        embeddings=None,
    ):
        self.web = web or {}
        self.images = images or {}
        self.vision_pages = vision_pages if vision_pages is not None else []
        self.geo = geo or []
        self.pages = pages or {}
        self.files = files or {}
        self.embeddings = embeddings
        self.posts: list[tuple[str, dict]] = []
        self.gets: list[str] = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.posts.append((url, json))
        if url.endswith("/search"):
            hits = self.web.get(json["q"], [])
            return FakeResponse({"organic": hits})
        if url.endswith("/images"):
            hits = self.images.get(json["q"], [])
            return FakeResponse({"images": hits})
        if url.endswith("/images:annotate"):
            pages = self.vision_pages
            if isinstance(pages, dict):
                import base64

                digest = hashlib.sha256(
                    base64.b64decode(json["requests"][0]["image"]["content"])
                ).hexdigest()
                pages = pages.get(digest, [])
            return FakeResponse(
                {"responses": [{"webDetection": {"pagesWithMatchingImages": pages}}]}
            )
        if url.endswith("/locate"):
            return FakeResponse({"predictions": self.geo})
        if url.endswith("/scrape"):
            page = self.pages.get(json["url"])
            if page is None:
                return FakeResponse({"error": "not found"}, status=404)
            return FakeResponse(page)
        if url.endswith("/embeddings"):
            vectors = self.embeddings(json["input"])
            return FakeResponse({"data": [{"embedding": v} for v in vectors]})
        raise AssertionError(f"unexpected POST to {url}")

    def get(self, url, timeout=None):
        self.gets.append(url)
        if url in self.files:
            return FakeResponse(content=self.files[url])
        return FakeResponse(status=404)


class ScriptedLlm:
    """Drop-in for LlmClient in pipeline unit tests: no HTTP, no cassette."""

    def __init__(self, responder):
        from claimcheck.usage import UsageCounters

        self.responder = responder
        self.counters = UsageCounters()
        self.contents = []

    def complete(self, content) -> str:
        self.contents.append(content)
        reply = self.responder(content.text_only())
        self.counters.add_llm_call(len(content.text_only()) // 4, len(reply) // 4)
        return reply


def no_network_guard(monkeypatch):
    """Make any socket connection attempt explode (strict-replay assertion)."""
    import socket

    def boom(*args, **kwargs):
        raise AssertionError("network access attempted during strict replay")

    monkeypatch.setattr(socket.socket, "connect", boom)
    monkeypatch.setattr(socket, "create_connection", boom)
    monkeypatch.setattr(socket, "getaddrinfo", boom)
