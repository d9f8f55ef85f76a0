"""Record/replay of external interactions for deterministic offline runs.

Every outbound call (model completion, search, vision, geolocation, scraping,
image fetch, embedding) is keyed by a fingerprint of its canonicalized request.
A cassette stores fingerprint -> response pairs as line-delimited JSON. Binary
payloads (image bytes) are stored in a sibling asset directory named by
content hash and referenced from the cassette, keeping the file human-diffable.

Canonicalization rules (fixed; fixtures depend on them):
  * request structures are JSON-encoded with sorted keys and compact separators
  * text values are normalized to "\\n" line endings with per-line trailing
    whitespace removed, then stripped at both ends
  * image payloads contribute their sha256 content hash, never raw bytes
"""

from __future__ import annotations

import hashlib
import json
import threading
from datetime import datetime, timezone
from pathlib import Path

from .errors import MissingInteraction

RECORD = "record"
REPLAY_STRICT = "replay-strict"
REPLAY_FALLTHROUGH = "replay-fallthrough"

MODES = (RECORD, REPLAY_STRICT, REPLAY_FALLTHROUGH)

_BYTES_KEY = "__bytes__"


def canonical_text(text: str) -> str:
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    return "\n".join(line.rstrip() for line in lines).strip()


def _canonicalize(value):
    if isinstance(value, str):
        return canonical_text(value)
    if isinstance(value, bytes):
        return {_BYTES_KEY: hashlib.sha256(value).hexdigest()}
    if isinstance(value, dict):
        return {k: _canonicalize(v) for k, v in sorted(value.items())}
    if isinstance(value, (list, tuple)):
        return [_canonicalize(v) for v in value]
    return value


def fingerprint(kind: str, request) -> str:
    """Stable digest of a canonicalized request; equal requests agree."""
    payload = json.dumps(
        {"kind": kind, "request": _canonicalize(request)},
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class Cassette:
    """A named store of recorded interactions plus a replay mode.

    The file is append-only; re-recording a fingerprint appends a fresh record
    which supersedes the old one on load. In ``replay-strict`` mode the live
    callable is never invoked, so no network traffic can occur.
    """

    def __init__(self, path: str | Path, mode: str = REPLAY_STRICT):
        if mode not in MODES:
            raise ValueError(f"unknown cassette mode {mode!r}; expected one of {MODES}")
        self.path = Path(path)
        self.mode = mode
        self.asset_dir = self.path.with_name(self.path.name + ".assets")
        self._lock = threading.Lock()
        self._responses: dict[str, object] = {}
        if self.path.exists():
            self._load()
        elif mode == REPLAY_STRICT:
            raise FileNotFoundError(f"cassette {self.path} does not exist")

    def _load(self):
        with self.path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                # later records supersede earlier ones (overwrite semantics)
                self._responses[record["fingerprint"]] = record["response"]

    def __len__(self) -> int:
        return len(self._responses)

    def has(self, fp: str) -> bool:
        return fp in self._responses

    def _store_bytes(self, data: bytes) -> dict:
        digest = hashlib.sha256(data).hexdigest()
        self.asset_dir.mkdir(parents=True, exist_ok=True)
        path = self.asset_dir / digest
        if not path.exists():
            path.write_bytes(data)
        return {_BYTES_KEY: digest}

    def _encode(self, value):
        if isinstance(value, bytes):
            return self._store_bytes(value)
        if isinstance(value, dict):
            return {k: self._encode(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [self._encode(v) for v in value]
        return value

    def _decode(self, value):
        if isinstance(value, dict):
            if set(value.keys()) == {_BYTES_KEY}:
                return (self.asset_dir / value[_BYTES_KEY]).read_bytes()
            return {k: self._decode(v) for k, v in value.items()}
        if isinstance(value, list):
            return [self._decode(v) for v in value]
        return value

    def record(self, kind: str, fp: str, response) -> None:
        encoded = self._encode(response)
        record = {
            "kind": kind,
            "fingerprint": fp,
            "response": encoded,
            "recorded_at": datetime.now(timezone.utc).isoformat(),
        }
        with self._lock:
            self._responses[fp] = encoded
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    def lookup(self, fp: str):
        with self._lock:
            encoded = self._responses[fp]
        return self._decode(encoded)


def intercept(cassette: Cassette | None, kind: str, request, live_call):
    """Route one external call through the cassette, honoring its mode.

    With no cassette the live call runs directly. ``live_call`` takes no
    arguments and returns a JSON-safe structure (bytes allowed as leaves).
    """
    if cassette is None:
        return live_call()
    fp = fingerprint(kind, request)
    if cassette.mode == REPLAY_STRICT:
        if not cassette.has(fp):
            raise MissingInteraction(kind, fp)
        return cassette.lookup(fp)
    if cassette.mode == REPLAY_FALLTHROUGH and cassette.has(fp):
        return cassette.lookup(fp)
    response = live_call()
    cassette.record(kind, fp, response)
    return response
