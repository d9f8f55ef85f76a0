"""Semantic search over a local document corpus.

The on-disk index is a directory with two files:

  manifest.jsonl  one document per line: {"doc_id": int, "url": str, "text": str}
  vectors.bin     header (8-byte magic ``KBVEC001``, uint32-LE row count,
                  uint32-LE dim) followed by row-major float32-LE embeddings

Row i of the matrix belongs to manifest line i. Queries are embedded through
an external endpoint and matched by cosine similarity; ties break toward the
lower doc_id.
"""

from __future__ import annotations

import hashlib
import json
import struct
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import requests

from ..errors import EmbedderUnavailable
from ..netutil import with_retries
from ..replay import Cassette
from .base import CachedClient

MAGIC = b"KBVEC001"

MANIFEST_NAME = "manifest.jsonl"
VECTORS_NAME = "vectors.bin"


@dataclass(frozen=True)
class KbDocument:
    doc_id: int
    text: str
    url: str


class KnowledgeBase:
    def __init__(self, documents: list[KbDocument], vectors: np.ndarray):
        if vectors.ndim != 2 or vectors.shape[0] != len(documents):
            raise ValueError("vector row count must equal document count")
        self.documents = documents
        self.vectors = np.asarray(vectors, dtype=np.float32)
        self.dim = int(vectors.shape[1])

    def __len__(self) -> int:
        return len(self.documents)

    def save(self, kb_dir: str | Path) -> None:
        kb_dir = Path(kb_dir)
        kb_dir.mkdir(parents=True, exist_ok=True)
        with (kb_dir / MANIFEST_NAME).open("w", encoding="utf-8") as fh:
            for doc in self.documents:
                fh.write(
                    json.dumps(
                        {"doc_id": doc.doc_id, "url": doc.url, "text": doc.text},
                        ensure_ascii=False,
                    )
                    + "\n"
                )
        write_vectors(kb_dir / VECTORS_NAME, self.vectors)

    @classmethod
    def load(cls, kb_dir: str | Path) -> "KnowledgeBase":
        kb_dir = Path(kb_dir)
        documents = []
        with (kb_dir / MANIFEST_NAME).open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                row = json.loads(line)
                documents.append(
                    KbDocument(doc_id=int(row["doc_id"]), text=row["text"], url=row["url"])
                )
        vectors = read_vectors(kb_dir / VECTORS_NAME)
        return cls(documents, vectors)


def write_vectors(path: str | Path, vectors: np.ndarray) -> None:
    vectors = np.ascontiguousarray(vectors, dtype="<f4")
    rows, dim = vectors.shape
    with Path(path).open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", rows, dim))
        fh.write(vectors.tobytes(order="C"))


def read_vectors(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path} is not a vector index file (bad magic)")
    rows, dim = struct.unpack_from("<II", raw, len(MAGIC))
    data = np.frombuffer(raw, dtype="<f4", offset=len(MAGIC) + 8)
    if data.size != rows * dim:
        raise ValueError(f"{path} truncated: expected {rows}x{dim} floats, got {data.size}")
    return data.reshape(rows, dim)


def kb_search(kb: KnowledgeBase, query: str, embedder, k: int = 5) -> list[KbDocument]:
    """The k documents most cosine-similar to the embedded query.

    ``embedder`` maps text to a vector. Ties break toward the lower doc_id.
    Zero-norm vectors score 0 similarity.
    """
    if len(kb) == 0:
        raise ValueError("knowledge base is empty")
    if k > len(kb):
        raise ValueError(f"k={k} exceeds corpus size {len(kb)}")
    q = np.asarray(embedder(query), dtype=np.float64)
    if q.shape != (kb.dim,):
        raise ValueError(f"query embedding has shape {q.shape}, expected ({kb.dim},)")
    qn = np.linalg.norm(q)
    rows = kb.vectors.astype(np.float64)
    norms = np.linalg.norm(rows, axis=1)
    denom = norms * qn
    sims = np.where(denom > 0, rows @ q / np.where(denom > 0, denom, 1.0), 0.0)
    order = sorted(range(len(kb)), key=lambda i: (-sims[i], kb.documents[i].doc_id))
    return [kb.documents[i] for i in order[:k]]


class EmbedClient(CachedClient):
    """Text embedding endpoint client (fixed-dimension vector per text)."""

    kind = "embed"

    def __init__(
        self,
        endpoint: str,
        model_id: str = "",
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
        self.model_id = model_id
        self.api_key = api_key
        self.session = session
        self.retries = retries
        self.backoff_base = backoff_base
        self.timeout = timeout

    def embed(self, texts: list[str]) -> list[list[float]]:
        request = {"model": self.model_id, "texts": list(texts)}

        def live() -> dict:
            session = self.session or requests
            headers = {}
            if self.api_key:
                headers["Authorization"] = f"Bearer {self.api_key}"

            def call():
                return session.post(
                    f"{self.endpoint}/embeddings",
                    json={"model": self.model_id, "input": list(texts)},
                    headers=headers,
                    timeout=self.timeout,
                )

            response = with_retries(
                call,
                EmbedderUnavailable,
                retries=self.retries,
                backoff_base=self.backoff_base,
                sleep=self._sleep,
            )
            data = response.json()
            return {"embeddings": [item["embedding"] for item in data["data"]]}

        response = self._cached_call(request, live)
        return [list(map(float, vec)) for vec in response["embeddings"]]

    def embed_one(self, text: str) -> list[float]:
        return self.embed([text])[0]


def _read_corpus(corpus_path: Path) -> list[dict]:
    docs = []
    with corpus_path.open("r", encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            docs.append({"doc_id": i, "url": row.get("url", ""), "text": row["text"]})
    return docs


def build_index(
    corpus_path: str | Path,
    embed,
    out_dir: str | Path,
    batch_size: int = 32,
) -> KnowledgeBase:
    """Embed a JSONL corpus ({"text", "url"} per line) into an on-disk index.

    The build is resumable: progress is checkpointed to ``vectors.part`` and
    ``build_state.json`` in the output directory after every batch, and an
    interrupted build continues from the last complete batch. The finished
    index is byte-identical either way.
    """
    corpus_path = Path(corpus_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    docs = _read_corpus(corpus_path)
    if not docs:
        raise ValueError(f"corpus {corpus_path} holds no documents")
    corpus_digest = hashlib.sha256(corpus_path.read_bytes()).hexdigest()

    part_path = out_dir / "vectors.part"
    state_path = out_dir / "build_state.json"
    rows_done = 0
    if state_path.exists() and part_path.exists():
        state = json.loads(state_path.read_text(encoding="utf-8"))
        if state.get("corpus_digest") == corpus_digest:
            rows_done = int(state["rows_done"])
            # trim any torn tail written after the last checkpoint
            with part_path.open("rb+") as fh:
                fh.truncate(rows_done * 4 * int(state["dim"]))
        else:
            part_path.unlink()
            state_path.unlink()
    elif part_path.exists():
        part_path.unlink()

    texts = [d["text"] for d in docs]
    while rows_done < len(texts):
        batch = texts[rows_done : rows_done + batch_size]
        vectors = embed(batch)
        arr = np.asarray(vectors, dtype="<f4")
        with part_path.open("ab") as fh:
            fh.write(arr.tobytes(order="C"))
        rows_done += len(batch)
        state_path.write_text(
            json.dumps(
                {"rows_done": rows_done, "dim": int(arr.shape[1]), "corpus_digest": corpus_digest}
            ),
            encoding="utf-8",
        )

    state = json.loads(state_path.read_text(encoding="utf-8"))
    dim = int(state["dim"])
    data = np.frombuffer(part_path.read_bytes(), dtype="<f4")
    matrix = data.reshape(len(texts), dim)
    kb = KnowledgeBase(
        [KbDocument(doc_id=d["doc_id"], text=d["text"], url=d["url"]) for d in docs],
        matrix,
    )
    kb.save(out_dir)
    part_path.unlink()
    state_path.unlink()
    return kb
