"""Build a tiny semantic-search index and query it, no services required.

Production setups embed documents through an HTTP endpoint; here a local
bag-of-words embedder stands in so the demo runs offline. The on-disk format
(manifest.jsonl + vectors.bin) is exactly what the fact-checking pipeline
consumes when a knowledge base replaces open web search.

    python3 demos/kb_quickstart.py
"""

import json
import math
import tempfile
from collections import Counter
from pathlib import Path

from claimcheck.tools import KnowledgeBase, build_index, kb_search

DOCS = [
    "The minimum wage in New Zealand rose to 18.90 dollars in April 2020.",
    "A recipe for sourdough bread with a long cold fermentation.",
    "Parliament passed the food safety amendment bill in 2020.",
    "The 2019 lunar eclipse was visible across South America.",
    "Minimum wage policies and their employment effects, a survey.",
    "How to repot a monstera without stressing the roots.",
]

VOCAB = sorted({w for d in DOCS for w in d.lower().replace(".", "").split()})


def embed(texts):
    """Toy bag-of-words embedding over the fixed vocabulary."""
    out = []
    for text in texts:
        counts = Counter(text.lower().replace(".", "").split())
        vec = [float(counts[w]) for w in VOCAB]
        norm = math.sqrt(sum(v * v for v in vec)) or 1.0
        out.append([v / norm for v in vec])
    return out


def main():
    with tempfile.TemporaryDirectory() as tmp:
        corpus = Path(tmp) / "corpus.jsonl"
        corpus.write_text(
            "\n".join(
                json.dumps({"url": f"https://corpus.example/{i}", "text": d})
                for i, d in enumerate(DOCS)
            ),
            encoding="utf-8",
        )
        kb_dir = Path(tmp) / "kb"
        kb = build_index(corpus, embed, kb_dir, batch_size=2)
        print(f"indexed {len(kb)} documents, dim {kb.dim}")
        print(f"files: {[p.name for p in sorted(kb_dir.iterdir())]}")

        reloaded = KnowledgeBase.load(kb_dir)
        for query in ("minimum wage increase 2020", "bread baking"):
            hits = kb_search(reloaded, query, lambda t: embed([t])[0], k=2)
            print(f"\nquery: {query!r}")
            for doc in hits:
                print(f"  #{doc.doc_id} {doc.text}")


if __name__ == "__main__":
    main()
