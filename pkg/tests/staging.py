"""Builders for locally staged benchmark files with the published counts.

Synthetic content, real formats: loaders parse these exactly like the actual
releases, and the gold distributions match the reported splits.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from helpers import make_png

AVERITEC_SPLIT = [
    ("Refuted", 305),
    ("Supported", 122),
    ("Not Enough Evidence", 35),
    ("Conflicting Evidence/Cherrypicking", 38),
]

MOCHEG_SPLIT = [("refuted", 667), ("NEI", 522), ("supported", 500)]

VERITE_SPLIT = [("true", 338), ("out-of-context", 325), ("miscaptioned", 338)]

CLAIMREVIEW_SPLIT = [
    ("Refuted", 129),
    ("Supported", 89),
    ("Misleading", 61),
    ("NEI", 21),
]


def _interleave(split):
    """Round-robin over labels so ids do not cluster by class."""
    pools = [[label] * count for label, count in split]
    out = []
    i = 0
    while any(pools):
        pool = pools[i % len(pools)]
        if pool:
            out.append(pool.pop())
        i += 1
    return out


def stage_averitec(root: Path) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, label in enumerate(_interleave(AVERITEC_SPLIT)):
        rows.append(
            {
                "claim": f"Synthetic averitec claim number {i}.",
                "label": label,
                "speaker": f"Speaker {i % 7}" if i % 3 else None,
                "claim_date": f"{(i % 28) + 1:02d}-{(i % 12) + 1:02d}-2021",
            }
        )
    path = root / "dev.json"
    path.write_text(json.dumps(rows), encoding="utf-8")
    return path


def stage_mocheg(root: Path, unruled: int = 150) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    path = root / "Corpus2.csv"
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["claim_id", "Claim", "truthfulness", "ruling_outline"]
        )
        writer.writeheader()
        next_id = 0
        for label in _interleave(MOCHEG_SPLIT):
            writer.writerow(
                {
                    "claim_id": f"c{next_id}",
                    "Claim": f"Synthetic mocheg claim {next_id}.",
                    "truthfulness": label,
                    "ruling_outline": f"Ruling text for claim {next_id}.",
                }
            )
            # evidence rows repeat the claim id; loaders must collapse them
            if next_id % 5 == 0:
                writer.writerow(
                    {
                        "claim_id": f"c{next_id}",
                        "Claim": f"Synthetic mocheg claim {next_id}.",
                        "truthfulness": label,
                        "ruling_outline": f"Ruling text for claim {next_id}.",
                    }
                )
            next_id += 1
        for j in range(unruled):
            writer.writerow(
                {
                    "claim_id": f"u{j}",
                    "Claim": f"Unruled claim {j}.",
                    "truthfulness": "supported",
                    "ruling_outline": "",
                }
            )
    return root


def stage_verite(root: Path, incomplete: int = 13) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    image_name = "shared.png"
    (root / image_name).write_bytes(make_png(99))
    path = root / "VERITE.csv"
    labels = _interleave(VERITE_SPLIT)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["caption", "image_path", "label"])
        writer.writeheader()
        for i, label in enumerate(labels):
            writer.writerow(
                {
                    "caption": f"Synthetic verite caption {i}.",
                    "image_path": image_name,
                    "label": label,
                }
            )
            if i < incomplete:
                # incomplete rows: missing caption, missing image file, bad label
                broken = [
                    {"caption": "", "image_path": image_name, "label": label},
                    {"caption": f"x{i}", "image_path": "missing.png", "label": label},
                    {"caption": f"y{i}", "image_path": image_name, "label": "bogus"},
                ]
                writer.writerow(broken[i % 3])
    return root


def stage_claimreview(root: Path) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    image_name = "claim_image.png"
    (root / image_name).write_bytes(make_png(123))
    rows = []
    for i, label in enumerate(_interleave(CLAIMREVIEW_SPLIT)):
        row = {
            "id": f"cr{i}",
            "claim": f"Synthetic post-cutoff claim {i}.",
            "label": label,
            "claimant": f"Outlet {i % 11}",
            "claim_date": f"2024-{(i % 12) + 1:02d}-{(i % 28) + 1:02d}",
        }
        if i < 140:  # 140 multimodal, 160 text-only
            row["image"] = image_name
        rows.append(row)
    path = root / "claimreview2024.json"
    path.write_text(json.dumps(rows), encoding="utf-8")
    return path
