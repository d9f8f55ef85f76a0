"""Benchmark dataset loaders.

Expected on-disk layouts (files follow each benchmark's public release; see
the loader docstrings):

  averitec:     <path> is ``dev.json`` (or a directory containing it)
  mocheg:       <path> is a directory with ``Corpus2.csv``
  verite:       <path> is a directory with ``VERITE.csv`` plus image files
  claimreview:  <path> is ``claimreview2024.json`` (or a directory with it)

Loaders skip malformed rows with a warning instead of failing the load.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from datetime import date, datetime
from importlib import resources
from pathlib import Path

from ..claims import Claim, MediaRegistry
from ..errors import DatasetNotFound, NotAnImage, SchemaMismatch

logger = logging.getLogger(__name__)

UNMAPPED = "unmapped"

DATASET_TAXONOMY = {
    "averitec": "averitec",
    "mocheg": "mocheg",
    "verite": "verite",
    "claimreview": "claimreview",
}


@dataclass
class BenchmarkInstance:
    id: str
    claim: Claim
    gold: str
    meta: dict = field(default_factory=dict)


def load_dataset(name: str, path: str | Path) -> list[BenchmarkInstance]:
    loaders = {
        "averitec": load_averitec,
        "mocheg": load_mocheg,
        "verite": load_verite,
        "claimreview": load_claimreview,
    }
    if name not in loaders:
        raise DatasetNotFound(f"unknown dataset {name!r}; known: {sorted(loaders)}")
    return loaders[name](path)


def _resolve_file(path: str | Path, default_name: str) -> Path:
    path = Path(path)
    if path.is_dir():
        path = path / default_name
    if not path.exists():
        raise DatasetNotFound(str(path))
    return path


def _parse_claim_date(raw, formats=("%d-%m-%Y", "%Y-%m-%d")) -> date | None:
    if not raw:
        return None
    for fmt in formats:
        try:
            return datetime.strptime(str(raw).strip(), fmt).date()
        except ValueError:
            continue
    return None


_AVERITEC_LABELS = {
    "supported": "supported",
    "refuted": "refuted",
    "not enough evidence": "nei",
    "conflicting evidence/cherrypicking": "conflicting",
}


def load_averitec(path: str | Path) -> list[BenchmarkInstance]:
    """The text-only dev split: a JSON array of claim objects.

    Each object carries ``claim``, ``label``, and optionally ``speaker`` and
    ``claim_date`` (day-month-year).
    """
    path = _resolve_file(path, "dev.json")
    try:
        rows = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(rows, list) or not rows:
        raise SchemaMismatch(f"{path}: expected a non-empty JSON array")
    instances = []
    skipped = 0
    for i, row in enumerate(rows):
        claim_text = row.get("claim")
        label = _AVERITEC_LABELS.get(str(row.get("label", "")).strip().lower())
        if not claim_text or label is None:
            skipped += 1
            continue
        claim = Claim.build(
            text=claim_text,
            claimant=row.get("speaker") or None,
            claim_date=_parse_claim_date(row.get("claim_date")),
            origin=f"averitec/{i}",
        )
        instances.append(
            BenchmarkInstance(id=f"averitec/{i}", claim=claim, gold=label, meta=dict(row))
        )
    if skipped:
        logger.warning("averitec: skipped %d malformed rows", skipped)
    if not instances:
        raise SchemaMismatch(f"{path}: no loadable rows")
    return instances


_MOCHEG_LABELS = {"supported": "supported", "refuted": "refuted", "nei": "nei"}


def load_mocheg(path: str | Path) -> list[BenchmarkInstance]:
    """The multimodal-evidence test corpus: ``Corpus2.csv``.

    Rows repeat per evidence item and are collapsed by ``claim_id``. Only
    claims with a final ruling participate (the published subset of 1689);
    when a ``ruled_ids.txt`` file sits next to the corpus it pins that subset
    explicitly, otherwise any row with a non-empty ruling qualifies.
    """
    base = Path(path)
    csv_path = _resolve_file(base, "Corpus2.csv")
    ruled_ids: set[str] | None = None
    ids_file = csv_path.parent / "ruled_ids.txt"
    if ids_file.exists():
        ruled_ids = {
            line.strip() for line in ids_file.read_text(encoding="utf-8").splitlines() if line.strip()
        }
    instances = []
    seen: set[str] = set()
    skipped = 0
    with csv_path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames:
            raise SchemaMismatch(f"{csv_path}: empty file")
        for row in reader:
            claim_id = (row.get("claim_id") or "").strip()
            claim_text = (row.get("Claim") or row.get("claim") or "").strip()
            truth = (
                row.get("cleaned_truthfulness") or row.get("truthfulness") or ""
            ).strip()
            ruling = (row.get("ruling_outline") or row.get("ruling") or "").strip()
            if not claim_id or claim_id in seen:
                continue
            label = _MOCHEG_LABELS.get(truth.lower())
            if not claim_text or label is None:
                skipped += 1
                seen.add(claim_id)
                continue
            if ruled_ids is not None:
                if claim_id not in ruled_ids:
                    seen.add(claim_id)
                    continue
            elif not ruling:
                seen.add(claim_id)
                continue
            seen.add(claim_id)
            claim = Claim.build(text=claim_text, origin=f"mocheg/{claim_id}")
            instances.append(
                BenchmarkInstance(
                    id=f"mocheg/{claim_id}",
                    claim=claim,
                    gold=label,
                    meta={"ruling": ruling},
                )
            )
    if skipped:
        logger.warning("mocheg: skipped %d malformed rows", skipped)
    if not instances:
        raise SchemaMismatch(f"{csv_path}: no loadable rows")
    return instances


_VERITE_LABELS = {
    "true": "true",
    "out-of-context": "ooc",
    "ooc": "ooc",
    "miscaptioned": "miscaptioned",
}


def load_verite(path: str | Path) -> list[BenchmarkInstance]:
    """Image-caption pairs from ``VERITE.csv`` with images on disk.

    Expected columns: ``caption``, ``image_path`` (relative to the CSV), and
    ``label`` (true / miscaptioned / out-of-context). Incomplete rows
    (missing fields, unknown labels, unreadable images) are removed and
    reported.
    """
    base = Path(path)
    csv_path = _resolve_file(base, "VERITE.csv")
    root = csv_path.parent
    instances = []
    skipped = 0
    with csv_path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames:
            raise SchemaMismatch(f"{csv_path}: empty file")
        for i, row in enumerate(reader):
            caption = (row.get("caption") or "").strip()
            image_rel = (row.get("image_path") or "").strip()
            label = _VERITE_LABELS.get((row.get("label") or "").strip().lower())
            if not caption or not image_rel or label is None:
                skipped += 1
                continue
            image_path = root / image_rel
            try:
                payload = image_path.read_bytes()
                registry = MediaRegistry()
                image_id = registry.register_image(payload, source_url=None).id
            except (OSError, NotAnImage):
                skipped += 1
                continue
            claim = Claim(
                content=(image_id, f" {caption}"),
                registry=registry,
                origin=f"verite/{i}",
            )
            instances.append(
                BenchmarkInstance(id=f"verite/{i}", claim=claim, gold=label, meta=dict(row))
            )
    if skipped:
        logger.warning("verite: removed %d incomplete rows", skipped)
    if not instances:
        raise SchemaMismatch(f"{csv_path}: no loadable rows")
    return instances


_CLAIMREVIEW_LABELS = {
    "refuted": "refuted",
    "supported": "supported",
    "misleading": "misleading",
    "nei": "nei",
}


def load_claimreview(path: str | Path) -> list[BenchmarkInstance]:
    """The post-cutoff claim set: ``claimreview2024.json``.

    A JSON array of objects with ``claim``, ``label``, and optionally ``id``,
    ``claimant``, ``claim_date`` (ISO), and ``image`` (path relative to the
    JSON file) for the multimodal subset.
    """
    path = _resolve_file(path, "claimreview2024.json")
    try:
        rows = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(rows, list) or not rows:
        raise SchemaMismatch(f"{path}: expected a non-empty JSON array")
    root = path.parent
    instances = []
    skipped = 0
    for i, row in enumerate(rows):
        claim_text = (row.get("claim") or "").strip()
        label = _CLAIMREVIEW_LABELS.get(str(row.get("label", "")).strip().lower())
        if not claim_text or label is None:
            skipped += 1
            continue
        images = []
        if row.get("image"):
            try:
                images.append((root / row["image"]).read_bytes())
            except OSError:
                skipped += 1
                continue
        instance_id = str(row.get("id", i))
        try:
            claim = Claim.build(
                text=claim_text,
                images=images,
                claimant=row.get("claimant") or None,
                claim_date=_parse_claim_date(row.get("claim_date"), ("%Y-%m-%d",)),
                origin=f"claimreview/{instance_id}",
            )
        except NotAnImage:
            skipped += 1
            continue
        instances.append(
            BenchmarkInstance(
                id=f"claimreview/{instance_id}", claim=claim, gold=label, meta=dict(row)
            )
        )
    if skipped:
        logger.warning("claimreview: skipped %d malformed rows", skipped)
    if not instances:
        raise SchemaMismatch(f"{path}: no loadable rows")
    return instances


def _default_label_rules() -> dict[str, str]:
    raw = resources.files("claimcheck").joinpath("data/claimreview_label_rules.json").read_text(
        encoding="utf-8"
    )
    return json.loads(raw)


def map_claimreview_label(raw_rating: str, rules: dict[str, str] | None = None) -> str:
    """Map a publisher's free-form rating to the four-class taxonomy.

    Case-insensitive exact lookup in the rules table; anything else comes back
    as ``unmapped`` for manual review.
    """
    table = rules if rules is not None else _default_label_rules()
    return table.get(raw_rating.strip().lower(), UNMAPPED)
