"""Multi-run benchmark executor with per-claim report output."""

from __future__ import annotations

import hashlib
import json
import logging
import re
import statistics
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from ..errors import PipelineFailed
from ..pipeline import RunLog
from ..report import render_markdown
from .datasets import BenchmarkInstance
from .metrics import MetricsReport, confusion_matrix, verite_pairwise

logger = logging.getLogger(__name__)


def seeded_subset(
    instances: list[BenchmarkInstance], size: int, seed: int
) -> list[BenchmarkInstance]:
    """Reproducible, platform-independent sample: rank by a seeded digest."""
    if size >= len(instances):
        return list(instances)
    ranked = sorted(
        instances,
        key=lambda inst: hashlib.sha256(f"{seed}:{inst.id}".encode("utf-8")).hexdigest(),
    )
    return ranked[:size]


def _safe_name(instance_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", instance_id)


def _write_claim_output(run_dir: Path, instance, outcome, run_log, failure):
    """Write report.md, assets, run.log, and the outcome summary for one claim."""
    claim_dir = run_dir / _safe_name(instance.id)
    claim_dir.mkdir(parents=True, exist_ok=True)
    report = outcome.report if outcome is not None else getattr(failure, "report", None)
    if report is not None:
        # partial reports are still rendered for debuggability
        markdown, _ = render_markdown(report, claim_dir / "assets")
        (claim_dir / "report.md").write_text(markdown, encoding="utf-8")
    if run_log is not None:
        run_log.save(claim_dir / "run.log")
    summary = {
        "id": instance.id,
        "gold": instance.gold,
        "verdict": outcome.verdict.label if outcome is not None else None,
        "iterations": outcome.iterations_used if outcome is not None else None,
        "counters": outcome.counters if outcome is not None else {},
        "failure": str(failure) if failure is not None else None,
    }
    (claim_dir / "outcome.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    if outcome is not None and outcome.qa_pairs is not None:
        (claim_dir / "qa.json").write_text(
            json.dumps(outcome.qa_pairs, indent=2, ensure_ascii=False), encoding="utf-8"
        )


def _check_one(make_checker, instance: BenchmarkInstance, infact: bool):
    checker = make_checker()
    run_log = RunLog()
    try:
        if infact:
            outcome = checker.run_infact(instance.claim, run_log)
        else:
            outcome = checker.run(instance.claim, run_log)
        return outcome, run_log, None
    except PipelineFailed as exc:
        logger.warning("fact-check failed for %s: %s", instance.id, exc)
        return None, run_log, exc


def run_benchmark(
    instances: list[BenchmarkInstance],
    make_checker,
    labels: list[str],
    runs: int = 1,
    workers: int = 1,
    out_dir: str | Path | None = None,
    subset_size: int | None = None,
    subset_seed: int = 0,
    infact: bool = False,
    config_digest: str = "",
    taxonomy_name: str = "",
) -> MetricsReport:
    """Fact-check every instance ``runs`` times and aggregate accuracies.

    ``make_checker`` builds a fresh FactChecker per task (tasks may run in
    parallel and must not share per-run state). Failed checks count as wrong
    with a recorded reason; they never abort the sweep. The confusion matrix
    covers the scored instances of the last run.
    """
    if subset_size is not None:
        instances = seeded_subset(instances, subset_size, subset_seed)
    if not instances:
        raise ValueError("no instances to evaluate")

    out_dir = Path(out_dir) if out_dir is not None else None
    per_run_acc: list[float] = []
    last_records = []

    for run_idx in range(1, runs + 1):
        run_dir = out_dir / f"run_{run_idx}" if out_dir is not None else None

        def task(instance):
            outcome, run_log, failure = _check_one(make_checker, instance, infact)
            if run_dir is not None:
                _write_claim_output(run_dir, instance, outcome, run_log, failure)
            pred = outcome.verdict.label if outcome is not None else None
            return instance, pred, failure

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                records = list(pool.map(task, instances))
        else:
            records = [task(instance) for instance in instances]

        correct = sum(pred == inst.gold for inst, pred, _ in records)
        per_run_acc.append(correct / len(records))
        last_records = records

    scored = [(inst, pred) for inst, pred, _ in last_records if pred is not None]
    failures = [
        {"id": inst.id, "reason": str(failure)}
        for inst, pred, failure in last_records
        if pred is None
    ]
    if scored:
        confusion = confusion_matrix(
            [p for _, p in scored], [i.gold for i, _ in scored], labels
        ).tolist()
    else:
        confusion = [[0] * len(labels) for _ in labels]

    pairwise = None
    if taxonomy_name == "verite" and scored:
        pairwise = verite_pairwise([p for _, p in scored], [i.gold for i, _ in scored])

    report = MetricsReport(
        n=len(instances),
        labels=list(labels),
        per_run=per_run_acc,
        mean=statistics.fmean(per_run_acc),
        std=statistics.pstdev(per_run_acc) if len(per_run_acc) > 1 else 0.0,
        confusion=confusion,
        n_failed=len(failures),
        failures=failures,
        verite_pairwise=pairwise,
        config_digest=config_digest,
    )
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "metrics.json").write_text(
            json.dumps(report.to_dict(), indent=2), encoding="utf-8"
        )
    return report
