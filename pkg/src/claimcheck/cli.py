"""Command-line entry points: verify one claim, run benchmarks, build KB indexes."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import datetime
from pathlib import Path

from .bench.datasets import DATASET_TAXONOMY, load_dataset
from .bench.runner import run_benchmark
from .claims import Claim, get_taxonomy
from .config import RunConfig
from .errors import ClaimCheckError, PipelineFailed
from .pipeline import RunLog
from .report import render_markdown
from .tools.kb import build_index

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PIPELINE_FAILED = 1
EXIT_USAGE = 2


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=Path, default=None, help="run config YAML file")
    parser.add_argument("--cassette", type=Path, default=None, help="interaction cassette path")
    parser.add_argument(
        "--replay",
        choices=["record", "replay-strict", "replay-fallthrough"],
        default=None,
        help="cassette mode (default: replay-strict when --cassette is given)",
    )


def _flag_overrides(args) -> dict:
    overrides: dict = {}
    if args.cassette is not None:
        overrides.setdefault("replay", {})["cassette"] = str(args.cassette)
    if args.replay is not None:
        overrides.setdefault("replay", {})["mode"] = args.replay
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="claimcheck",
        description="Verify multimodal claims with evidence tools and write a report.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="fact-check a single claim")
    verify.add_argument("--text", required=True, help="the claim text")
    verify.add_argument(
        "--image", action="append", type=Path, default=[], help="claim image (repeatable)"
    )
    verify.add_argument("--claimant", default=None)
    verify.add_argument("--date", default=None, help="claim date, YYYY-MM-DD")
    verify.add_argument("--out", type=Path, required=True, help="output directory")
    verify.add_argument("--taxonomy", default=None, help="override taxonomy name")
    verify.add_argument("--infact", action="store_true", help="run the QA-pair mode")
    _add_common(verify)

    bench = sub.add_parser("bench", help="run a benchmark sweep")
    bench.add_argument("dataset", choices=sorted(DATASET_TAXONOMY))
    bench.add_argument("--path", type=Path, required=True, help="dataset file or directory")
    bench.add_argument("--out", type=Path, required=True, help="output directory")
    bench.add_argument("--runs", type=int, default=1)
    bench.add_argument("--workers", type=int, default=1)
    bench.add_argument("--subset-size", type=int, default=None)
    bench.add_argument("--subset-seed", type=int, default=0)
    bench.add_argument("--infact", action="store_true", help="QA-pair mode (averitec only)")
    bench.add_argument("--single-turn", action="store_true", help="cap at one iteration")
    bench.add_argument("--no-planning", action="store_true", help="static action schedule")
    bench.add_argument("--no-develop", action="store_true", help="skip the develop stage")
    bench.add_argument(
        "--unimodal-develop", action="store_true", help="strip images from the develop prompt"
    )
    bench.add_argument(
        "--disable-tool",
        action="append",
        default=[],
        choices=["web_search", "image_search", "reverse_search", "geolocate"],
        help="remove a tool from the pool (repeatable)",
    )
    _add_common(bench)

    kb = sub.add_parser("kb-build", help="embed a corpus into a KB index")
    kb.add_argument("--corpus", type=Path, required=True, help="JSONL with text/url per line")
    kb.add_argument("--out", type=Path, required=True, help="index output directory")
    kb.add_argument("--batch-size", type=int, default=32)
    _add_common(kb)

    return parser


def cmd_verify(args) -> int:
    for image_path in args.image:
        if not image_path.exists():
            print(f"error: image not found: {image_path}", file=sys.stderr)
            return EXIT_USAGE
    overrides = _flag_overrides(args)
    if args.taxonomy:
        overrides.setdefault("pipeline", {})["taxonomy"] = args.taxonomy
    try:
        config = RunConfig.load(args.config, overrides)
        cassette = config.build_cassette()
        checker = config.build_fact_checker(cassette)
        claim_date = (
            datetime.strptime(args.date, "%Y-%m-%d").date() if args.date else None
        )
        claim = Claim.build(
            text=args.text,
            images=[p.read_bytes() for p in args.image],
            claimant=args.claimant,
            claim_date=claim_date,
        )
    except (ClaimCheckError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out_dir = args.out
    out_dir.mkdir(parents=True, exist_ok=True)
    run_log = RunLog()
    try:
        if args.infact:
            outcome = checker.run_infact(claim, run_log)
        else:
            outcome = checker.run(claim, run_log)
    except ValueError as exc:  # e.g. QA-pair mode with the wrong taxonomy
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PipelineFailed as exc:
        run_log.save(out_dir / "run.log")
        if exc.report is not None:
            markdown, _ = render_markdown(exc.report, out_dir / "assets")
            (out_dir / "report.md").write_text(markdown, encoding="utf-8")
        print(f"fact-check failed: {exc}", file=sys.stderr)
        return EXIT_PIPELINE_FAILED

    markdown, _ = render_markdown(outcome.report, out_dir / "assets")
    (out_dir / "report.md").write_text(markdown, encoding="utf-8")
    run_log.save(out_dir / "run.log")
    summary = {
        "claim": args.text,
        "verdict": outcome.verdict.label,
        "verdict_display": checker.config.taxonomy.get(outcome.verdict.label).display,
        "iterations": outcome.iterations_used,
        "counters": outcome.counters,
    }
    (out_dir / "outcome.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    if outcome.qa_pairs is not None:
        (out_dir / "qa.json").write_text(
            json.dumps(outcome.qa_pairs, indent=2, ensure_ascii=False), encoding="utf-8"
        )
    print(f"verdict: {summary['verdict_display']} ({outcome.iterations_used} iteration(s))")
    print(f"report: {out_dir / 'report.md'}")
    return EXIT_OK


def cmd_bench(args) -> int:
    overrides = _flag_overrides(args)
    pipeline_overrides = overrides.setdefault("pipeline", {})
    pipeline_overrides["taxonomy"] = DATASET_TAXONOMY[args.dataset]
    if args.single_turn:
        pipeline_overrides["max_iterations"] = 1
    if args.no_planning:
        pipeline_overrides["no_planning"] = True
    if args.no_develop:
        pipeline_overrides["no_develop"] = True
    if args.unimodal_develop:
        pipeline_overrides["unimodal_develop"] = True
    try:
        config = RunConfig.load(args.config, overrides)
        if args.disable_tool:
            tools = [t for t in config.data["pipeline"]["tools"] if t not in args.disable_tool]
            config.data["pipeline"]["tools"] = tools
        cassette = config.build_cassette()
        instances = load_dataset(args.dataset, args.path)
    except (ClaimCheckError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    taxonomy = get_taxonomy(DATASET_TAXONOMY[args.dataset])

    def make_checker():
        return config.build_fact_checker(cassette)

    metrics = run_benchmark(
        instances,
        make_checker,
        labels=taxonomy.ids(),
        runs=args.runs,
        workers=args.workers,
        out_dir=args.out,
        subset_size=args.subset_size,
        subset_seed=args.subset_seed,
        infact=args.infact,
        config_digest=config.digest(),
        taxonomy_name=taxonomy.name,
    )
    print(f"dataset: {args.dataset}  n={metrics.n}  failed={metrics.n_failed}")
    for i, acc in enumerate(metrics.per_run, start=1):
        print(f"run {i}: accuracy {acc:.4f}")
    print(f"mean accuracy: {metrics.mean:.4f} (std {metrics.std:.4f})")
    if metrics.verite_pairwise is not None:
        t_ooc, t_mc, t_f = metrics.verite_pairwise
        print(f"pairwise: T/OOC {t_ooc:.4f}  T/MC {t_mc:.4f}  T/F {t_f:.4f}")
    print(f"metrics file: {Path(args.out) / 'metrics.json'}")
    return EXIT_OK


def cmd_kb_build(args) -> int:
    if not args.corpus.exists():
        print(f"error: corpus not found: {args.corpus}", file=sys.stderr)
        return EXIT_USAGE
    try:
        config = RunConfig.load(args.config, _flag_overrides(args))
        cassette = config.build_cassette()
        embedder = config.build_embedder(cassette)
        kb = build_index(args.corpus, embedder.embed, args.out, batch_size=args.batch_size)
    except (ClaimCheckError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"indexed {len(kb)} documents (dim {kb.dim}) into {args.out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"verify": cmd_verify, "bench": cmd_bench, "kb-build": cmd_kb_build}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
