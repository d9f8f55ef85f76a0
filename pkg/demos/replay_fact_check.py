"""Replay a recorded multimodal fact-check end to end, fully offline.

The repository ships cassettes of every external interaction (model calls,
reverse image search, geolocation, scraping) for a claim about the 2024
shooting of Robert Fico. This script drives the whole six-stage pipeline
against one of them and prints the resulting Markdown report.

Run from the repository root:

    python3 demos/replay_fact_check.py
"""

import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / "tests"))

from claimcheck.replay import Cassette, REPLAY_STRICT

from scenarios import SCENARIOS, build_checker


def main():
    scenario = SCENARIOS["claimreview_plus"]
    cassette = Cassette(scenario.cassette_path(), mode=REPLAY_STRICT)
    checker = build_checker(scenario, cassette)

    claim = scenario.make_claim()
    outcome = checker.run(claim)

    print(f"verdict:    {outcome.verdict.label}")
    print(f"iterations: {outcome.iterations_used}")
    print(f"usage:      {outcome.counters}")
    print()

    with tempfile.TemporaryDirectory() as tmp:
        from claimcheck.report import render_markdown

        markdown, assets = render_markdown(outcome.report, Path(tmp) / "assets")
        print(markdown)
        print(f"\n({len(assets)} image asset(s) were written alongside the report)")


if __name__ == "__main__":
    main()
