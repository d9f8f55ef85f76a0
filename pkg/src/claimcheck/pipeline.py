"""The six-stage fact-checking orchestrator.

One fact-check is an iterative loop: plan actions (S1), execute tools (S2),
summarize results into evidence (S3), develop the analysis (S4), and judge
(S5). A "not enough information" verdict loops back to planning until the
iteration cap; the final verdict is then justified (S6) and the report
finalized. Every stage emits a structured run-log record so control flow is
assertable offline.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

from .actions import (
    ALL_VARIANTS,
    Action,
    GEOLOCATE,
    IMAGE_SEARCH,
    IMAGE_VARIANTS,
    Planner,
    WEB_SEARCH,
    serialize_action,
)
from .claims import Claim, LabelTaxonomy, Verdict, sanitize_image_refs
from .errors import (
    ContextOverflow,
    EmbedderUnavailable,
    EndpointUnavailable,
    GeoServiceUnavailable,
    MissingInteraction,
    NoChoiceFound,
    PipelineFailed,
    SearchUnavailable,
    UnjudgeableClaim,
    VisionApiUnavailable,
)
from .llm import (
    ChatContent,
    LlmClient,
    TextSegment,
    detect_none,
    extract_choice,
    fill_template,
    load_prompt_asset,
    load_templates,
)
from .report import BlockKind, Report, ReportBlock, snapshot_for_prompt
from .summarize import Summarizer, render_search_result, summarize_geolocation
from .tools.toolset import ToolSet
from .usage import UsageCounters

logger = logging.getLogger(__name__)

_GATEWAY_ERRORS = (
    EndpointUnavailable,
    ContextOverflow,
    MissingInteraction,
    SearchUnavailable,
    VisionApiUnavailable,
    GeoServiceUnavailable,
    EmbedderUnavailable,
)

JUDGE_FORMAT_REMINDER = (
    "\n\nReminder: end your answer with exactly one of the decision options, "
    "enclosed in backticks like `this`."
)

FAILED_JUSTIFICATION = (
    "No justification could be generated because the model endpoint failed "
    "while summarizing the fact-check. The verdict above rests on the "
    "evidence recorded in this report."
)


@dataclass
class PipelineConfig:
    """Knobs for one fact-check; ablation switches are first-class flags."""

    taxonomy: LabelTaxonomy
    max_iterations: int = 3
    actions_per_iteration: int = 5
    extra_rules: str = ""
    enabled_tools: tuple[str, ...] = ALL_VARIANTS
    temporal_filtering: bool = True
    snapshot_budget: int = 8000
    no_planning: bool = False      # static schedule, one run of each tool per iteration
    no_develop: bool = False       # skip S4
    unimodal_develop: bool = False  # strip images from the S4 prompt
    infact_questions: int = 10
    infact_results_per_question: int = 5

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass
class FactCheckOutcome:
    report: Report
    verdict: Verdict
    iterations_used: int
    qa_pairs: list[dict] | None = None
    counters: dict = field(default_factory=dict)


class RunLog:
    """Line-delimited structured trace of one fact-check."""

    def __init__(self):
        self.records: list[dict] = []

    def log(self, stage: str, event: str, **detail) -> None:
        payload = json.dumps(detail, sort_keys=True, ensure_ascii=False, default=str)
        self.records.append(
            {
                "ts": datetime.now(timezone.utc).isoformat(),
                "stage": stage,
                "event": event,
                "detail": detail,
                "digest": hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16],
            }
        )

    def stages(self) -> list[str]:
        return [r["stage"] for r in self.records]

    def of_stage(self, stage: str) -> list[dict]:
        return [r for r in self.records if r["stage"] == stage]

    def save(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            for record in self.records:
                fh.write(json.dumps(record, ensure_ascii=False, default=str) + "\n")


class FactChecker:
    """Runs fact-checks against a model gateway and a tool executor.

    ``toolset_factory(registry, counters) -> ToolSet`` binds the shared tool
    clients to one run's media registry; each call to ``run`` clones the
    claim's registry so concurrent checks never share mutable state.
    """

    def __init__(
        self,
        llm: LlmClient,
        toolset_factory,
        config: PipelineConfig,
        templates: dict | None = None,
        plan_examples: str | None = None,
        summarize_examples: str | None = None,
    ):
        self.llm = llm
        self.toolset_factory = toolset_factory
        self.config = config
        self.templates = templates or load_templates()
        self.plan_examples = (
            plan_examples if plan_examples is not None else load_prompt_asset("examples_plan.md")
        )
        self.summarize_examples = (
            summarize_examples
            if summarize_examples is not None
            else load_prompt_asset("examples_summarize.md")
        )

    # --- stage helpers ---

    def _snapshot(self, report: Report) -> str:
        return snapshot_for_prompt(report, self.config.snapshot_budget)

    def _available_variants(self, toolset: ToolSet, report: Report) -> list[str]:
        available = toolset.available_variants(list(self.config.enabled_tools))
        registry = report.claim.registry
        out = []
        for variant in available:
            if variant in IMAGE_VARIANTS:
                ids = registry.ids()
                if not ids:
                    continue
                # a variant is exhausted once every registered image was used
                keys = {
                    f"{variant}:{registry.get(i).content_hash.hex()}" for i in ids
                }
                if keys <= report.action_history:
                    continue
            out.append(variant)
        return out

    def _static_schedule(self, toolset: ToolSet, report: Report) -> list[Action]:
        """The no-planning ablation: every available tool once per iteration."""
        claim = report.claim
        query = " ".join(
            seg.strip() for seg in claim.content if isinstance(seg, str) and seg.strip()
        )
        image_ids = claim.image_ids()
        actions: list[Action] = []
        for variant in toolset.available_variants(list(self.config.enabled_tools)):
            if variant in (WEB_SEARCH, IMAGE_SEARCH):
                if query:
                    actions.append(Action.for_query(variant, query))
            elif image_ids:
                actions.append(Action.for_image(variant, image_ids[0], claim.registry))
        return actions

    def develop(self, report: Report, run_log: RunLog) -> ReportBlock:
        """Stage 4: step-by-step reasoning over the gathered evidence."""
        content = fill_template(
            self.templates["Develop"],
            {"Record": self._snapshot(report)},
            report.claim.registry,
        )
        if self.config.unimodal_develop:
            content = content.without_images()
        n_images = len(content.images())
        response = self.llm.complete(content)
        body, _ = sanitize_image_refs(response.strip(), report.claim.registry)
        block = ReportBlock(kind=BlockKind.ELABORATION, body=body)
        report.append_block(block)
        run_log.log("S4", "developed", n_images=n_images, chars=len(body))
        return block

    def judge(self, report: Report, run_log: RunLog | None = None) -> Verdict:
        """Stage 5: pick a decision option; one retry with a format reminder."""
        taxonomy = self.config.taxonomy
        bindings = {
            "Extra Rules": self.config.extra_rules,
            "Decision Options": taxonomy.decision_options_text(),
            "Record": self._snapshot(report),
        }
        content = fill_template(self.templates["Judge"], bindings, report.claim.registry)
        response = self.llm.complete(content)
        try:
            label_id = extract_choice(response, taxonomy)
        except NoChoiceFound:
            retry_content = ChatContent(
                content.segments + [TextSegment(JUDGE_FORMAT_REMINDER)]
            )
            response = self.llm.complete(retry_content)
            try:
                label_id = extract_choice(response, taxonomy)
            except NoChoiceFound:
                if taxonomy.nei_label is None:
                    raise UnjudgeableClaim(
                        "verdict extraction failed twice and the taxonomy has no "
                        "'not enough information' fallback"
                    ) from None
                label_id = taxonomy.nei_label
                logger.warning("verdict extraction failed twice; defaulting to %s", label_id)
        rationale, _ = sanitize_image_refs(response.strip(), report.claim.registry)
        verdict = Verdict(label=label_id, rationale=rationale)
        report.append_block(
            ReportBlock(
                kind=BlockKind.VERDICT,
                body=rationale,
                label=taxonomy.get(label_id).display,
            )
        )
        if run_log is not None:
            run_log.log("S5", "judged", label=label_id)
        return verdict

    def justify(self, report: Report, run_log: RunLog | None = None) -> ReportBlock:
        """Stage 6: concise human-facing summary; degrades on gateway failure."""
        degraded = False
        try:
            content = fill_template(
                self.templates["Justify"],
                {"Record": self._snapshot(report)},
                report.claim.registry,
            )
            response = self.llm.complete(content)
            body, _ = sanitize_image_refs(response.strip(), report.claim.registry)
        except _GATEWAY_ERRORS as exc:
            logger.warning("justification degraded: %s", exc)
            body = FAILED_JUSTIFICATION
            degraded = True
        block = ReportBlock(kind=BlockKind.JUSTIFICATION, body=body)
        report.append_block(block)
        if run_log is not None:
            run_log.log("S6", "justified", degraded=degraded)
        return block

    def _summarize_output(self, output, report: Report, run_log: RunLog, summarizer) -> int:
        added = 0
        if output.geo is not None:
            image = report.claim.registry.get(output.action.image_id)
            block = summarize_geolocation(output.geo, image)
            report.append_block(block)
            run_log.log("S3", "evidence", tool=GEOLOCATE, kept=True)
            return 1
        for result in output.results:
            block = summarizer.summarize_result(
                result, report, snapshot_budget=self.config.snapshot_budget
            )
            if block is None:
                run_log.log("S3", "evidence", tool=result.tool, url=result.url, kept=False)
                continue
            report.append_block(block)
            run_log.log("S3", "evidence", tool=result.tool, url=result.url, kept=True)
            added += 1
        return added

    # --- entry points ---

    def _llm_usage(self) -> tuple[int, int, int]:
        c = self.llm.counters
        return c.llm_calls, c.input_tokens_est, c.output_tokens_est

    def _usage_delta(self, before: tuple[int, int, int], counters: UsageCounters) -> dict:
        calls, tokens_in, tokens_out = self._llm_usage()
        return {
            "llm_calls": calls - before[0],
            "input_tokens_est": tokens_in - before[1],
            "output_tokens_est": tokens_out - before[2],
            "searches": counters.searches,
        }

    def run(self, claim: Claim, run_log: RunLog | None = None) -> FactCheckOutcome:
        """Full fact-check: iterate S1..S5 until decided, then justify."""
        run_log = run_log if run_log is not None else RunLog()
        counters = UsageCounters()
        llm_before = self._llm_usage()
        claim = replace(claim, registry=claim.registry.clone())
        report = Report(claim=claim)
        try:
            toolset = self.toolset_factory(claim.registry, counters)
            toolset.temporal_filtering = self.config.temporal_filtering
            planner = Planner(self.llm, self.templates["Plan"], self.plan_examples)
            summarizer = Summarizer(
                self.llm, self.templates["Summarize"], self.summarize_examples
            )
            taxonomy = self.config.taxonomy
            verdict: Verdict | None = None
            iterations_used = 0

            for iteration in range(1, self.config.max_iterations + 1):
                report.iteration = iteration
                iterations_used = iteration
                run_log.log("S1", "iteration_start", iteration=iteration)
                if self.config.no_planning:
                    actions = self._static_schedule(toolset, report)
                    warnings: list[str] = []
                else:
                    actions, warnings = planner.plan(
                        report,
                        self._available_variants(toolset, report),
                        extra_rules=self.config.extra_rules,
                        action_cap=self.config.actions_per_iteration,
                        snapshot_budget=self.config.snapshot_budget,
                    )
                run_log.log(
                    "S1",
                    "planned",
                    actions=[a.canonical_key for a in actions],
                    warnings=warnings,
                )
                if actions:
                    report.append_block(
                        ReportBlock(
                            kind=BlockKind.ACTIONS,
                            body="\n".join(serialize_action(a) for a in actions),
                            action_keys=tuple(a.canonical_key for a in actions),
                        )
                    )
                    outputs = []
                    for action in actions:
                        output = toolset.execute(action, before=claim.date)
                        report.action_history.add(action.canonical_key)
                        run_log.log(
                            "S2",
                            "executed",
                            action=action.canonical_key,
                            results=len(output.results),
                            geo=output.geo is not None,
                        )
                        outputs.append(output)
                    for output in outputs:
                        self._summarize_output(output, report, run_log, summarizer)
                    evidence_count = len(report.blocks_of(BlockKind.EVIDENCE))
                    if not self.config.no_develop and (
                        evidence_count >= 1 or iteration == self.config.max_iterations
                    ):
                        self.develop(report, run_log)
                # an empty plan is a dead end: jump straight to the verdict
                verdict = self.judge(report, run_log)
                if taxonomy.nei_label is None or verdict.label != taxonomy.nei_label:
                    break
                logger.info("iteration %d ended with NEI; re-planning", iteration)

            self.justify(report, run_log)
            return FactCheckOutcome(
                report=report,
                verdict=verdict,
                iterations_used=iterations_used,
                counters=self._usage_delta(llm_before, counters),
            )
        except _GATEWAY_ERRORS as exc:
            raise PipelineFailed(f"{type(exc).__name__}: {exc}", report=report) from exc
        except UnjudgeableClaim as exc:
            raise PipelineFailed(str(exc), report=report) from exc

    def run_infact(self, claim: Claim, run_log: RunLog | None = None) -> FactCheckOutcome:
        """Question-answering mode: 10 key questions, retrieval, QA, verdict.

        Requires the four-class taxonomy with an NEI option used by the
        question-answering benchmark protocol.
        """
        if self.config.taxonomy.name != "averitec":
            raise ValueError("the QA-pair mode requires the averitec taxonomy")
        run_log = run_log if run_log is not None else RunLog()
        counters = UsageCounters()
        llm_before = self._llm_usage()
        claim = replace(claim, registry=claim.registry.clone())
        report = Report(claim=claim)
        try:
            toolset = self.toolset_factory(claim.registry, counters)
            toolset.temporal_filtering = self.config.temporal_filtering
            toolset.web_results = self.config.infact_results_per_question
            toolset.kb_results = self.config.infact_results_per_question

            content = fill_template(
                self.templates["PoseQuestions"],
                {"Record": self._snapshot(report)},
                claim.registry,
            )
            response = self.llm.complete(content)
            questions = parse_numbered_list(response)[: self.config.infact_questions]
            run_log.log("S1", "questions_posed", n=len(questions))
            if len(questions) < self.config.infact_questions:
                logger.warning(
                    "expected %d questions, parsed %d",
                    self.config.infact_questions,
                    len(questions),
                )

            qa_pairs = []
            for question in questions:
                action = Action.for_query(WEB_SEARCH, question)
                output = toolset.execute(action, before=claim.date)
                report.action_history.add(action.canonical_key)
                run_log.log(
                    "S2", "executed", action=action.canonical_key, results=len(output.results)
                )
                answer, sources = self._answer_question(report, question, output.results)
                block = ReportBlock(
                    kind=BlockKind.QA,
                    body=f"Q: {question}\nA: {answer}",
                    question=question,
                    answer=answer,
                    sources=tuple(sources),
                )
                report.append_block(block)
                run_log.log("S3", "answered", question=question, sources=list(sources))
                qa_pairs.append(
                    {"question": question, "answer": answer, "sources": list(sources)}
                )

            verdict = self.judge(report, run_log)
            self.justify(report, run_log)
            return FactCheckOutcome(
                report=report,
                verdict=verdict,
                iterations_used=1,
                qa_pairs=qa_pairs,
                counters=self._usage_delta(llm_before, counters),
            )
        except _GATEWAY_ERRORS as exc:
            raise PipelineFailed(f"{type(exc).__name__}: {exc}", report=report) from exc
        except UnjudgeableClaim as exc:
            raise PipelineFailed(str(exc), report=report) from exc

    def _answer_question(self, report, question, results) -> tuple[str, list[str]]:
        if not results:
            return "No answer could be found.", []
        rendered = "\n\n".join(render_search_result(r) for r in results)
        content = fill_template(
            self.templates["AnswerQuestion"],
            {
                "Record": self._snapshot(report),
                "Question": question,
                "Search_Results": rendered,
            },
            report.claim.registry,
        )
        response = self.llm.complete(content)
        if detect_none(response):
            return "No answer could be found.", []
        answer, _ = sanitize_image_refs(response.strip(), report.claim.registry)
        cited = [r.url for r in results if r.url and r.url in answer]
        sources = cited or [results[0].url]
        return answer, sources


def parse_numbered_list(text: str) -> list[str]:
    """Items of a numbered (or bulleted, as fallback) Markdown list."""
    items = []
    for line in text.split("\n"):
        match = re.match(r"^\s*\d+[.)]\s+(.*\S)\s*$", line)
        if match:
            items.append(match.group(1))
    if items:
        return items
    for line in text.split("\n"):
        match = re.match(r"^\s*[-*+]\s+(.*\S)\s*$", line)
        if match:
            items.append(match.group(1))
    return items
