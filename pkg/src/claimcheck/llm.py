"""Prompt templating, multimodal chat completion, and output extraction.

Templates are plain Markdown files whose ``[Placeholder]`` markers get
substituted at call time. Filled prompts become interleaved text/image
content; ``<image:k>`` markers inside bound values expand to image segments
at their original positions. All completions can be routed through a replay
cassette, making them a pure function of the prompt fingerprint offline.
"""

from __future__ import annotations

import base64
import logging
import re
import threading
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import requests

from .claims import IMAGE_REF_RE, LabelTaxonomy, MediaRegistry, MediaRef
from .errors import ContextOverflow, EndpointUnavailable, MissingPlaceholder, NoChoiceFound
from .netutil import with_retries
from .replay import Cassette, intercept
from .report import estimate_tokens
from .usage import UsageCounters

logger = logging.getLogger(__name__)

PLACEHOLDER_RE = re.compile(r"\[([A-Z][A-Za-z_]*(?: [A-Z][A-Za-z_]*)*)\]")

TEMPLATE_FILES = {
    "Plan": "plan.md",
    "Summarize": "summarize.md",
    "Develop": "develop.md",
    "Judge": "judge.md",
    "Justify": "justify.md",
    "PoseQuestions": "pose_questions.md",
    "AnswerQuestion": "answer_question.md",
}


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    body: str
    required: frozenset[str]

    @classmethod
    def from_body(cls, name: str, body: str) -> "PromptTemplate":
        required = frozenset(m.group(1) for m in PLACEHOLDER_RE.finditer(body))
        return cls(name=name, body=body, required=required)


def load_templates(prompt_dir: str | Path | None = None) -> dict[str, PromptTemplate]:
    """Load the seven stage templates from a directory or the packaged defaults."""
    templates = {}
    for name, fname in TEMPLATE_FILES.items():
        if prompt_dir is not None:
            body = (Path(prompt_dir) / fname).read_text(encoding="utf-8")
        else:
            body = resources.files("claimcheck").joinpath(f"prompts/{fname}").read_text(
                encoding="utf-8"
            )
        templates[name] = PromptTemplate.from_body(name, body)
    return templates


def load_prompt_asset(relpath: str) -> str:
    """Read a packaged prompt fixture (in-context examples, extra rules)."""
    return resources.files("claimcheck").joinpath(f"prompts/{relpath}").read_text(
        encoding="utf-8"
    )


@dataclass(frozen=True)
class TextSegment:
    text: str


@dataclass(frozen=True)
class ImageSegment:
    ref: MediaRef


@dataclass
class ChatContent:
    """Interleaved text and image segments, in original text order."""

    segments: list

    def text_only(self) -> str:
        return "".join(
            seg.text if isinstance(seg, TextSegment) else f"<image:{seg.ref.id}>"
            for seg in self.segments
        )

    def images(self) -> list[MediaRef]:
        return [seg.ref for seg in self.segments if isinstance(seg, ImageSegment)]

    def without_images(self) -> "ChatContent":
        return ChatContent([seg for seg in self.segments if isinstance(seg, TextSegment)])


def expand_image_refs(text: str, registry: MediaRegistry) -> ChatContent:
    """Split text at resolvable ``<image:k>`` markers into interleaved segments.

    Unresolvable markers stay in the text verbatim.
    """
    segments = []
    pos = 0
    for match in IMAGE_REF_RE.finditer(text):
        k = int(match.group(1))
        if not registry.resolves(k):
            continue
        if match.start() > pos:
            segments.append(TextSegment(text[pos : match.start()]))
        segments.append(ImageSegment(registry.get(k)))
        pos = match.end()
    if pos < len(text) or not segments:
        segments.append(TextSegment(text[pos:]))
    return ChatContent(segments)


def fill_template(
    template: PromptTemplate,
    bindings: dict[str, str],
    registry: MediaRegistry | None = None,
) -> ChatContent:
    """Substitute ``[X]`` markers and expand image refs into segments.

    Raises MissingPlaceholder for any required placeholder without a binding.
    """
    for name in sorted(template.required):
        if name not in bindings:
            raise MissingPlaceholder(name)

    def repl(match: re.Match) -> str:
        name = match.group(1)
        if name in bindings:
            return bindings[name]
        return match.group(0)

    text = PLACEHOLDER_RE.sub(repl, template.body)
    if registry is None:
        return ChatContent([TextSegment(text)])
    return expand_image_refs(text, registry)


@dataclass
class ModelConfig:
    endpoint: str = ""
    model_id: str = ""
    api_key: str | None = None
    temperature: float = 0.01
    top_p: float = 0.9
    max_context: int = 128_000
    max_output: int = 2048
    retries: int = 3
    backoff_base: float = 1.0
    requests_per_minute: int = 0  # 0 = unlimited
    chars_per_token: int = 4
    image_tokens: int = 512  # flat per-image budget charge
    timeout: float = 120.0

    def __post_init__(self):
        if not 0 <= self.temperature <= 2:
            raise ValueError("temperature must be within [0, 2]")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be within (0, 1]")


def content_token_estimate(content: ChatContent, config: ModelConfig) -> int:
    total = 0
    for seg in content.segments:
        if isinstance(seg, TextSegment):
            total += estimate_tokens(seg.text, config.chars_per_token)
        else:
            total += config.image_tokens
    return total


class LlmClient:
    """Chat-completion client speaking the common messages schema.

    Shareable across threads; a global rate limiter (requests/minute)
    serializes bursts when configured.
    """

    def __init__(
        self,
        config: ModelConfig,
        cassette: Cassette | None = None,
        session: requests.Session | None = None,
        counters: UsageCounters | None = None,
        sleep=time.sleep,
    ):
        self.config = config
        self.cassette = cassette
        self.session = session
        self.counters = counters or UsageCounters()
        self._sleep = sleep
        self._rate_lock = threading.Lock()
        self._last_call = 0.0

    def _throttle(self):
        rpm = self.config.requests_per_minute
        if rpm <= 0:
            return
        interval = 60.0 / rpm
        with self._rate_lock:
            wait = self._last_call + interval - time.monotonic()
            if wait > 0:
                self._sleep(wait)
            self._last_call = time.monotonic()

    def _request_parts(self, content: ChatContent) -> list:
        parts = []
        for seg in content.segments:
            if isinstance(seg, TextSegment):
                parts.append({"text": seg.text})
            else:
                parts.append({"image": seg.ref.data})
        return parts

    def _live_complete(self, content: ChatContent) -> dict:
        message_content = []
        for seg in content.segments:
            if isinstance(seg, TextSegment):
                message_content.append({"type": "text", "text": seg.text})
            else:
                b64 = base64.b64encode(seg.ref.data).decode("ascii")
                message_content.append(
                    {
                        "type": "image_url",
                        "image_url": {"url": f"data:{seg.ref.mime};base64,{b64}"},
                    }
                )
        payload = {
            "model": self.config.model_id,
            "temperature": self.config.temperature,
            "top_p": self.config.top_p,
            "max_tokens": self.config.max_output,
            "messages": [{"role": "user", "content": message_content}],
        }
        session = self.session or requests
        headers = {}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        url = self.config.endpoint.rstrip("/") + "/chat/completions"

        def call():
            self._throttle()
            return session.post(url, json=payload, headers=headers, timeout=self.config.timeout)

        response = with_retries(
            call,
            EndpointUnavailable,
            retries=self.config.retries,
            backoff_base=self.config.backoff_base,
            sleep=self._sleep,
        )
        data = response.json()
        try:
            text = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise EndpointUnavailable(f"malformed completion response: {exc}") from exc
        return {"text": text}

    def complete(self, content: ChatContent) -> str:
        """Run one completion, enforcing the context budget first."""
        input_tokens = content_token_estimate(content, self.config)
        if input_tokens > self.config.max_context:
            raise ContextOverflow(
                f"content estimates to {input_tokens} tokens, "
                f"window is {self.config.max_context}"
            )
        request = {
            "model": self.config.model_id,
            "temperature": self.config.temperature,
            "top_p": self.config.top_p,
            "parts": self._request_parts(content),
        }
        response = intercept(
            self.cassette, "llm", request, lambda: self._live_complete(content)
        )
        text = response["text"]
        self.counters.add_llm_call(
            input_tokens, estimate_tokens(text, self.config.chars_per_token)
        )
        return text


_FENCE_RE = re.compile(r"```(.*?)```", re.DOTALL)
_LANG_TAG_RE = re.compile(r"^[A-Za-z0-9_-]*$")


@dataclass(frozen=True)
class CodeBlockResult:
    text: str
    fallback: bool  # True when no fenced block was found


def extract_code_block(response: str) -> CodeBlockResult:
    """Contents of the last fenced code block, or the whole response as fallback."""
    matches = _FENCE_RE.findall(response)
    if not matches:
        return CodeBlockResult(response.strip(), fallback=True)
    inner = matches[-1]
    lines = inner.split("\n")
    if len(lines) >= 2 and _LANG_TAG_RE.match(lines[0].strip()):
        inner = "\n".join(lines[1:])
    return CodeBlockResult(inner.strip(), fallback=False)


_BACKTICK_RE = re.compile(r"`([^`]+)`")
_TRAILING_PUNCT = ".,;:!?\"'"


def _label_matchers(taxonomy: LabelTaxonomy) -> list[tuple[str, str]]:
    pairs = []
    for label in taxonomy.labels:
        pairs.append((label.display.lower(), label.label_id))
        pairs.append((label.label_id.lower(), label.label_id))
    return pairs


def extract_choice(response: str, taxonomy: LabelTaxonomy) -> str:
    """Pull the chosen decision option out of a judge response.

    Primary path: the last backtick-enclosed token matching a label name or id
    (case-insensitive, trailing punctuation tolerated). Fallback: the last
    whole-word occurrence of any label name anywhere in the response.
    """
    matchers = _label_matchers(taxonomy)

    for token in reversed(_BACKTICK_RE.findall(response)):
        cleaned = token.strip().strip(_TRAILING_PUNCT).strip().lower()
        for needle, label_id in matchers:
            if cleaned == needle:
                return label_id

    best: tuple[int, str] | None = None
    for needle, label_id in matchers:
        pattern = re.compile(
            r"(?<![A-Za-z0-9_])" + re.escape(needle) + r"(?![A-Za-z0-9_])",
            re.IGNORECASE,
        )
        for match in pattern.finditer(response):
            if best is None or match.end() > best[0]:
                best = (match.end(), label_id)
    if best is not None:
        return best[1]
    raise NoChoiceFound(f"no decision option of taxonomy {taxonomy.name!r} in response")


def detect_none(response: str) -> bool:
    """True when the model signalled an irrelevant result with bare NONE."""
    trimmed = response.strip()
    if trimmed == "NONE":
        return True
    first_line = trimmed.split("\n", 1)[0].strip()
    return first_line.rstrip(".,;:!?") == "NONE"
