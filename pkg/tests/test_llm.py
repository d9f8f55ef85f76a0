import pytest

from claimcheck.claims import MediaRegistry, get_taxonomy
from claimcheck.errors import (
    ContextOverflow,
    EndpointUnavailable,
    MissingPlaceholder,
    NoChoiceFound,
)
from claimcheck.llm import (
    ChatContent,
    ImageSegment,
    LlmClient,
    ModelConfig,
    PromptTemplate,
    TextSegment,
    detect_none,
    extract_choice,
    extract_code_block,
    fill_template,
    load_templates,
)
from claimcheck.replay import Cassette, RECORD, REPLAY_STRICT

from helpers import FakeChatSession, FakeResponse, make_png


class TestTemplates:
    def test_packaged_templates_load_with_required_placeholders(self):
        templates = load_templates()
        assert set(templates) == {
            "Plan", "Summarize", "Develop", "Judge", "Justify",
            "PoseQuestions", "AnswerQuestion",
        }
        assert templates["Plan"].required == {
            "Extra Rules", "Valid Actions", "Examples", "Record",
        }
        assert templates["Judge"].required == {"Extra Rules", "Decision Options", "Record"}
        assert templates["Summarize"].required == {"Examples", "Record", "Search_Result"}

    def test_every_required_placeholder_appears_in_body(self):
        for template in load_templates().values():
            for name in template.required:
                assert f"[{name}]" in template.body


class TestFillTemplate:
    def test_simple_substitution(self):
        template = PromptTemplate.from_body("T", "A [B] C")
        content = fill_template(template, {"B": "x"})
        assert content.text_only() == "A x C"

    def test_missing_binding_raises(self):
        template = PromptTemplate.from_body("T", "needs [Record]")
        with pytest.raises(MissingPlaceholder) as err:
            fill_template(template, {})
        assert err.value.name == "Record"

    def test_image_ref_expands_to_segment_at_position(self):
        reg = MediaRegistry()
        ref = reg.register_image(make_png(5))
        template = PromptTemplate.from_body("T", "before [Record] after")
        content = fill_template(template, {"Record": f"look <image:{ref.id}> here"}, reg)
        kinds = [type(seg).__name__ for seg in content.segments]
        assert kinds == ["TextSegment", "ImageSegment", "TextSegment"]
        assert content.segments[0].text == "before look "
        assert content.segments[1].ref.id == ref.id
        assert content.text_only() == f"before look <image:{ref.id}> here after"

    def test_unresolvable_ref_stays_literal_text(self):
        reg = MediaRegistry()
        template = PromptTemplate.from_body("T", "[Record]")
        content = fill_template(template, {"Record": "ghost <image:42>"}, reg)
        assert content.images() == []
        assert content.text_only() == "ghost <image:42>"

    def test_no_unbound_required_markers_remain(self):
        templates = load_templates()
        bindings = {
            "Extra Rules": "", "Valid Actions": "v", "Examples": "e",
            "Record": "r", "Search_Result": "s", "Decision Options": "d",
            "Question": "q", "Search_Results": "s",
        }
        for template in templates.values():
            content = fill_template(template, bindings)
            for name in template.required:
                assert f"[{name}]" not in content.text_only()

    def test_without_images_strips_segments(self):
        reg = MediaRegistry()
        ref = reg.register_image(make_png(6))
        content = ChatContent(
            [TextSegment("a"), ImageSegment(ref), TextSegment("b")]
        )
        assert content.without_images().text_only() == "ab"


class TestComplete:
    def make_client(self, responder, **config_kwargs):
        config = ModelConfig(endpoint="https://llm.test/v1", model_id="m", **config_kwargs)
        session = FakeChatSession(responder)
        sleeps = []
        client = LlmClient(config, session=session, sleep=sleeps.append)
        return client, session, sleeps

    def test_returns_model_text(self):
        client, _, _ = self.make_client(lambda p: "hello back")
        assert client.complete(ChatContent([TextSegment("hi")])) == "hello back"
        assert client.counters.llm_calls == 1

    def test_oversized_content_raises_overflow(self):
        client, _, _ = self.make_client(lambda p: "x", max_context=10)
        with pytest.raises(ContextOverflow):
            client.complete(ChatContent([TextSegment("word " * 100)]))

    def test_images_count_against_context(self):
        reg = MediaRegistry()
        ref = reg.register_image(make_png(1))
        client, _, _ = self.make_client(lambda p: "x", max_context=500, image_tokens=512)
        with pytest.raises(ContextOverflow):
            client.complete(ChatContent([ImageSegment(ref)]))

    def test_retries_then_unavailable(self):
        class DownSession:
            def __init__(self):
                self.calls = 0

            def post(self, url, json=None, headers=None, timeout=None):
                self.calls += 1
                return FakeResponse(status=503)

        config = ModelConfig(endpoint="https://llm.test/v1", model_id="m", retries=3)
        session = DownSession()
        sleeps = []
        client = LlmClient(config, session=session, sleep=sleeps.append)
        with pytest.raises(EndpointUnavailable):
            client.complete(ChatContent([TextSegment("hi")]))
        assert session.calls == 4  # initial try + 3 retries
        assert sleeps == [1.0, 4.0, 16.0]

    def test_transient_failure_then_success(self):
        class FlakySession:
            def __init__(self):
                self.calls = 0

            def post(self, url, json=None, headers=None, timeout=None):
                self.calls += 1
                if self.calls == 1:
                    return FakeResponse(status=500)
                return FakeResponse({"choices": [{"message": {"content": "ok"}}]})

        config = ModelConfig(endpoint="https://llm.test/v1", model_id="m")
        client = LlmClient(config, session=FlakySession(), sleep=lambda s: None)
        assert client.complete(ChatContent([TextSegment("hi")])) == "ok"

    def test_rate_limiter_spaces_calls(self):
        config = ModelConfig(
            endpoint="https://llm.test/v1", model_id="m", requests_per_minute=60
        )
        sleeps = []
        client = LlmClient(
            config, session=FakeChatSession(lambda p: "ok"), sleep=sleeps.append
        )
        client.complete(ChatContent([TextSegment("one")]))
        client.complete(ChatContent([TextSegment("two")]))
        # second call must wait out the remaining 1s interval
        assert len(sleeps) == 1
        assert 0 < sleeps[0] <= 1.0

    def test_replay_is_pure_function_of_fingerprint(self, tmp_path):
        path = tmp_path / "llm.jsonl"
        config = ModelConfig(endpoint="https://llm.test/v1", model_id="m")
        recorder = LlmClient(
            config, cassette=Cassette(path, RECORD), session=FakeChatSession(lambda p: "answer")
        )
        content = ChatContent([TextSegment("what is up")])
        assert recorder.complete(content) == "answer"
        replayer = LlmClient(config, cassette=Cassette(path, REPLAY_STRICT))
        assert replayer.complete(content) == "answer"
        assert replayer.complete(content) == "answer"


class TestExtractCodeBlock:
    def test_last_block_wins(self):
        result = extract_code_block("text ```a``` more ```b```")
        assert result.text == "b"
        assert not result.fallback

    def test_no_fence_falls_back_to_whole_text(self):
        result = extract_code_block('web_search("x")')
        assert result.text == 'web_search("x")'
        assert result.fallback

    def test_empty_response(self):
        result = extract_code_block("")
        assert result.text == ""
        assert result.fallback

    def test_language_tag_stripped(self):
        result = extract_code_block('```python\nweb_search("x")\n```')
        assert result.text == 'web_search("x")'


class TestExtractChoice:
    taxonomy = get_taxonomy("claimreview")

    def test_backtick_token(self):
        assert extract_choice("... the answer is `Refuted`.", self.taxonomy) == "refuted"

    def test_case_insensitive_no_backticks(self):
        assert extract_choice("Verdict: REFUTED.", self.taxonomy) == "refuted"

    def test_no_choice_raises(self):
        two = get_taxonomy("mocheg")
        with pytest.raises(NoChoiceFound):
            extract_choice("inconclusive rambling", two)

    def test_last_backtick_token_wins(self):
        text = "Maybe `Supported`? On reflection: `Misleading`."
        assert extract_choice(text, self.taxonomy) == "misleading"

    def test_fallback_prefers_later_position(self):
        text = "It is not Supported. Overall this is Misleading"
        assert extract_choice(text, self.taxonomy) == "misleading"

    def test_label_id_matches_too(self):
        assert extract_choice("conclusion: `NEI`", self.taxonomy) == "nei"

    def test_multiword_display_name(self):
        averitec = get_taxonomy("averitec")
        assert (
            extract_choice("I pick `Conflicting Evidence/Cherrypicking`", averitec)
            == "conflicting"
        )

    def test_whole_word_only(self):
        # "Truely" must not match label "true"
        verite = get_taxonomy("verite")
        with pytest.raises(NoChoiceFound):
            extract_choice("Truely unknowable", verite)


class TestDetectNone:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("NONE", True),
            ("NONE.\n", True),
            ("  NONE  ", True),
            ("NONE\nThe page only lists ads.", True),
            ("There is none of that here", False),
            ("None", False),
            ("The result is NONE", False),
            ("", False),
        ],
    )
    def test_cases(self, text, expected):
        assert detect_none(text) is expected
