import pytest
from hypothesis import given, strategies as st

from claimcheck.claims import (
    Claim,
    MediaRegistry,
    get_taxonomy,
    parse_image_refs,
    render_claim,
    sanitize_image_refs,
    sniff_image_mime,
)
from claimcheck.errors import NotAnImage, UnresolvedImage

from helpers import make_gif, make_jpeg, make_png, make_webp

from datetime import date


class TestRegistry:
    def test_same_payload_registers_once(self):
        reg = MediaRegistry()
        a = reg.register_image(make_png(1))
        b = reg.register_image(make_png(1))
        assert a.id == b.id
        assert len(reg) == 1

    def test_distinct_payloads_get_distinct_ids(self):
        reg = MediaRegistry()
        a = reg.register_image(make_png(1))
        b = reg.register_image(make_png(2))
        assert a.id != b.id
        assert len(reg) == 2

    def test_ids_are_sequential_from_one(self):
        reg = MediaRegistry()
        ids = [reg.register_image(make_png(i)).id for i in range(3)]
        assert ids == [1, 2, 3]

    @pytest.mark.parametrize(
        "payload",
        [b"abc", b"", b"<html><body>hi</body></html>", b"\x89PNX" + b"0" * 20],
    )
    def test_non_image_payload_rejected(self, payload):
        reg = MediaRegistry()
        with pytest.raises(NotAnImage):
            reg.register_image(payload)

    def test_magic_byte_fixture_set(self):
        # sniffing fixture set: one valid header per supported format
        assert sniff_image_mime(make_png(1)) == "image/png"
        assert sniff_image_mime(make_jpeg(1)) == "image/jpeg"
        assert sniff_image_mime(make_webp(1)) == "image/webp"
        assert sniff_image_mime(make_gif(1)) == "image/gif"
        assert sniff_image_mime(b"RIFF\x00\x00\x00\x00WAVE") is None

    def test_dedup_count_property(self):
        reg = MediaRegistry()
        payloads = [make_png(i % 4) for i in range(20)]
        for p in payloads:
            reg.register_image(p)
        assert len(reg) == 4

    def test_concurrent_registration_allocates_atomic_ids(self):
        import threading

        reg = MediaRegistry()
        results = []

        def worker(start):
            local = [reg.register_image(make_png(start * 100 + i)).id for i in range(25)]
            results.append(local)

        threads = [threading.Thread(target=worker, args=(t,)) for t in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        ids = [i for chunk in results for i in chunk]
        assert sorted(ids) == list(range(1, 101))  # no duplicates, no gaps

    def test_clone_is_independent(self):
        reg = MediaRegistry()
        reg.register_image(make_png(1))
        clone = reg.clone()
        clone.register_image(make_png(2))
        assert len(reg) == 1
        assert len(clone) == 2
        assert clone.get(1).content_hash == reg.get(1).content_hash


class TestClaim:
    def test_text_only_render(self):
        claim = Claim.build(text="hello")
        assert render_claim(claim) == "hello"

    def test_media_then_text_render(self):
        reg = MediaRegistry()
        ref = reg.register_image(make_png(9))
        claim = Claim(
            content=(ref.id, " Image of a bus powered by compressed natural gas"),
            registry=reg,
        )
        assert render_claim(claim) == (
            f"<image:{ref.id}> Image of a bus powered by compressed natural gas"
        )

    def test_claimant_and_date_lines_frozen(self):
        claim = Claim.build(text="X happened.", claimant="X", claim_date=date(2024, 5, 15))
        assert render_claim(claim) == "X happened.\nClaimant: X\nDate: 2024-05-15"

    def test_empty_content_rejected(self):
        with pytest.raises(ValueError):
            Claim(content=(), registry=MediaRegistry())

    def test_unresolved_media_rejected(self):
        with pytest.raises(UnresolvedImage):
            Claim(content=(7, "text"), registry=MediaRegistry())


class TestParseImageRefs:
    def test_no_refs(self):
        assert parse_image_refs("no images") == []

    def test_order_and_dedup(self):
        assert parse_image_refs("<image:3> and <image:3> and <image:7>") == [3, 7]

    @pytest.mark.parametrize("text", ["<image:abc>", "<image:>", "<image: 3>", "<img:3>"])
    def test_malformed_refs_ignored(self, text):
        assert parse_image_refs(text) == []

    def test_sanitize_strips_unknown(self):
        reg = MediaRegistry()
        ref = reg.register_image(make_png(1))
        text, warnings = sanitize_image_refs(f"keep <image:{ref.id}> drop <image:999>", reg)
        assert text == f"keep <image:{ref.id}> drop "
        assert len(warnings) == 1


@given(
    st.lists(
        st.one_of(
            st.text(
                alphabet=st.characters(blacklist_characters="<", blacklist_categories=("Cs",)),
                min_size=1,
                max_size=20,
            ),
            st.integers(min_value=0, max_value=5),
        ),
        min_size=1,
        max_size=8,
    )
)
def test_render_parse_round_trip(segments):
    """parse_image_refs(render_claim(c)) recovers distinct media ids in order."""
    reg = MediaRegistry()
    refs = {}
    content = []
    for seg in segments:
        if isinstance(seg, int):
            if seg not in refs:
                refs[seg] = reg.register_image(make_png(seg)).id
            content.append(refs[seg])
        else:
            content.append(seg)
    claim = Claim(content=tuple(content), registry=reg)
    expected = []
    for seg in content:
        if isinstance(seg, int) and seg not in expected:
            expected.append(seg)
    assert parse_image_refs(render_claim(claim)) == expected


class TestTaxonomies:
    def test_known_taxonomies(self):
        for name in ("averitec", "mocheg", "verite", "claimreview"):
            tax = get_taxonomy(name)
            assert tax.name == name
        with pytest.raises(KeyError):
            get_taxonomy("fever")

    def test_verite_has_no_nei(self):
        assert get_taxonomy("verite").nei_label is None
        assert get_taxonomy("averitec").nei_label == "nei"

    def test_decision_options_include_definitions(self):
        text = get_taxonomy("claimreview").decision_options_text()
        assert "`Refuted`" in text
        assert "evidence contradicts the claim" in text
