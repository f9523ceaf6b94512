import itertools
import random
import re

import pytest

from test_document_model import _random_doc
from topickit.core.errors import ErrorCode, TopicKitError
from topickit.models.schemas import KeywordClause, RegexDocument, RenderOptions
from topickit.services import matcher
from topickit.services.renderer import (
    build_bipartite,
    build_keyword,
    escape_for_store,
    render,
    render_annotated,
    render_compact,
    render_stored,
    unescape_from_store,
)
from topickit.services.variants import count_variants

SET_A = ["[ck][ao0]?r[ao0]n[ao]", "c[o0]vid"]
SET_B = ["v[ai]i?r[aou]s", "flu"]


def _doc(sections, version=1) -> RegexDocument:
    return RegexDocument.model_validate({
        "topic": "t", "language": "en", "tier": "tier1", "version": version,
        "sections": [{"label": label, "clauses": clauses} for label, clauses in sections],
    })


def test_compact_is_a_wrapped_alternation():
    doc = _doc([("main", [{"kind": "literal", "pattern": "foo"}, {"kind": "literal", "pattern": "bar"}])])
    assert render_compact(doc) == "(foo)|(bar)"


def test_bipartite_singletons():
    assert build_bipartite(["corona"], ["virus"], 80) == "(corona).{0,80}?(virus)|(virus).{0,80}?(corona)"
    assert build_bipartite(["corona"], ["virus"], 80, ordered_both_ways=False) == "(corona).{0,80}?(virus)"


def test_bipartite_toy_sets():
    assert build_bipartite(SET_A, SET_B, 80) == (
        "([ck][ao0]?r[ao0]n[ao]|c[o0]vid).{0,80}?(v[ai]i?r[aou]s|flu)"
        "|(v[ai]i?r[aou]s|flu).{0,80}?([ck][ao0]?r[ao0]n[ao]|c[o0]vid)"
    )
    assert sum(count_variants(f) for f in SET_A) == 50
    assert sum(count_variants(f) for f in SET_B) == 13


def _spell(*parts):
    return {"".join(p) for p in itertools.product(*parts)}


def test_bipartite_toy_sets_cover_every_pair_within_the_gap():
    words_a = _spell("ck", ["a", "o", "0", ""], "r", "ao0", "n", "ao") | _spell("c", "o0", ["vid"])
    words_b = _spell("v", "ai", ["i", ""], "r", "aou", "s") | {"flu"}
    assert len(words_a) == sum(count_variants(f) for f in SET_A) == 50
    assert len(words_b) == sum(count_variants(f) for f in SET_B) == 13
    for words, fragments in ((words_a, SET_A), (words_b, SET_B)):
        assert all(any(re.fullmatch(f, w) for f in fragments) for w in words)

    pattern = re.compile(build_bipartite(SET_A, SET_B, 80))
    rng = random.Random(13)
    filler = " 123456789.,-"
    for a in sorted(words_a):
        for b in sorted(words_b):
            for first, second in ((a, b), (b, a)):
                for gap in (rng.randint(0, 80), 80):
                    assert pattern.search(first + "".join(rng.choices(filler, k=gap)) + second)
                assert not pattern.search(first + "".join(rng.choices(filler, k=81)) + second)


def test_bipartite_empty_set():
    with pytest.raises(TopicKitError) as excinfo:
        build_bipartite([], ["virus"], 10)
    assert excinfo.value.code == ErrorCode.EMPTY_SET


def test_bipartite_zero_gap_matches_only_adjacent_pairs():
    pattern = re.compile(build_bipartite(["a"], ["b"], 0))
    matched = {"".join(p) for p in itertools.product("abc", repeat=2) if pattern.fullmatch("".join(p))}
    assert matched == {"ab", "ba"}


def test_bipartite_gap_is_a_hard_bound():
    pattern = re.compile(build_bipartite(["a"], ["b"], 3))
    for gap in range(8):
        text = "a" + "x" * gap + "b"
        assert bool(pattern.search(text)) == (gap <= 3)


def test_keyword_with_exclusions_and_empty_guards():
    clause = KeywordClause(core="corona", prefix_guard="", suffix_guard="", exclusions=("ry", "do", r"\W{0,3}beer"))
    fragment = build_keyword(clause)
    assert fragment == r"corona(?!(ry|do|\W{0,3}beer))"
    pattern = re.compile(fragment)
    assert pattern.search("corona")
    assert pattern.search("coronavirus")
    assert not pattern.search("coronabeer")
    assert not pattern.search("corona beer")
    assert not pattern.search("coronary")


def test_keyword_default_guards():
    assert build_keyword(KeywordClause(core="c[o0]vi[dt]")) == r"(\b|\d|_|#)c[o0]vi[dt](\b|\d|_)"
    sars = re.compile(build_keyword(KeywordClause(core="sars")))
    assert sars.search("sars-cov")
    assert sars.search("#sars2")
    assert not sars.search("tsars")


def test_keyword_identity_without_guards():
    assert build_keyword(KeywordClause(core="c[o0]vid", prefix_guard="", suffix_guard="")) == "c[o0]vid"


@pytest.mark.parametrize("live, stored", [
    (r"\b[ck]ovid\d", r"\\b[ck]ovid\\d"),
    ("corona", "corona"),
    (r"a\\b", r"a\\\\b"),
])
def test_escape_for_store(live, stored):
    assert escape_for_store(live) == stored
    assert unescape_from_store(stored) == live


def test_unescape_rejects_lone_backslash():
    with pytest.raises(TopicKitError) as excinfo:
        unescape_from_store(r"a\bc")
    assert excinfo.value.code == ErrorCode.ODD_BACKSLASH
    assert excinfo.value.location == 1


def test_escape_round_trip_on_random_strings():
    rng = random.Random(11)
    alphabet = "ab\\()[]|.?d"
    for _ in range(1000):
        text = "".join(rng.choices(alphabet, k=rng.randint(0, 20)))
        assert unescape_from_store(escape_for_store(text)) == text


def test_annotated_layout():
    doc = _doc([("section_iii", [{"kind": "literal", "pattern": "foo"}, {"kind": "literal", "pattern": "bar"}])], 3)
    regex = render_annotated(doc)
    assert regex.startswith("(?!x)x_version_3")
    assert "(?!x)x_section_iii" in regex
    assert regex == "(?!x)x_version_3\n|(?!x)x_section_iii|(foo)|(bar)"


def test_annotated_breaks_only_after_inert_tokens(covid_doc):
    regex = render_annotated(covid_doc, RenderOptions(max_line_width=20))
    lines = regex.split("\n")
    assert len(lines) > 2
    for line in lines[:-1]:
        assert line.endswith("(?!x)x") or re.search(r"\(\?!x\)x_\w+$", line)
    for line in lines[1:]:
        assert line.startswith("|")


def test_annotated_rejects_bad_label(covid_doc):
    bad = covid_doc.model_copy(update={
        "sections": (covid_doc.sections[0].model_copy(update={"label": "no spaces"}),)
    })
    with pytest.raises(TopicKitError) as excinfo:
        render_annotated(bad)
    assert excinfo.value.code == ErrorCode.LABEL_CHARSET


def test_inert_token_matches_nothing():
    inert = re.compile("(?!x)x")
    for text in ["", "x", "xx", "(?!x)x", "abc x"]:
        assert inert.search(text) is None


def test_render_invalid_fragment():
    doc = _doc([("main", [{"kind": "literal", "pattern": "foo["}])])
    with pytest.raises(TopicKitError) as excinfo:
        render_compact(doc)
    assert excinfo.value.code == ErrorCode.RENDER_INVALID


def test_render_stored_doubles_backslashes(covid_doc):
    live = render(covid_doc)
    assert render_stored(covid_doc) == escape_for_store(live)
    assert unescape_from_store(render_stored(covid_doc, RenderOptions(annotated=True))) == render_annotated(covid_doc)


def test_annotated_and_compact_agree_on_generated_documents():
    rng = random.Random(5)
    vocabulary = ["corona", "c0vid", "covid", "virus", "flu", "mask", "vac", "jab", "pandemia", "x", "isolation", "\n"]
    for _ in range(1000):
        doc = _random_doc(rng)
        compact = matcher.compile(render_compact(doc))
        annotated = matcher.compile(render_annotated(doc, RenderOptions(max_line_width=rng.randint(20, 60))))
        for _ in range(100):
            text = " ".join(rng.choices(vocabulary, k=rng.randint(0, 8)))
            assert matcher.classify(compact, text) == matcher.classify(annotated, text)
