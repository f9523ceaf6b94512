import random
import re

import pytest

from topickit.core.errors import ErrorCode, TopicKitError
from topickit.models.schemas import ChunkKind
from topickit.services.corpus_service import corpus_from_texts
from topickit.services.profiler import ablate, decompose, distill, profile, prune_ablated


def _chunks(regex):
    return {c.text: c for c in decompose(regex)}


def _oracle_loss(regex, chunk, corpus):
    """Percent of matched weight lost, by matching every document again."""
    before = re.compile(regex)
    after = re.compile(ablate(regex, chunk))
    base = [d for d in corpus.docs if before.search(d.text.casefold())]
    lost = [d for d in base if not after.search(d.text.casefold())]
    return sum(d.weight for d in lost) / sum(d.weight for d in base) * 100


def test_flat_alternation():
    chunks = _chunks("corona|news")
    assert set(chunks) == {"corona", "news"}
    assert chunks["corona"].kind == ChunkKind.CLAUSE
    assert chunks["news"].occurrences == ((7, 11),)


def test_spelled_variant_words():
    chunks = _chunks(r"(\b|\d|_|#)c[o0]vi[dt](\b|\d|_)")
    assert "c[o0]vi[dt]" in chunks
    assert "i[dt]" in chunks
    assert chunks["[o0]"].kind == ChunkKind.CHAR_CLASS
    assert chunks[r"\b|\d|_|#"].kind == ChunkKind.GROUP


def test_identical_chunks_are_merged():
    chunks = _chunks("xyz.a|xyz.b")
    assert chunks["xyz"].occurrences == ((0, 3), (6, 9))
    assert chunks["xyz"].kind == ChunkKind.LITERAL_WORD


def test_gap_chunk():
    chunks = _chunks("(corona).{0,80}?(virus)|(virus).{0,80}?(corona)")
    gap = chunks[".{0,80}?"]
    assert gap.kind == ChunkKind.QUANTIFIED_GAP
    assert len(gap.occurrences) == 2


def test_inert_alternatives_are_not_chunks():
    chunks = _chunks("(?!x)x_version_1\n|(?!x)x_core|(corona)|(news)")
    assert not any("(?!x)x" in text for text in chunks)
    assert {"(corona)", "corona", "(news)", "news"} <= set(chunks)


def test_guarded_chunks():
    chunks = _chunks("corona(?!(ry|beer))")
    assert chunks["beer"].guarded
    assert chunks["ry|beer"].guarded
    assert not chunks["corona"].guarded


def test_decompose_requires_a_compiling_regex():
    with pytest.raises(TopicKitError) as excinfo:
        decompose("corona(")
    assert excinfo.value.code == ErrorCode.COMPILE_FAIL


def test_ablate_replaces_every_occurrence():
    assert ablate("corona|news", _chunks("corona|news")["news"]) == "corona|foobar123"
    assert ablate("xyz.a|xyz.b", _chunks("xyz.a|xyz.b")["xyz"]) == "foobar123.a|foobar123.b"


def test_ablating_the_gap_kills_the_bipartite_clause():
    regex = "(corona).{0,80}?(virus)|(virus).{0,80}?(corona)"
    ablated = ablate(regex, _chunks(regex)[".{0,80}?"])
    assert ablated == "(corona)foobar123(virus)|(virus)foobar123(corona)"
    corpus = corpus_from_texts("c", ["corona virus", "virus from corona", "coronavirus"])
    report = profile(regex, [corpus])
    row = next(r for r in report.rows if r.chunk.text == ".{0,80}?")
    assert row.loss_pct["c"] == 100


def test_profile_losses():
    corpus = corpus_from_texts("c", ["corona", "covid", "covid party"])
    report = profile("corona|covid", [corpus])
    losses = {r.chunk.text: r.loss_pct["c"] for r in report.rows}
    assert losses["corona"] == pytest.approx(100 / 3)
    assert losses["covid"] == pytest.approx(200 / 3)
    assert [r.chunk.text for r in report.rows] == ["covid", "corona"]
    assert report.baseline_weight == {"c": 3}


def test_profile_zero_loss_chunk():
    corpus = corpus_from_texts("c", ["corona"])
    report = profile("corona|pneumonia", [corpus])
    row = next(r for r in report.rows if r.chunk.text == "pneumonia")
    assert row.max_loss == 0 and row.gain_pct["c"] == 0


def test_profile_reports_corpora_separately():
    posts = corpus_from_texts("posts", ["corona news", "covid"])
    queries = corpus_from_texts("queries", ["covid", "covid"], weights=[1, 3])
    report = profile("corona|covid", [posts, queries])
    row = next(r for r in report.rows if r.chunk.text == "covid")
    assert row.loss_pct == {"posts": 50, "queries": 100}
    assert row.max_loss == 100


def test_profile_keeps_same_named_corpora_apart():
    small = corpus_from_texts("posts", ["corona", "covid"])
    large = corpus_from_texts("posts", ["covid", "covid", "covid", "flu", "covid"])
    report = profile("corona|covid", [small, large])
    assert report.corpora == ("posts", "posts#2")
    assert report.baseline_weight == {"posts": 2, "posts#2": 4}
    row = next(r for r in report.rows if r.chunk.text == "covid")
    assert row.loss_pct == {"posts": 50, "posts#2": 100}


def test_profile_skips_corpus_without_matches():
    report = profile("corona", [corpus_from_texts("a", ["corona"]), corpus_from_texts("b", ["flu"])])
    assert report.skipped_corpora == ("b",)
    assert report.corpora == ("a",)


def test_profile_all_corpora_empty():
    with pytest.raises(TopicKitError) as excinfo:
        profile("corona", [corpus_from_texts("b", ["flu"])])
    assert excinfo.value.code == ErrorCode.EMPTY_BASELINE


def test_profile_gain_inside_negative_lookahead():
    corpus = corpus_from_texts("c", ["corona", "coronary", "corona beer"])
    report = profile("corona(?!(ry|\\W{0,3}beer))", [corpus])
    row = next(r for r in report.rows if r.chunk.text == "beer")
    assert row.chunk.guarded
    assert row.loss_pct["c"] == 0
    assert row.gain_pct["c"] == 100


def test_profile_equals_brute_force_recount():
    rng = random.Random(21)
    vocabulary = ["corona", "covid", "c0vid", "virus", "flu", "news", "beer", "mask", "x"]
    regexes = [
        "corona|c[o0]vid|(virus).{0,10}?(news)",
        r"(\b|_)c[o0]vi[dt](\b|\d)|flu|mask",
        "corona(?!(ry| beer))|virus|(news|mask).{0,5}?(flu)",
    ]
    for regex in regexes:
        corpora = []
        for name in ("posts", "queries"):
            texts = [" ".join(rng.choices(vocabulary, k=rng.randint(1, 5))) for _ in range(300)]
            weights = [rng.randint(1, 4) for _ in texts]
            corpora.append(corpus_from_texts(name, texts, weights))
        report = profile(regex, corpora)
        for row in report.rows:
            assert not row.skipped
            for corpus in corpora:
                assert row.loss_pct[corpus.name] == pytest.approx(_oracle_loss(regex, row.chunk, corpus))
            if not row.chunk.guarded:
                assert all(g == 0 for g in row.gain_pct.values())
        maxima = [r.max_loss for r in report.rows]
        assert maxima == sorted(maxima, reverse=True)


def test_profile_results_do_not_depend_on_jobs():
    corpus = corpus_from_texts("c", [f"covid {i} corona news" if i % 3 else "flu" for i in range(30)])
    assert profile("corona|covid|flu", [corpus], jobs=1) == profile("corona|covid|flu", [corpus], jobs=2)


def test_prune_ablated():
    assert prune_ablated("corona|foobar123") == "corona"
    assert prune_ablated("foobar123|corona|(foobar123)") == "corona"
    assert prune_ablated("(a|foobar123)b") == "(a)b"
    assert prune_ablated("foobar123") == "foobar123"
    assert prune_ablated("(foobar123)b|c") == "(foobar123)b|c"


def test_distill_zero_budget():
    corpus = corpus_from_texts("c", ["corona", "covid"])
    result = distill("corona|covid|pneumonia", corpus, 0)
    assert result.suggested_removals == ()
    assert result.final_regex == "corona|covid|pneumonia"
    assert result.final_loss_pct == 0


def test_distill_removes_dead_weight():
    corpus = corpus_from_texts("c", ["corona news", "covid", "covid party"])
    result = distill("corona|covid|pneumonia", corpus, 1.0)
    assert "pneumonia" in [c.text for c in result.suggested_removals]
    assert result.final_loss_pct <= 1.0
    assert re.search(result.final_regex, "corona news") and re.search(result.final_regex, "covid")


def test_distill_duplicated_chunk_trap():
    corpus = corpus_from_texts("c", ["covid news", "covid", "c0vid", "covid party"])
    for budget in (0.5, 5.0, 20.0, 24.0):
        result = distill("covid|c[o0]vid", corpus, budget)
        assert result.final_loss_pct <= budget
        assert re.compile(result.final_regex).search("covid")


def test_distill_never_removes_precision_guards():
    corpus = corpus_from_texts("c", ["corona", "corona virus"])
    result = distill("corona(?!(ry|beer))", corpus, 50.0)
    assert all(not c.guarded for c in result.suggested_removals)
    assert "(?!(ry|beer))" in result.final_regex


def test_distill_follows_greedy_order():
    # clause weights known by construction: a=1, b=2, c=4, d=8, e=16
    texts, weights = [], []
    for word, weight in zip("abcde", (1, 2, 4, 8, 16)):
        texts.append(f"w{word}w")
        weights.append(weight)
    corpus = corpus_from_texts("c", texts, weights)
    result = distill("wa|wb|wc|wd|we", corpus, 100 * 7 / 31 + 0.01)
    assert [c.text for c in result.suggested_removals] == ["wa", "wb", "wc"]
    assert result.final_regex == "wd|we"
    assert result.final_loss_pct == pytest.approx(100 * 7 / 31)


def test_distill_final_loss_within_budget():
    rng = random.Random(8)
    vocabulary = ["corona", "covid", "c0vid", "virus", "flu", "news"]
    texts = [" ".join(rng.choices(vocabulary, k=3)) for _ in range(200)]
    corpus = corpus_from_texts("c", texts)
    regex = "corona|c[o0]vid|(virus).{0,10}?(news)|flu"
    for budget in (1.0, 10.0, 30.0):
        result = distill(regex, corpus, budget)
        assert result.final_loss_pct <= budget
        base = {d.id for d in corpus.docs if re.search(regex, d.text)}
        kept = {d.id for d in corpus.docs if re.search(result.final_regex, d.text)}
        assert (len(base - kept) / len(base) * 100) == pytest.approx(result.final_loss_pct)


def test_distill_rejects_negative_budget():
    with pytest.raises(TopicKitError) as excinfo:
        distill("covid", corpus_from_texts("c", ["covid"]), -1)
    assert excinfo.value.code == ErrorCode.BAD_ARGUMENT
