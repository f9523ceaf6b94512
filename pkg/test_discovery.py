import random
import unicodedata
from fractions import Fraction

import pytest

from topickit.core.errors import ErrorCode, TopicKitError
from topickit.models.schemas import Label, Outcome
from topickit.services import discovery, matcher
from topickit.services.corpus_service import CorpusFormat, corpus_from_texts, ingest, tokenize


def test_ingest_txt(write_txt):
    corpus = ingest(write_txt("posts.txt", ["corona news", "", "flu", "covid test"]))
    assert corpus.name == "posts"
    assert [d.text for d in corpus.docs] == ["corona news", "flu", "covid test"]
    assert [d.id for d in corpus.docs] == ["1", "3", "4"]
    assert all(d.weight == 1 and d.label is None for d in corpus.docs)


def test_ingest_tsv(write_tsv):
    corpus = ingest(write_tsv("queries.tsv", [
        ("corona news", 42, 1),
        ("flu", 3, 0),
        ("covid test", 1, "-", "q7"),
        ("masks",),
    ]))
    first, second, third, fourth = corpus.docs
    assert (first.text, first.weight, first.label) == ("corona news", 42, Label.POSITIVE)
    assert second.label == Label.NEGATIVE
    assert (third.id, third.label) == ("q7", None)
    assert (fourth.weight, fourth.label) == (1, None)


def test_ingest_tsv_forced_format(write_txt):
    corpus = ingest(write_txt("queries.txt", ["corona\t5\t1"]), CorpusFormat.TSV)
    assert corpus.docs[0].weight == 5


@pytest.mark.parametrize("row", [("corona", 0, 1), ("corona", "many", 1), ("corona", 1, "yes"), ("a", 1, 1, "id", "x")])
def test_ingest_malformed_rows(write_tsv, row):
    path = write_tsv("bad.tsv", [("fine", 1, 1), row])
    with pytest.raises(TopicKitError) as excinfo:
        ingest(path)
    assert excinfo.value.code == ErrorCode.MALFORMED_ROW
    assert excinfo.value.location == 2


def test_ingest_missing_file(tmp_path):
    with pytest.raises(TopicKitError) as excinfo:
        ingest(tmp_path / "missing.tsv")
    assert excinfo.value.code == ErrorCode.IO_ERROR


@pytest.mark.parametrize("text, tokens", [
    ("Corona virus!", ["corona", "virus"]),
    ("#CoronaCrisis live", ["#coronacrisis", "live"]),
    ("covid-19", ["covid", "19"]),
    ("stop_covid Ärzte", ["stop_covid", "ärzte"]),
    ("করোনা ভাইরাস", ["করোনা", "ভাইরাস"]),
    ("कोरोना वायरस", ["कोरोना", "वायरस"]),
    ("ਕੋਰੋਨਾ ਵਾਇਰਸ", ["ਕੋਰੋਨਾ", "ਵਾਇਰਸ"]),
    (unicodedata.normalize("NFD", "Café crème"), [unicodedata.normalize("NFD", "café"), unicodedata.normalize("NFD", "crème")]),
])
def test_tokenize(text, tokens):
    assert tokenize(text) == tokens


def test_top_words_keeps_indic_words_whole():
    corpus = corpus_from_texts("c", ["করোনা ভাইরাস", "করোনা টিকা"])
    assert discovery.top_words(corpus) == [("করোনা", 2), ("টিকা", 1), ("ভাইরাস", 1)]


def test_top_words_with_filter():
    corpus = corpus_from_texts("c", ["covid test", "covid news", "flu news"])
    assert discovery.top_words(corpus, matcher.compile("covid"), k=2) == [("covid", 2), ("news", 1)]


def test_top_words_counts_documents_not_occurrences():
    corpus = corpus_from_texts("c", ["covid covid covid", "covid"], weights=[3, 1])
    assert discovery.top_words(corpus) == [("covid", 4)]


def test_top_words_full_ranking_when_k_is_large():
    corpus = corpus_from_texts("c", ["b a", "a"])
    assert discovery.top_words(corpus, k=100) == [("a", 2), ("b", 1)]


def test_top_words_empty_selection():
    with pytest.raises(TopicKitError) as excinfo:
        discovery.top_words(corpus_from_texts("c", ["flu"]), matcher.compile("covid"))
    assert excinfo.value.code == ErrorCode.EMPTY_SELECTION


def test_weighted_documents_equal_duplicates():
    weighted = corpus_from_texts("c", ["covid news", "flu"], weights=[3, 1])
    duplicated = corpus_from_texts("c", ["covid news", "covid news", "flu", "covid news"])
    for fn in (discovery.top_words, lambda c: discovery.top_ngrams(c, 2)):
        assert fn(weighted) == fn(duplicated)


def test_cooccurring_words():
    corpus = corpus_from_texts("c", ["corona news today"])
    seed = matcher.compile("corona")
    assert discovery.cooccurring_words(corpus, seed, window=1) == [("news", 1)]
    assert discovery.cooccurring_words(corpus, seed, window=2) == [("news", 1), ("today", 1)]


def test_cooccurring_words_skip_tokens_inside_snippets():
    corpus = corpus_from_texts("c", ["latest corona virus news", "corona virus"], weights=[2, 1])
    seed = matcher.compile("corona virus")
    assert discovery.cooccurring_words(corpus, seed, window=1) == [("latest", 2), ("news", 2)]


def test_cooccurring_words_empty_selection():
    with pytest.raises(TopicKitError) as excinfo:
        discovery.cooccurring_words(corpus_from_texts("c", ["flu"]), matcher.compile("corona"))
    assert excinfo.value.code == ErrorCode.EMPTY_SELECTION


def test_ratio_ranking_with_add_one_smoothing():
    target = corpus_from_texts("t", ["quarantaine mesures", "quarantaine paris"])
    background = corpus_from_texts("b", ["quarantaine x", "quarantaine y", "paris weather"])
    scores = discovery.ratio_scores(target, background)
    assert scores["quarantaine"] == Fraction(4, 3)
    assert scores["paris"] == Fraction(4, 3)
    assert scores["mesures"] == Fraction(8, 3)
    assert scores["x"] == Fraction(2, 3)
    ranked = [token for token, _ in discovery.ratio_ranked_words(target, background)]
    assert ranked == ["mesures", "paris", "quarantaine", "weather", "x", "y"]


def test_planted_false_negative_token_outranks_background():
    rng = random.Random(4)
    common = ["the", "news", "today", "people", "city"]
    target = corpus_from_texts("fn", [" ".join(rng.sample(common, 2) + ["quarantaine"]) for _ in range(30)])
    background = corpus_from_texts("all", [" ".join(rng.sample(common, 3)) for _ in range(300)])
    ranked = discovery.ratio_ranked_words(target, background)
    assert ranked[0][0] == "quarantaine"
    assert all(score < ranked[0][1] for _, score in ranked[1:])


def test_top_ngrams():
    corpus = corpus_from_texts("c", ["social distancing now", "social distancing"])
    assert discovery.top_ngrams(corpus, 2)[0] == ("social distancing", 2)
    assert discovery.top_ngrams(corpus, 3) == [("social distancing now", 1)]


def test_top_ngrams_bad_n():
    with pytest.raises(TopicKitError) as excinfo:
        discovery.top_ngrams(corpus_from_texts("c", ["a b c d"]), 4)
    assert excinfo.value.code == ErrorCode.BAD_ARGUMENT


def test_top_ngrams_nothing_long_enough():
    with pytest.raises(TopicKitError) as excinfo:
        discovery.top_ngrams(corpus_from_texts("c", ["a b"]), 3)
    assert excinfo.value.code == ErrorCode.EMPTY_SELECTION


def test_diff_matches():
    corpus = corpus_from_texts("c", ["covid test", "corona beer", "flu"])
    old, new = matcher.compile("corona"), matcher.compile("corona|covid")
    report = discovery.diff_matches(old, new, corpus)
    assert (report.new_total, report.lost_total) == (1, 0)
    assert report.new_top == (("covid test", 1),)
    swapped = discovery.diff_matches(new, old, corpus)
    assert (swapped.new_total, swapped.lost_total, swapped.lost_top) == (0, 1, report.new_top)
    same = discovery.diff_matches(old, old, corpus)
    assert (same.new_total, same.lost_total) == (0, 0)


def test_diff_aggregates_repeated_texts():
    corpus = corpus_from_texts("c", ["corona beer", "corona news", "corona beer"], weights=[5, 2, 4])
    report = discovery.diff_matches(matcher.compile("corona"), matcher.compile("corona(?! beer)"), corpus)
    assert report.lost_top == (("corona beer", 9),)
    assert report.lost_total == 9


def test_select_by_outcome():
    labels = [Label.POSITIVE, Label.POSITIVE, Label.NEGATIVE, Label.NEGATIVE]
    corpus = corpus_from_texts("c", ["covid news", "quarantaine", "covid party", "flu"], labels=labels)
    m = matcher.compile("covid")
    texts = {o: [d.text for d in discovery.select_by_outcome(m, corpus, o).docs] for o in Outcome}
    assert texts == {
        Outcome.TP: ["covid news"],
        Outcome.FN: ["quarantaine"],
        Outcome.FP: ["covid party"],
        Outcome.TN: ["flu"],
    }


def test_select_by_outcome_needs_labels():
    with pytest.raises(TopicKitError) as excinfo:
        discovery.select_by_outcome(matcher.compile("covid"), corpus_from_texts("c", ["covid"]), Outcome.TP)
    assert excinfo.value.code == ErrorCode.UNLABELED_DOC


def test_keyword_discovery_surfaces_planted_variants():
    rng = random.Random(2020)
    variants = ["covid1", "cov0", "covit", "coronaviru"]
    filler = ["les", "mesures", "paris", "nouvelles", "masques", "vaccin", "hopital", "confinement", "ecole"]
    texts = []
    for _ in range(10_000):
        words = rng.sample(filler, 3)
        roll = rng.random()
        if roll < 0.2:
            words.append(rng.choice(["covid", "coronavirus"]))
        if roll < 0.05:
            words.append(rng.choice(variants))
        rng.shuffle(words)
        texts.append(" ".join(words))
    corpus = corpus_from_texts("fr", texts)
    top = [token for token, _ in discovery.top_words(corpus, matcher.compile("covid|coronavirus"), k=50)]
    for variant in variants:
        assert variant in top


def test_results_do_not_depend_on_jobs():
    corpus = corpus_from_texts("c", [f"covid news {i % 7} corona" for i in range(40)])
    seed = matcher.compile("covid")
    assert discovery.top_words(corpus, seed, jobs=1) == discovery.top_words(corpus, seed, jobs=2)
    assert discovery.cooccurring_words(corpus, seed, jobs=1) == discovery.cooccurring_words(corpus, seed, jobs=2)
