"""Keyword discovery over corpora.

All statistics count each document once per token (document frequency) and
scale by the document weight, so a query repeated 42 times counts 42. Rankings
sort by descending value and break ties lexicographically.
"""
import logging
from collections import Counter
from fractions import Fraction
from functools import partial
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from topickit.core.errors import ErrorCode, TopicKitError
from topickit.models.schemas import Corpus, DiffReport, Document, Label, MatchReport, Outcome
from topickit.services.corpus_service import token_spans, tokenize
from topickit.services.matcher import CompiledTopicMatcher, classify, is_match, preprocess
from topickit.services.parallel import parallel_map

logger = logging.getLogger(__name__)


def rank(values: Mapping[str, object], k: int) -> List[Tuple[str, object]]:
    return sorted(values.items(), key=lambda item: (-item[1], item[0]))[:k]


def _match_doc(m: CompiledTopicMatcher, doc: Document) -> bool:
    return is_match(m, doc.text)


def match_flags(m: CompiledTopicMatcher, docs: Sequence[Document], jobs: int = 1) -> List[bool]:
    return parallel_map(partial(_match_doc, m), docs, jobs)


def _report_doc(m: CompiledTopicMatcher, early_exit: bool, doc: Document) -> MatchReport:
    return classify(m, doc.text, early_exit=early_exit)


def match_reports(m: CompiledTopicMatcher, docs: Sequence[Document], early_exit: bool = False, jobs: int = 1) -> List[MatchReport]:
    """One MatchReport per document, in input order."""
    return parallel_map(partial(_report_doc, m, early_exit), docs, jobs)


def _token_set(doc: Document) -> Tuple[str, ...]:
    return tuple(sorted(set(tokenize(doc.text))))


def _ngram_set(n: int, doc: Document) -> Tuple[str, ...]:
    tokens = tokenize(doc.text)
    return tuple(sorted({" ".join(tokens[i:i + n]) for i in range(len(tokens) - n + 1)}))


def _check_k(k: int) -> None:
    if k < 1:
        raise TopicKitError(ErrorCode.BAD_ARGUMENT, f"k must be at least 1, got {k}")


def _select(c: Corpus, flt: Optional[CompiledTopicMatcher], jobs: int) -> List[Document]:
    if flt is None:
        docs = list(c.docs)
    else:
        docs = [doc for doc, hit in zip(c.docs, match_flags(flt, c.docs, jobs)) if hit]
    if not docs:
        raise TopicKitError(ErrorCode.EMPTY_SELECTION, f"no document of '{c.name}' passes the filter")
    return docs


def _weighted_df(docs: Sequence[Document], sets: Sequence[Tuple[str, ...]]) -> Counter:
    counts: Counter = Counter()
    for doc, items in zip(docs, sets):
        for item in items:
            counts[item] += doc.weight
    return counts


def top_words(c: Corpus, filter: Optional[CompiledTopicMatcher] = None, k: int = 50, jobs: int = 1) -> List[Tuple[str, int]]:
    _check_k(k)
    docs = _select(c, filter, jobs)
    counts = _weighted_df(docs, parallel_map(_token_set, docs, jobs))
    logger.info(f"Counted {len(counts)} distinct tokens over {len(docs)} documents")
    return rank(counts, k)


def _doc_cooccurrences(seed: CompiledTopicMatcher, window: int, doc: Document) -> Optional[Dict[str, int]]:
    if not classify(seed, doc.text, early_exit=True).matched:
        return None
    body = preprocess(doc.text, seed.customization, seed.strips)
    spans = [(found.start(), found.end()) for found in seed.main.finditer(body) if found.group(0)]
    tokens = token_spans(body)
    inside = {
        index for index, (_, start, end) in enumerate(tokens)
        if any(start < s_end and end > s_start for s_start, s_end in spans)
    }
    counts: Counter = Counter()
    for s_start, s_end in spans:
        left = sum(1 for _, _, end in tokens if end <= s_start)
        right = next((i for i, (_, start, _) in enumerate(tokens) if start >= s_end), len(tokens))
        neighbours = list(range(max(0, left - window), left)) + list(range(right, min(len(tokens), right + window)))
        for index in neighbours:
            if index not in inside:
                counts[tokens[index][0]] += 1
    return dict(counts)


def cooccurring_words(c: Corpus, seed: CompiledTopicMatcher, window: int = 2, k: int = 50, jobs: int = 1) -> List[Tuple[str, int]]:
    """Tokens found within `window` tokens of each seed match, weighted per occurrence."""
    _check_k(k)
    if window < 1:
        raise TopicKitError(ErrorCode.BAD_ARGUMENT, f"window must be at least 1, got {window}")
    per_doc = parallel_map(partial(_doc_cooccurrences, seed, window), c.docs, jobs)
    counts: Counter = Counter()
    matched = 0
    for doc, found in zip(c.docs, per_doc):
        if found is None:
            continue
        matched += 1
        for token, n in found.items():
            counts[token] += n * doc.weight
    if not matched:
        raise TopicKitError(ErrorCode.EMPTY_SELECTION, f"seed regex matches nothing in '{c.name}'")
    return rank(counts, k)


def ratio_scores(target: Corpus, background: Corpus, jobs: int = 1) -> Dict[str, Fraction]:
    for corpus in (target, background):
        if not corpus.docs:
            raise TopicKitError(ErrorCode.EMPTY_SELECTION, f"corpus '{corpus.name}' has no documents")
    df_target = _weighted_df(target.docs, parallel_map(_token_set, target.docs, jobs))
    df_background = _weighted_df(background.docs, parallel_map(_token_set, background.docs, jobs))
    n_target = target.total_weight
    n_background = background.total_weight
    scores = {}
    for token in set(df_target) | set(df_background):
        p_target = Fraction(df_target[token] + 1, n_target + 1)
        p_background = Fraction(df_background[token] + 1, n_background + 1)
        scores[token] = p_target / p_background
    return scores


def ratio_ranked_words(target: Corpus, background: Corpus, k: int = 50, jobs: int = 1) -> List[Tuple[str, float]]:
    """Tokens over-represented in target relative to background (add-one smoothed)."""
    _check_k(k)
    return [(token, float(score)) for token, score in rank(ratio_scores(target, background, jobs), k)]


def top_ngrams(c: Corpus, n: int = 2, filter: Optional[CompiledTopicMatcher] = None, k: int = 50, jobs: int = 1) -> List[Tuple[str, int]]:
    if n not in (2, 3):
        raise TopicKitError(ErrorCode.BAD_ARGUMENT, f"n must be 2 or 3, got {n}")
    _check_k(k)
    docs = _select(c, filter, jobs)
    counts = _weighted_df(docs, parallel_map(partial(_ngram_set, n), docs, jobs))
    if not counts:
        raise TopicKitError(ErrorCode.EMPTY_SELECTION, f"no document of '{c.name}' has {n} tokens")
    return rank(counts, k)


def diff_matches(old: CompiledTopicMatcher, new: CompiledTopicMatcher, c: Corpus, k: int = 50, jobs: int = 1) -> DiffReport:
    """Weighted new and lost matches of a candidate regex against the current one."""
    _check_k(k)
    old_hits = match_flags(old, c.docs, jobs)
    new_hits = match_flags(new, c.docs, jobs)
    gained: Counter = Counter()
    lost: Counter = Counter()
    for doc, was, now in zip(c.docs, old_hits, new_hits):
        if now and not was:
            gained[doc.text] += doc.weight
        elif was and not now:
            lost[doc.text] += doc.weight
    return DiffReport(
        new_total=sum(gained.values()),
        lost_total=sum(lost.values()),
        new_top=tuple(rank(gained, k)),
        lost_top=tuple(rank(lost, k)),
    )


def select_by_outcome(m: CompiledTopicMatcher, c: Corpus, outcome: Outcome, jobs: int = 1) -> Corpus:
    """Sub-corpus of true/false positives/negatives of m against the (noisy) labels."""
    for doc in c.docs:
        if doc.label is None:
            raise TopicKitError(ErrorCode.UNLABELED_DOC, f"document '{doc.id}' has no label", doc.id)
    hits = match_flags(m, c.docs, jobs)
    wanted_hit = outcome in (Outcome.TP, Outcome.FP)
    wanted_label = Label.POSITIVE if outcome in (Outcome.TP, Outcome.FN) else Label.NEGATIVE
    docs = tuple(doc for doc, hit in zip(c.docs, hits) if hit == wanted_hit and doc.label == wanted_label)
    logger.info(f"Selected {len(docs)} {outcome.value} documents from '{c.name}'")
    return Corpus(name=f"{c.name}:{outcome.value.lower()}", docs=docs)
