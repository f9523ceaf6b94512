import csv
import io
import logging
import random
import statistics
import time
from collections import defaultdict
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from topickit.core.config import MIN_BENCH_REPS
from topickit.core.errors import ErrorCode, TopicKitError
from topickit.models.schemas import (
    ConfusionReport,
    Corpus,
    Document,
    Label,
    MatchReport,
    MetricGain,
    RecallGainReport,
    SafeConfirmReport,
    SafeScope,
    TimingBucket,
    TimingReport,
)
from topickit.services.discovery import match_flags
from topickit.services.matcher import CompiledTopicMatcher, classify

logger = logging.getLogger(__name__)


def _ratio(numerator: int, denominator: int) -> Optional[float]:
    return numerator / denominator if denominator else None


def confusion_from_counts(tp: int, fp: int, fn: int, tn: int) -> ConfusionReport:
    return ConfusionReport(
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        accuracy=_ratio(tp + tn, tp + fp + fn + tn),
        precision=_ratio(tp, tp + fp),
        recall=_ratio(tp, tp + fn),
    )


def confusion_eval(m: CompiledTopicMatcher, c: Corpus, jobs: int = 1) -> ConfusionReport:
    for doc in c.docs:
        if doc.label is None:
            raise TopicKitError(ErrorCode.UNLABELED_DOC, f"document '{doc.id}' has no label", doc.id)
    tp = fp = fn = tn = 0
    for doc, hit in zip(c.docs, match_flags(m, c.docs, jobs)):
        positive = doc.label == Label.POSITIVE
        if hit and positive:
            tp += doc.weight
        elif hit:
            fp += doc.weight
        elif positive:
            fn += doc.weight
        else:
            tn += doc.weight
    return confusion_from_counts(tp, fp, fn, tn)


def metric_gain(base: ConfusionReport, other: ConfusionReport) -> MetricGain:
    """Relative improvement of other over base for each metric (0.3114 = +31.14%)."""
    def gain(a: Optional[float], b: Optional[float]) -> Optional[float]:
        if a is None or b is None or a == 0:
            return None
        return b / a - 1

    return MetricGain(
        accuracy=gain(base.accuracy, other.accuracy),
        precision=gain(base.precision, other.precision),
        recall=gain(base.recall, other.recall),
    )


def safe_confirm(
    m: CompiledTopicMatcher,
    safe: CompiledTopicMatcher,
    c: Corpus,
    scope: SafeScope = SafeScope.MATCHED_BY_MAIN,
    jobs: int = 1,
) -> SafeConfirmReport:
    """Share of documents in scope that a 100%-precision regex confirms on its own."""
    if scope == SafeScope.MATCHED_BY_MAIN:
        considered = [doc for doc, hit in zip(c.docs, match_flags(m, c.docs, jobs)) if hit]
    else:
        considered = list(c.docs)
    if not considered:
        raise TopicKitError(ErrorCode.EMPTY_SELECTION, f"no documents of '{c.name}' in scope {scope.value}")
    confirmed = match_flags(safe, considered, jobs)
    residual = tuple(doc.id for doc, ok in zip(considered, confirmed) if not ok)
    auto_confirmed = len(considered) - len(residual)
    logger.info(f"Safe regex confirmed {auto_confirmed} of {len(considered)} documents")
    return SafeConfirmReport(
        considered=len(considered),
        auto_confirmed=auto_confirmed,
        fraction=auto_confirmed / len(considered),
        residual_ids=residual,
    )


def format_gain(ratio: float) -> str:
    if ratio < 2:
        return f"{(ratio - 1) * 100:+.1f}%"
    return f"×{ratio:.3g}"


def recall_gain(base: CompiledTopicMatcher, improved: CompiledTopicMatcher, c: Corpus, jobs: int = 1) -> RecallGainReport:
    base_weight = sum(doc.weight for doc, hit in zip(c.docs, match_flags(base, c.docs, jobs)) if hit)
    if base_weight == 0:
        raise TopicKitError(ErrorCode.ZERO_BASE, f"base regex matches nothing in '{c.name}'")
    improved_weight = sum(doc.weight for doc, hit in zip(c.docs, match_flags(improved, c.docs, jobs)) if hit)
    ratio = improved_weight / base_weight
    return RecallGainReport(
        base_weight=base_weight,
        improved_weight=improved_weight,
        ratio=ratio,
        display=format_gain(ratio),
    )


def sample_positives(
    a: CompiledTopicMatcher,
    b: CompiledTopicMatcher,
    c: Corpus,
    n: Optional[int] = None,
    seed: int = 0,
    jobs: int = 1,
) -> Corpus:
    """Documents flagged by at least one of two classifiers, for human labeling."""
    hits_a = match_flags(a, c.docs, jobs)
    hits_b = match_flags(b, c.docs, jobs)
    docs = [doc for doc, x, y in zip(c.docs, hits_a, hits_b) if x or y]
    if n is not None and n < len(docs):
        chosen = sorted(random.Random(seed).sample(range(len(docs)), n))
        docs = [docs[i] for i in chosen]
    return Corpus(name=f"{c.name}:positives", docs=tuple(docs))


def bench(m: CompiledTopicMatcher, texts: Sequence[str], reps: int = 10) -> TimingReport:
    """Per-call wall-clock timing, bucketed by exact text length.

    Full-snippet and early-exit modes are timed separately; one warm-up call per
    text and mode is discarded. Runs in the calling process only.
    """
    if reps < MIN_BENCH_REPS:
        raise TopicKitError(ErrorCode.BAD_ARGUMENT, f"reps must be at least {MIN_BENCH_REPS}, got {reps}")
    samples: Dict[Tuple[str, int], List[float]] = defaultdict(list)
    for text in texts:
        for mode, early in (("full", False), ("early", True)):
            classify(m, text, early_exit=early)
            for _ in range(reps):
                started = time.perf_counter_ns()
                classify(m, text, early_exit=early)
                elapsed_ms = (time.perf_counter_ns() - started) / 1e6
                samples[(mode, len(text))].append(max(elapsed_ms, 1e-6))
    buckets = []
    for (mode, chars), values in sorted(samples.items()):
        buckets.append(TimingBucket(
            mode=mode,
            text_chars=chars,
            mean_ms=statistics.mean(values),
            std_ms=statistics.stdev(values) if len(values) > 1 else 0.0,
            reps=len(values),
        ))
    return TimingReport(regex_chars=len(m.regex), buckets=tuple(buckets))


def export_review(rows: Iterable[Tuple[Document, MatchReport]]) -> str:
    """TSV of (id, text, snippets) for spreadsheet review; snippets joined by " | "."""
    out = io.StringIO()
    writer = csv.writer(out, delimiter="\t", lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(["id", "text", "snippets"])
    for doc, report in rows:
        writer.writerow([doc.id, doc.text.replace("\n", " "), " | ".join(report.snippets)])
    return out.getvalue()
