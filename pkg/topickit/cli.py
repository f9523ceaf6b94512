"""Command-line surface of the toolkit.

Regex inputs (--regex, --old, --new, --safe, ...) accept:

\b
  doc.json                        a regex document, rendered compactly
  file.regex                      a stored-form regex (doubled backslashes)
  registry:topic/lang/tier[@v]    a published registry entry

Corpus inputs are TXT (one document per line) or TSV (text, weight, label
1/0/-, optional id); the format follows the file suffix.
"""
import json
import logging
import sys
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence

import click

from topickit import __version__
from topickit.core.config import DEFAULT_JOBS, LOG_LEVEL, MAX_CONCAT_LANGS, get_registry_path
from topickit.core.errors import USAGE_CODES, ErrorCode, TopicKitError
from topickit.models.schemas import Corpus, Customization, Outcome, RenderOptions, SafeScope, Tier
from topickit.services import discovery, evaluator, matcher, profiler, registry_service
from topickit.services.corpus_service import ingest, require_nonempty
from topickit.services.document_service import load_document
from topickit.services.renderer import escape_for_store, render, render_compact, unescape_from_store
from topickit.services.validator import has_errors, validate
from topickit.services.variants import count_variants

logger = logging.getLogger(__name__)

REGISTRY_PREFIX = "registry:"
FORMATS = ["json", "jsonl", "tsv"]


class TopicKitGroup(click.Group):
    """Turns domain errors into a JSON error on stderr and the matching exit code."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except TopicKitError as e:
            click.echo(json.dumps({"error": e.to_dict()}, ensure_ascii=False), err=True)
            ctx.exit(2 if e.code in USAGE_CODES else 1)


# ---------------------------------------------------------------------------
# shared options and loaders
# ---------------------------------------------------------------------------

def format_option(default: str):
    return click.option("--format", "fmt", type=click.Choice(FORMATS), default=default, show_default=True,
                        help="Output format on stdout.")


def jobs_option(f):
    return click.option("--jobs", type=click.IntRange(min=1), default=DEFAULT_JOBS, show_default=True,
                        help="Worker processes for corpus scans; results do not depend on it.")(f)


def top_k_option(f):
    return click.option("--top-k", "top_k", type=click.IntRange(min=1), default=50, show_default=True)(f)


def read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise TopicKitError(ErrorCode.IO_ERROR, str(e), path)


def parse_registry_key(key: str):
    """"topic/lang/tier[@version]" -> (topic, lang, Tier, version or None)."""
    body, _, pinned = key.partition("@")
    parts = body.split("/")
    if len(parts) != 3:
        raise TopicKitError(ErrorCode.BAD_ARGUMENT, f"registry key must be topic/language/tier[@version], got '{key}'")
    try:
        tier = Tier(parts[2])
        version = int(pinned) if pinned else None
    except ValueError:
        raise TopicKitError(ErrorCode.BAD_ARGUMENT, f"bad tier or version in registry key '{key}'")
    return parts[0], parts[1], tier, version


def load_regex(source: str, registry: str) -> str:
    """Live regex from a document, a stored-form file or a registry key."""
    if source.startswith(REGISTRY_PREFIX):
        topic, language, tier, version = parse_registry_key(source[len(REGISTRY_PREFIX):])
        entry = registry_service.fetch(topic, language, tier, version, path=registry)
        return unescape_from_store(entry.stored_regex)
    if source.lower().endswith(".json"):
        return render_compact(load_document(source))
    stored = read_text(source)
    if stored.endswith("\n"):
        stored = stored[:-1].rstrip("\r")
    return unescape_from_store(stored)


def load_matcher(source: str, registry: str, customization: Optional[str] = None) -> matcher.CompiledTopicMatcher:
    custom = matcher.load_customization(customization) if customization else Customization()
    return matcher.compile(load_regex(source, registry), custom)


def load_corpus(path: str) -> Corpus:
    return require_nonempty(ingest(path))


def emit_json(data: Any) -> None:
    click.echo(json.dumps(data, ensure_ascii=False, indent=2))


def emit_jsonl(rows: Iterable[Any]) -> None:
    for row in rows:
        click.echo(json.dumps(row, ensure_ascii=False))


def tsv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value).replace("\t", " ").replace("\n", " ")


def emit_tsv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    click.echo("\t".join(header))
    for row in rows:
        click.echo("\t".join(tsv_cell(v) for v in row))


def emit_records(fmt: str, records: List[dict], header: Sequence[str]) -> None:
    if fmt == "json":
        emit_json(records)
    elif fmt == "jsonl":
        emit_jsonl(records)
    else:
        emit_tsv(header, ([r[h] for h in header] for r in records))


def write_bundle(path: str, content: str) -> None:
    try:
        Path(path).write_text(content, encoding="utf-8")
    except OSError as e:
        raise TopicKitError(ErrorCode.IO_ERROR, str(e), path)
    logger.info(f"Wrote review bundle to {path}")


# ---------------------------------------------------------------------------
# root group
# ---------------------------------------------------------------------------

@click.group(cls=TopicKitGroup, context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="topickit")
@click.option("--registry", envvar="TOPICKIT_REGISTRY", default=None, type=click.Path(dir_okay=False),
              help="Registry JSON file (default: $TOPICKIT_REGISTRY or registry.json).")
@click.option("-v", "--verbose", count=True, help="Log INFO (-v) or DEBUG (-vv) to stderr.")
@click.pass_context
def cli(ctx: click.Context, registry: Optional[str], verbose: int):
    """Build, check, evaluate, profile and publish topic regexes."""
    level = {0: LOG_LEVEL, 1: "INFO"}.get(verbose, "DEBUG")
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    ctx.obj = {"registry": registry or get_registry_path()}


# ---------------------------------------------------------------------------
# authoring
# ---------------------------------------------------------------------------

@cli.command("validate")
@click.option("--doc", type=click.Path(dir_okay=False), help="Regex document (JSON).")
@click.option("--stored", type=click.Path(dir_okay=False), help="Stored-form regex file.")
@click.option("--banlist", type=click.Path(dir_okay=False), help="File of banned-syntax regexes, one per line.")
@format_option("json")
def validate_cmd(doc: Optional[str], stored: Optional[str], banlist: Optional[str], fmt: str):
    """Lint a document or stored regex. Exit 1 when any ERROR finding is reported."""
    if (doc is None) == (stored is None):
        raise click.UsageError("give exactly one of --doc or --stored")
    bans = [line for line in read_text(banlist).splitlines() if line.strip()] if banlist else None
    if doc is not None:
        target = load_document(doc)
    else:
        target = read_text(stored)
        if target.endswith("\n"):
            target = target[:-1].rstrip("\r")
    findings = validate(target, bans)
    emit_records(fmt, [f.model_dump(mode="json") for f in findings], ["severity", "code", "location", "message"])
    if has_errors(findings):
        click.get_current_context().exit(1)


@cli.command("render")
@click.option("--doc", required=True, type=click.Path(dir_okay=False))
@click.option("--annotated/--compact", default=False, help="Add version, section labels and line breaks.")
@click.option("--width", type=click.IntRange(min=20), default=100, show_default=True, help="Annotated line width.")
@click.option("--live", is_flag=True, help="Print the live form instead of the stored form.")
def render_cmd(doc: str, annotated: bool, width: int, live: bool):
    """Render a document to a regex (stored form unless --live)."""
    regex = render(load_document(doc), RenderOptions(annotated=annotated, max_line_width=width))
    click.echo(regex if live else escape_for_store(regex))


@cli.command("count")
@click.argument("fragment")
def count_cmd(fragment: str):
    """Number of distinct strings a finite fragment spells."""
    emit_json({"fragment": fragment, "variants": count_variants(fragment)})


# ---------------------------------------------------------------------------
# matching
# ---------------------------------------------------------------------------

@cli.command("match")
@click.option("--regex", required=True)
@click.option("--corpus", required=True, type=click.Path(dir_okay=False))
@click.option("--customization", type=click.Path(dir_okay=False), help="Customization JSON.")
@click.option("--early-exit", is_flag=True, help="Stop at the first match; snippets are omitted.")
@click.option("--review-bundle", type=click.Path(dir_okay=False), help="Also write (id, text, snippets) TSV.")
@jobs_option
@format_option("jsonl")
@click.pass_obj
def match_cmd(obj: dict, regex: str, corpus: str, customization: Optional[str], early_exit: bool,
              review_bundle: Optional[str], jobs: int, fmt: str):
    """Classify every document and explain matches with snippets."""
    m = load_matcher(regex, obj["registry"], customization)
    c = load_corpus(corpus)
    reports = discovery.match_reports(m, c.docs, early_exit, jobs)
    records = [
        {"doc_id": doc.id, "matched": r.matched, "vetoed": r.vetoed, "snippets": list(r.snippets)}
        for doc, r in zip(c.docs, reports)
    ]
    if fmt == "tsv":
        emit_tsv(["doc_id", "matched", "vetoed", "snippets"],
                 ([r["doc_id"], int(r["matched"]), int(r["vetoed"]), " | ".join(r["snippets"])] for r in records))
    else:
        emit_records(fmt, records, [])
    if review_bundle:
        write_bundle(review_bundle, evaluator.export_review(
            (doc, r) for doc, r in zip(c.docs, reports) if r.matched
        ))


def _emit_diff(report, fmt: str) -> None:
    if fmt == "tsv":
        rows = [("new", text, weight) for text, weight in report.new_top]
        rows += [("lost", text, weight) for text, weight in report.lost_top]
        rows += [("new_total", "", report.new_total), ("lost_total", "", report.lost_total)]
        emit_tsv(["kind", "text", "weight"], rows)
    else:
        emit_json(report.model_dump(mode="json"))


@cli.command("diff")
@click.option("--old", required=True)
@click.option("--new", required=True)
@click.option("--corpus", required=True, type=click.Path(dir_okay=False))
@top_k_option
@jobs_option
@format_option("json")
@click.pass_obj
def diff_cmd(obj: dict, old: str, new: str, corpus: str, top_k: int, jobs: int, fmt: str):
    """New and lost matches of a candidate regex against the current one."""
    report = discovery.diff_matches(
        load_matcher(old, obj["registry"]), load_matcher(new, obj["registry"]), load_corpus(corpus), top_k, jobs
    )
    _emit_diff(report, fmt)


# ---------------------------------------------------------------------------
# discovery
# ---------------------------------------------------------------------------

def _emit_ranking(ranking, fmt: str) -> None:
    emit_records(fmt, [{"token": token, "value": value} for token, value in ranking], ["token", "value"])


def _outcome_corpus(obj: dict, corpus: str, outcome: Optional[str], classifier: Optional[str], jobs: int) -> Corpus:
    c = load_corpus(corpus)
    if outcome is None:
        return c
    if classifier is None:
        raise click.UsageError("--outcome needs --classifier")
    selected = discovery.select_by_outcome(load_matcher(classifier, obj["registry"]), c, Outcome(outcome.upper()), jobs)
    return require_nonempty(selected)


def outcome_options(f):
    f = click.option("--classifier", help="Regex whose outcome (--outcome) selects the sub-corpus.")(f)
    return click.option("--outcome", type=click.Choice(["tp", "fp", "fn", "tn"]),
                        help="Restrict a labeled corpus to the classifier's TP/FP/FN/TN documents.")(f)


@cli.group("discover", cls=TopicKitGroup)
def discover():
    """Keyword discovery: frequent words, co-occurrences, ratios, n-grams."""


@discover.command("words")
@click.option("--corpus", required=True, type=click.Path(dir_okay=False))
@click.option("--regex", help="Only count documents this regex matches.")
@outcome_options
@top_k_option
@jobs_option
@format_option("tsv")
@click.pass_obj
def discover_words(obj: dict, corpus: str, regex: Optional[str], outcome: Optional[str], classifier: Optional[str],
                   top_k: int, jobs: int, fmt: str):
    c = _outcome_corpus(obj, corpus, outcome, classifier, jobs)
    flt = load_matcher(regex, obj["registry"]) if regex else None
    _emit_ranking(discovery.top_words(c, flt, top_k, jobs), fmt)


@discover.command("cooccur")
@click.option("--corpus", required=True, type=click.Path(dir_okay=False))
@click.option("--regex", required=True, help="Seed regex.")
@click.option("--window", type=click.IntRange(min=1), default=2, show_default=True)
@outcome_options
@top_k_option
@jobs_option
@format_option("tsv")
@click.pass_obj
def discover_cooccur(obj: dict, corpus: str, regex: str, window: int, outcome: Optional[str],
                     classifier: Optional[str], top_k: int, jobs: int, fmt: str):
    c = _outcome_corpus(obj, corpus, outcome, classifier, jobs)
    seed = load_matcher(regex, obj["registry"])
    _emit_ranking(discovery.cooccurring_words(c, seed, window, top_k, jobs), fmt)


@discover.command("ratio")
@click.option("--corpus", required=True, type=click.Path(dir_okay=False), help="Target corpus.")
@click.option("--background", required=True, type=click.Path(dir_okay=False))
@top_k_option
@jobs_option
@format_option("tsv")
def discover_ratio(corpus: str, background: str, top_k: int, jobs: int, fmt: str):
    ranking = discovery.ratio_ranked_words(load_corpus(corpus), load_corpus(background), top_k, jobs)
    _emit_ranking([(token, round(score, 6)) for token, score in ranking], fmt)


@discover.command("ngrams")
@click.option("--corpus", required=True, type=click.Path(dir_okay=False))
@click.option("--n", "n", type=click.IntRange(2, 3), default=2, show_default=True)
@click.option("--regex", help="Only count documents this regex matches.")
@outcome_options
@top_k_option
@jobs_option
@format_option("tsv")
@click.pass_obj
def discover_ngrams(obj: dict, corpus: str, n: int, regex: Optional[str], outcome: Optional[str],
                    classifier: Optional[str], top_k: int, jobs: int, fmt: str):
    c = _outcome_corpus(obj, corpus, outcome, classifier, jobs)
    flt = load_matcher(regex, obj["registry"]) if regex else None
    _emit_ranking(discovery.top_ngrams(c, n, flt, top_k, jobs), fmt)


@discover.command("diff")
@click.option("--old", required=True)
@click.option("--new", required=True)
@click.option("--corpus", required=True, type=click.Path(dir_okay=False))
@top_k_option
@jobs_option
@format_option("json")
@click.pass_obj
def discover_diff(obj: dict, old: str, new: str, corpus: str, top_k: int, jobs: int, fmt: str):
    report = discovery.diff_matches(
        load_matcher(old, obj["registry"]), load_matcher(new, obj["registry"]), load_corpus(corpus), top_k, jobs
    )
    _emit_diff(report, fmt)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

@cli.group("eval", cls=TopicKitGroup)
def eval_group():
    """Confusion metrics, safe-regex confirmation, recall gain, positive sampling."""


@eval_group.command("confusion")
@click.option("--regex", required=True)
@click.option("--corpus", required=True, type=click.Path(dir_okay=False), help="Labeled TSV corpus.")
@click.option("--against", help="Second classifier; adds its metrics and the relative gain over it.")
@jobs_option
@click.pass_obj
def eval_confusion(obj: dict, regex: str, corpus: str, against: Optional[str], jobs: int):
    c = load_corpus(corpus)
    report = evaluator.confusion_eval(load_matcher(regex, obj["registry"]), c, jobs)
    if against is None:
        emit_json(report.model_dump(mode="json"))
        return
    other = evaluator.confusion_eval(load_matcher(against, obj["registry"]), c, jobs)
    emit_json({
        "regex": report.model_dump(mode="json"),
        "against": other.model_dump(mode="json"),
        "gain": evaluator.metric_gain(other, report).model_dump(mode="json"),
    })


@eval_group.command("safe")
@click.option("--regex", required=True, help="Main regex.")
@click.option("--safe", "safe_regex", required=True, help="High-precision regex.")
@click.option("--corpus", required=True, type=click.Path(dir_okay=False))
@click.option("--scope", type=click.Choice([s.value for s in SafeScope]), default=SafeScope.MATCHED_BY_MAIN.value,
              show_default=True)
@click.option("--review-bundle", type=click.Path(dir_okay=False), help="Write residual documents as TSV.")
@jobs_option
@click.pass_obj
def eval_safe(obj: dict, regex: str, safe_regex: str, corpus: str, scope: str, review_bundle: Optional[str], jobs: int):
    main = load_matcher(regex, obj["registry"])
    c = load_corpus(corpus)
    report = evaluator.safe_confirm(main, load_matcher(safe_regex, obj["registry"]), c, SafeScope(scope), jobs)
    emit_json(report.model_dump(mode="json"))
    if review_bundle:
        residual = set(report.residual_ids)
        write_bundle(review_bundle, evaluator.export_review(
            (doc, matcher.classify(main, doc.text)) for doc in c.docs if doc.id in residual
        ))


@eval_group.command("gain")
@click.option("--base", required=True)
@click.option("--improved", required=True)
@click.option("--corpus", required=True, type=click.Path(dir_okay=False))
@jobs_option
@click.pass_obj
def eval_gain(obj: dict, base: str, improved: str, corpus: str, jobs: int):
    report = evaluator.recall_gain(
        load_matcher(base, obj["registry"]), load_matcher(improved, obj["registry"]), load_corpus(corpus), jobs
    )
    emit_json(report.model_dump(mode="json"))


@eval_group.command("sample")
@click.option("--a", "regex_a", required=True)
@click.option("--b", "regex_b", required=True)
@click.option("--corpus", required=True, type=click.Path(dir_okay=False))
@click.option("--n", "n", type=click.IntRange(min=1), help="Sample size (default: every positive).")
@click.option("--seed", type=int, default=0, show_default=True)
@jobs_option
@format_option("tsv")
@click.pass_obj
def eval_sample(obj: dict, regex_a: str, regex_b: str, corpus: str, n: Optional[int], seed: int, jobs: int, fmt: str):
    """Documents flagged by either classifier, as a TSV corpus ready for labeling."""
    sample = evaluator.sample_positives(
        load_matcher(regex_a, obj["registry"]), load_matcher(regex_b, obj["registry"]), load_corpus(corpus), n, seed, jobs
    )
    if fmt == "tsv":
        for doc in sample.docs:
            click.echo("\t".join([tsv_cell(doc.text), str(doc.weight), "-", doc.id]))
    else:
        emit_records(fmt, [doc.model_dump(mode="json") for doc in sample.docs], [])


@cli.command("bench")
@click.option("--regex", required=True)
@click.option("--corpus", required=True, type=click.Path(dir_okay=False), help="Texts to time.")
@click.option("--reps", type=int, default=10, show_default=True)
@format_option("json")
@click.pass_obj
def bench_cmd(obj: dict, regex: str, corpus: str, reps: int, fmt: str):
    """Per-call matching time, full-snippet and early-exit, by text length."""
    report = evaluator.bench(load_matcher(regex, obj["registry"]), [doc.text for doc in load_corpus(corpus).docs], reps)
    if fmt == "json":
        emit_json(report.model_dump(mode="json"))
    else:
        emit_records(fmt, [b.model_dump(mode="json") for b in report.buckets],
                     ["mode", "text_chars", "mean_ms", "std_ms", "reps"])


# ---------------------------------------------------------------------------
# profiling
# ---------------------------------------------------------------------------

@cli.command("profile")
@click.option("--regex", required=True)
@click.option("--corpus", "corpora", required=True, multiple=True, type=click.Path(dir_okay=False))
@click.option("--progress", is_flag=True, help="Progress bar on stderr.")
@jobs_option
@format_option("tsv")
@click.pass_obj
def profile_cmd(obj: dict, regex: str, corpora: Sequence[str], progress: bool, jobs: int, fmt: str):
    """Percent of matched weight lost when each chunk is replaced by an unmatchable literal."""
    report = profiler.profile(load_regex(regex, obj["registry"]), [load_corpus(p) for p in corpora], jobs, progress)
    if fmt != "tsv":
        emit_json(report.model_dump(mode="json"))
        return
    rows = []
    for row in report.rows:
        losses = [row.loss_pct.get(name) for name in report.corpora]
        rows.append([row.chunk.text, *losses, None if row.skipped else row.max_loss, row.chunk.kind.value])
    emit_tsv(["chunk", *report.corpora, "max", "kind"], rows)


@cli.command("distill")
@click.option("--regex", required=True)
@click.option("--corpus", required=True, type=click.Path(dir_okay=False), help="Calibration corpus.")
@click.option("--budget", type=click.FloatRange(min=0), required=True, help="Allowed recall loss in percent.")
@jobs_option
@click.pass_obj
def distill_cmd(obj: dict, regex: str, corpus: str, budget: float, jobs: int):
    """Suggest chunks whose removal keeps recall loss within the budget."""
    result = profiler.distill(load_regex(regex, obj["registry"]), load_corpus(corpus), budget, jobs)
    emit_json(result.model_dump(mode="json"))


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

@cli.command("publish")
@click.option("--doc", required=True, type=click.Path(dir_okay=False))
@click.option("--annotated", is_flag=True, help="Publish the annotated rendering.")
@click.pass_obj
def publish_cmd(obj: dict, doc: str, annotated: bool):
    """Append a document's rendered regex to the registry."""
    entry = registry_service.build_entry(load_document(doc), annotated)
    version = registry_service.publish(entry, obj["registry"])
    emit_json({"topic": entry.topic, "language": entry.language, "tier": entry.tier.value, "version": version})


@cli.command("fetch")
@click.argument("topic")
@click.argument("language")
@click.argument("tier", type=click.Choice([t.value for t in Tier]))
@click.option("--version", "version", type=click.IntRange(min=1), help="Pinned version (default: latest).")
@click.pass_obj
def fetch_cmd(obj: dict, topic: str, language: str, tier: str, version: Optional[int]):
    entry = registry_service.fetch(topic, language, Tier(tier), version, path=obj["registry"])
    emit_json(entry.model_dump(mode="json"))


@cli.command("list")
@format_option("json")
@click.pass_obj
def list_cmd(obj: dict, fmt: str):
    entries = registry_service.list_entries(obj["registry"])
    records = [e.model_dump(mode="json") for e in entries]
    emit_records(fmt, records, ["topic", "language", "tier", "version", "published_at", "fingerprint"])


@cli.command("concat")
@click.argument("keys", nargs=-1, required=True)
@click.option("--max-langs", type=click.IntRange(min=1), default=MAX_CONCAT_LANGS, show_default=True)
@click.option("--stored", is_flag=True, help="Print the stored form instead of the live form.")
@click.pass_obj
def concat_cmd(obj: dict, keys: Sequence[str], max_langs: int, stored: bool):
    """Join registry entries (topic/lang/tier[@v], primary language first) into one regex."""
    entries = []
    for key in keys:
        topic, language, tier, version = parse_registry_key(key)
        entries.append(registry_service.fetch(topic, language, tier, version, path=obj["registry"]))
    combined = registry_service.concat_for_language(entries, max_langs)
    click.echo(escape_for_store(combined) if stored else combined)


def main() -> None:
    cli(prog_name="topickit")
