"""Structural profiling and distillation of topic regexes.

A regex is cut into chunks (clauses, group bodies, character classes, literal
words and bounded wildcards). Each chunk is ablated by replacing all of its
occurrences with an unmatchable literal, and the share of baseline-matched
weight that stops matching is recorded per corpus.
"""
import logging
import re
from functools import partial
from typing import Dict, List, Optional, Sequence, Set, Tuple

from tqdm import tqdm

from topickit.core.config import ABLATION_LITERAL
from topickit.core.errors import ErrorCode, TopicKitError
from topickit.models.schemas import Chunk, ChunkKind, Corpus, DistillResult, ProfileReport, ProfileRow
from topickit.services import matcher
from topickit.services.discovery import match_flags
from topickit.services.parallel import parallel_map
from topickit.services.regex_scan import Node, RegexSyntaxError, is_inert, parse, walk

logger = logging.getLogger(__name__)

# when one text is found by several rules, the earlier kind names it
_KIND_PRIORITY = [
    ChunkKind.CLAUSE,
    ChunkKind.GROUP,
    ChunkKind.QUANTIFIED_GAP,
    ChunkKind.LITERAL_WORD,
    ChunkKind.CHAR_CLASS,
]
_WORDISH = ("literal", "class")


def _compile_or_fail(regex: str) -> None:
    try:
        re.compile(regex)
    except re.error as e:
        raise TopicKitError(ErrorCode.COMPILE_FAIL, f"regex does not compile: {e.msg}", e.pos)


def _is_word_literal(text: str, node: Node) -> bool:
    return node.kind == "literal" and text[node.start].isalnum()


def _is_word_atom(text: str, node: Node) -> bool:
    if node.kind == "class" or _is_word_literal(text, node):
        return True
    return node.kind == "quant" and node.min == 0 and node.max == 1 and (
        node.children[0].kind == "class" or _is_word_literal(text, node.children[0])
    )


def _seq_chunks(text: str, seq: Node, add) -> None:
    items = seq.children
    # maximal literal runs of length >= 3
    i = 0
    while i < len(items):
        if _is_word_literal(text, items[i]):
            j = i
            while j < len(items) and _is_word_literal(text, items[j]):
                j += 1
            if j - i >= 3:
                add(ChunkKind.LITERAL_WORD, items[i].start, items[j - 1].end)
            i = j
        else:
            i += 1
    # spelled-variant words such as "c[o0]vi[dt]" and their class-anchored stems "i[dt]"
    i = 0
    while i < len(items):
        if _is_word_atom(text, items[i]):
            j = i
            while j < len(items) and _is_word_atom(text, items[j]):
                j += 1
            run = items[i:j]
            if any(node.kind != "literal" for node in run) and run[-1].end - run[0].start >= 3:
                add(ChunkKind.LITERAL_WORD, run[0].start, run[-1].end)
            for k in range(i + 1, j):
                if items[k].kind == "class" and _is_word_literal(text, items[k - 1]):
                    add(ChunkKind.CHAR_CLASS, items[k - 1].start, items[k].end)
            i = j
        else:
            i += 1


def _guarded_spans(root: Node) -> List[Tuple[int, int]]:
    return [(n.content_start, n.content_end) for n in walk(root) if n.kind == "group" and n.prefix == "?!"]


def decompose(regex: str) -> List[Chunk]:
    _compile_or_fail(regex)
    try:
        root = parse(regex)
    except RegexSyntaxError as e:
        raise TopicKitError(ErrorCode.COMPILE_FAIL, str(e), e.pos)

    found: Dict[str, Tuple[ChunkKind, List[Tuple[int, int]]]] = {}

    def add(kind: ChunkKind, start: int, end: int) -> None:
        chunk_text = regex[start:end]
        if start >= end or ABLATION_LITERAL in chunk_text:
            return
        if chunk_text not in found:
            found[chunk_text] = (kind, [(start, end)])
            return
        old_kind, spans = found[chunk_text]
        if _KIND_PRIORITY.index(kind) < _KIND_PRIORITY.index(old_kind):
            old_kind = kind
        if not any(start < s_end and end > s_start for s_start, s_end in spans):
            spans.append((start, end))
        found[chunk_text] = (old_kind, spans)

    for branch in root.children:
        if is_inert(regex, branch):
            continue
        add(ChunkKind.CLAUSE, branch.start, branch.end)
        for node in walk(branch):
            if node.kind == "group":
                add(ChunkKind.GROUP, node.content_start, node.content_end)
            elif node.kind == "class":
                add(ChunkKind.CHAR_CLASS, node.start, node.end)
            elif node.kind == "quant" and node.children[0].kind == "dot":
                add(ChunkKind.QUANTIFIED_GAP, node.start, node.end)
            elif node.kind == "seq":
                _seq_chunks(regex, node, add)

    guards = _guarded_spans(root)
    chunks = []
    for chunk_text, (kind, spans) in found.items():
        spans = sorted(spans)
        guarded = any(g_start <= s_start and s_end <= g_end for s_start, s_end in spans for g_start, g_end in guards)
        chunks.append(Chunk(text=chunk_text, kind=kind, occurrences=tuple(spans), guarded=guarded))
    chunks.sort(key=lambda c: (c.occurrences[0][0], -len(c.text), c.text))
    logger.info(f"Decomposed regex of {len(regex)} chars into {len(chunks)} chunks")
    return chunks


def ablate(regex: str, chunk: Chunk) -> str:
    out = regex
    for start, end in sorted(chunk.occurrences, reverse=True):
        if out[start:end] != chunk.text:
            raise TopicKitError(ErrorCode.ABLATION_INVALID, f"chunk '{chunk.text}' does not occur at {start}", start)
        out = out[:start] + ABLATION_LITERAL + out[end:]
    try:
        re.compile(out)
    except re.error as e:
        raise TopicKitError(ErrorCode.ABLATION_INVALID, f"ablating '{chunk.text}' breaks the regex: {e.msg}", e.pos)
    return out


def _matched_ids(regex: str, corpus: Corpus, jobs: int = 1) -> Set[int]:
    m = matcher.compile(regex)
    return {i for i, hit in enumerate(match_flags(m, corpus.docs, jobs)) if hit}


def _weight(corpus: Corpus, ids: Set[int]) -> int:
    return sum(corpus.docs[i].weight for i in ids)


def _row_for_chunk(regex: str, corpora: Sequence[Corpus], baselines: Dict[str, Set[int]], chunk: Chunk) -> ProfileRow:
    try:
        ablated = ablate(regex, chunk)
    except TopicKitError as e:
        logger.warning(f"Skipping chunk '{chunk.text}': {e.message}")
        return ProfileRow(chunk=chunk, skipped=True)
    loss: Dict[str, float] = {}
    gain: Dict[str, float] = {}
    for corpus in corpora:
        baseline = baselines[corpus.name]
        after = _matched_ids(ablated, corpus)
        base_weight = _weight(corpus, baseline)
        loss[corpus.name] = _weight(corpus, baseline - after) / base_weight * 100
        gain[corpus.name] = _weight(corpus, after - baseline) / base_weight * 100
    return ProfileRow(chunk=chunk, loss_pct=loss, gain_pct=gain, max_loss=max(loss.values()))


def _warn_if_literal_present(corpus: Corpus) -> None:
    if any(ABLATION_LITERAL in doc.text.casefold() for doc in corpus.docs):
        logger.warning(f"Corpus '{corpus.name}' contains '{ABLATION_LITERAL}'; ablated chunks may still match")


def distinct_names(corpora: Sequence[Corpus]) -> List[Corpus]:
    """Corpora renamed "name#2", "name#3", ... where names repeat."""
    seen: Set[str] = {c.name for c in corpora}
    counts: Dict[str, int] = {}
    out: List[Corpus] = []
    for corpus in corpora:
        counts[corpus.name] = counts.get(corpus.name, 0) + 1
        if counts[corpus.name] == 1:
            out.append(corpus)
            continue
        n = counts[corpus.name]
        while f"{corpus.name}#{n}" in seen:
            n += 1
        renamed = f"{corpus.name}#{n}"
        seen.add(renamed)
        logger.warning(f"Corpus name '{corpus.name}' repeats; reporting it as '{renamed}'")
        out.append(corpus.model_copy(update={"name": renamed}))
    return out


def profile(regex: str, corpora: Sequence[Corpus], jobs: int = 1, progress: bool = False) -> ProfileReport:
    """Loss (and gain) per chunk and corpus, sorted by descending max loss.

    Corpora sharing a name (two files with the same stem) are reported under
    "name#2", "name#3", ... in input order.
    """
    _compile_or_fail(regex)
    if not corpora:
        raise TopicKitError(ErrorCode.BAD_ARGUMENT, "profile needs at least one corpus")
    baselines: Dict[str, Set[int]] = {}
    skipped: List[str] = []
    live: List[Corpus] = []
    for corpus in distinct_names(corpora):
        _warn_if_literal_present(corpus)
        ids = _matched_ids(regex, corpus, jobs)
        if not ids:
            logger.warning(f"Corpus '{corpus.name}' has no baseline matches; skipped")
            skipped.append(corpus.name)
            continue
        baselines[corpus.name] = ids
        live.append(corpus)
    if not live:
        raise TopicKitError(ErrorCode.EMPTY_BASELINE, "regex matches nothing in any corpus")

    chunks = decompose(regex)
    work = partial(_row_for_chunk, regex, live, baselines)
    if progress and jobs <= 1:
        rows = [work(chunk) for chunk in tqdm(chunks, desc="profiling", unit="chunk")]
    else:
        rows = parallel_map(work, chunks, jobs)
    rows.sort(key=lambda r: (r.skipped, -r.max_loss, r.chunk.text))
    return ProfileReport(
        regex=regex,
        corpora=tuple(c.name for c in live),
        baseline_weight={c.name: _weight(c, baselines[c.name]) for c in live},
        skipped_corpora=tuple(skipped),
        rows=tuple(rows),
    )


def prune_ablated(regex: str) -> str:
    """Drop alternatives that are nothing but the ablation literal.

    Only alternations with at least one other branch are pruned, so the result
    matches exactly what the input matches (the literal is assumed absent).
    """
    try:
        root = parse(regex)
    except RegexSyntaxError:
        return regex
    removals: List[Tuple[int, int]] = []
    alternations = [root] + [n.children[0] for n in walk(root) if n.kind == "group"]
    for alt in alternations:
        dead = [i for i, b in enumerate(alt.children) if regex[b.start:b.end] in (ABLATION_LITERAL, f"({ABLATION_LITERAL})")]
        if not dead or len(dead) == len(alt.children):
            continue
        for i in dead:
            branch = alt.children[i]
            # take the separator on the left, or on the right for the first branch
            if i > 0:
                removals.append((branch.start - 1, branch.end))
            else:
                removals.append((branch.start, branch.end + 1))
    if not removals:
        return regex
    # nested removals: keep only the outermost
    removals.sort(key=lambda r: (r[0], -r[1]))
    kept: List[Tuple[int, int]] = []
    for start, end in removals:
        if kept and start < kept[-1][1]:
            continue
        kept.append((start, end))
    out = regex
    for start, end in reversed(kept):
        out = out[:start] + out[end:]
    return prune_ablated(out) if out != regex else out


def _loss_against(baseline: Set[int], regex: str, corpus: Corpus, jobs: int) -> float:
    after = _matched_ids(regex, corpus, jobs)
    return _weight(corpus, baseline - after) / _weight(corpus, baseline) * 100


def distill(regex: str, calibration: Corpus, loss_budget_pct: float, jobs: int = 1) -> DistillResult:
    """Greedy one-at-a-time chunk removal under a recall-loss budget.

    Each round re-profiles the current regex and removes the chunk whose
    removal keeps the cumulative loss (against the original baseline) lowest,
    stopping before that loss would exceed the budget. Chunks inside negative
    lookaheads guard precision and are never removed.
    """
    if loss_budget_pct < 0:
        raise TopicKitError(ErrorCode.BAD_ARGUMENT, f"loss budget must be >= 0, got {loss_budget_pct}")
    _compile_or_fail(regex)
    _warn_if_literal_present(calibration)
    baseline = _matched_ids(regex, calibration, jobs)
    if not baseline:
        raise TopicKitError(ErrorCode.EMPTY_BASELINE, f"regex matches nothing in '{calibration.name}'")

    current = regex
    removals: List[Chunk] = []
    # a zero budget freezes the regex, even against removals that cost nothing here
    rounds = len(decompose(regex)) if loss_budget_pct > 0 else 0
    for _ in range(rounds):
        best: Optional[Tuple[Tuple[float, int, str], Chunk, str]] = None
        for chunk in decompose(current):
            if chunk.guarded:
                continue
            try:
                candidate = prune_ablated(ablate(current, chunk))
            except TopicKitError:
                continue
            loss = _loss_against(baseline, candidate, calibration, jobs)
            key = (loss, -len(chunk.text), chunk.text)
            if best is None or key < best[0]:
                best = (key, chunk, candidate)
        if best is None or best[0][0] > loss_budget_pct:
            break
        removals.append(best[1])
        current = best[2]
        logger.info(f"Removed '{best[1].text}' (cumulative loss {best[0][0]:.3f}%)")

    final_loss = _loss_against(baseline, current, calibration, jobs)
    return DistillResult(suggested_removals=tuple(removals), final_regex=current, final_loss_pct=final_loss)
