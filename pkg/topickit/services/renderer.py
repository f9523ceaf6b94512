import logging
import re
from typing import List, Sequence, Tuple

from topickit.core.config import INERT
from topickit.core.errors import ErrorCode, TopicKitError
from topickit.models.schemas import (
    BipartiteClause,
    KeywordClause,
    LiteralClause,
    RegexDocument,
    RenderOptions,
)

logger = logging.getLogger(__name__)

_LABEL_CHARSET = re.compile(r"^[a-z0-9_]+$")


def escape_for_store(regex: str) -> str:
    return regex.replace("\\", "\\\\")


def unescape_from_store(stored: str) -> str:
    out, _ = _halve_backslashes(stored, strict=True)
    return out


def lenient_unescape(stored: str) -> Tuple[str, List[int]]:
    """Halve backslash pairs, keeping lone ones; also map live offsets to stored offsets."""
    return _halve_backslashes(stored, strict=False)


def _halve_backslashes(stored: str, strict: bool) -> Tuple[str, List[int]]:
    out: List[str] = []
    offsets: List[int] = []
    i = 0
    while i < len(stored):
        if stored[i] == "\\":
            if i + 1 < len(stored) and stored[i + 1] == "\\":
                out.append("\\")
                offsets.append(i)
                i += 2
                continue
            if strict:
                raise TopicKitError(ErrorCode.ODD_BACKSLASH, "lone backslash in stored regex", i)
        out.append(stored[i])
        offsets.append(i)
        i += 1
    offsets.append(len(stored))
    return "".join(out), offsets


def build_keyword(clause: KeywordClause) -> str:
    fragment = clause.prefix_guard + clause.core
    if clause.exclusions:
        fragment += "(?!(" + "|".join(clause.exclusions) + "))"
    return fragment + clause.suffix_guard


def build_bipartite(set_a: Sequence[str], set_b: Sequence[str], max_gap: int, ordered_both_ways: bool = True) -> str:
    if not set_a or not set_b:
        raise TopicKitError(ErrorCode.EMPTY_SET, "bipartite clause needs two nonempty word sets")
    if not 0 <= max_gap <= 1000:
        raise TopicKitError(ErrorCode.BAD_ARGUMENT, f"max_gap {max_gap} outside [0, 1000]")
    a = "(" + "|".join(set_a) + ")"
    b = "(" + "|".join(set_b) + ")"
    gap = ".{0,%d}?" % max_gap
    fragment = a + gap + b
    if ordered_both_ways:
        fragment += "|" + b + gap + a
    return fragment


def render_clause(clause) -> str:
    if isinstance(clause, LiteralClause):
        return clause.pattern
    if isinstance(clause, KeywordClause):
        return build_keyword(clause)
    if isinstance(clause, BipartiteClause):
        return build_bipartite(clause.set_a, clause.set_b, clause.max_gap, clause.ordered_both_ways)
    raise TypeError(f"unknown clause type {type(clause).__name__}")


def clause_alternatives(doc: RegexDocument) -> List[str]:
    return ["(" + render_clause(clause) + ")" for section in doc.sections for clause in section.clauses]


def render_compact(doc: RegexDocument, check: bool = True) -> str:
    regex = "|".join(clause_alternatives(doc))
    if check:
        _check_compiles(regex)
    return regex


def render_annotated(doc: RegexDocument, opts: RenderOptions = RenderOptions(), check: bool = True) -> str:
    """Multi-line regex carrying the version and section labels as inert text.

    Every line break follows an inert alternative, so the newline can never be
    part of a match and the regex matches exactly what render_compact matches.
    """
    items: List[Tuple[str, bool, bool]] = [(f"{INERT}_version_{doc.version}", True, False)]
    for section in doc.sections:
        if not _LABEL_CHARSET.match(section.label):
            raise TopicKitError(ErrorCode.LABEL_CHARSET, f"label '{section.label}' is outside [a-z0-9_]", section.label)
        items.append((f"{INERT}_{section.label}", True, True))
        items.extend(("(" + render_clause(clause) + ")", False, False) for clause in section.clauses)

    text, first_inert, _ = items[0]
    out = [text]
    line_len = len(text)
    last_inert = first_inert
    for text, inert, section_start in items[1:]:
        if section_start or line_len + 1 + len(text) > opts.max_line_width:
            if not last_inert:
                out.append("|" + INERT)
            out.append("\n")
            line_len = 0
        out.append("|" + text)
        line_len += 1 + len(text)
        last_inert = inert
    regex = "".join(out)
    if check:
        _check_compiles(regex)
    return regex


def render(doc: RegexDocument, opts: RenderOptions = RenderOptions(annotated=False)) -> str:
    return render_annotated(doc, opts) if opts.annotated else render_compact(doc)


def render_stored(doc: RegexDocument, opts: RenderOptions = RenderOptions(annotated=False)) -> str:
    return escape_for_store(render(doc, opts))


def _check_compiles(regex: str) -> None:
    try:
        re.compile(regex)
    except re.error as e:
        raise TopicKitError(ErrorCode.RENDER_INVALID, f"rendered regex does not compile: {e.msg}", e.pos)
