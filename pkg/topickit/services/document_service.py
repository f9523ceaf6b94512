import json
import logging
from pathlib import Path
from typing import Union

from pydantic import ValidationError

from topickit.core.errors import ErrorCode, TopicKitError
from topickit.models.schemas import BipartiteClause, KeywordClause, LiteralClause, RegexDocument
from topickit.services.regex_scan import RegexSyntaxError, parse, rtl_runs

logger = logging.getLogger(__name__)

# pydantic error types that come from value rules rather than document shape
_INVARIANT_ERROR_TYPES = {
    "value_error",
    "too_short",
    "too_long",
    "greater_than",
    "greater_than_equal",
    "less_than",
    "less_than_equal",
    "string_too_short",
    "string_pattern_mismatch",
}


def translate_validation_error(error: ValidationError) -> TopicKitError:
    first = error.errors()[0]
    location = ".".join(str(part) for part in first["loc"]) or None
    code = ErrorCode.INVARIANT_VIOLATION if first["type"] in _INVARIANT_ERROR_TYPES else ErrorCode.MALFORMED_DOCUMENT
    return TopicKitError(code, first["msg"], location)


def parse_document(data: bytes) -> RegexDocument:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise TopicKitError(ErrorCode.MALFORMED_DOCUMENT, "document is not valid UTF-8", f"byte {e.start}")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise TopicKitError(ErrorCode.MALFORMED_DOCUMENT, e.msg, f"line {e.lineno} column {e.colno}")
    if not isinstance(raw, dict):
        raise TopicKitError(ErrorCode.MALFORMED_DOCUMENT, "document must be a JSON object", "line 1 column 1")
    try:
        return RegexDocument.model_validate(raw)
    except ValidationError as e:
        raise translate_validation_error(e)


def serialize_document(doc: RegexDocument) -> bytes:
    """Canonical bytes: fixed key order, UTF-8, two-space indent, LF endings."""
    canonical = canonicalize(doc)
    text = json.dumps(canonical.model_dump(mode="json"), ensure_ascii=False, indent=2)
    return (text + "\n").encode("utf-8")


def load_document(path: Union[str, Path]) -> RegexDocument:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise TopicKitError(ErrorCode.IO_ERROR, str(e), str(path))
    return parse_document(data)


def canonicalize(doc: RegexDocument) -> RegexDocument:
    sections = []
    for section in doc.sections:
        clauses = tuple(_canonical_clause(clause) for clause in section.clauses)
        sections.append(section.model_copy(update={"clauses": clauses}))
    return doc.model_copy(update={"sections": tuple(sections)})


def _canonical_clause(clause):
    if isinstance(clause, LiteralClause):
        return clause.model_copy(update={"pattern": wrap_rtl_words(clause.pattern)})
    if isinstance(clause, KeywordClause):
        return clause.model_copy(update={
            "core": wrap_rtl_words(clause.core),
            "exclusions": tuple(wrap_rtl_words(x) for x in clause.exclusions),
        })
    if isinstance(clause, BipartiteClause):
        return clause.model_copy(update={
            "set_a": tuple(wrap_rtl_words(x) for x in clause.set_a),
            "set_b": tuple(wrap_rtl_words(x) for x in clause.set_b),
        })
    return clause


def wrap_rtl_words(fragment: str) -> str:
    """Parenthesize each right-to-left word so mixed-direction editing stays sane."""
    try:
        root = parse(fragment)
    except RegexSyntaxError:
        return fragment
    out = fragment
    for start, end, wrapped in sorted(rtl_runs(fragment, root), reverse=True):
        if not wrapped:
            out = out[:start] + "(" + out[start:end] + ")" + out[end:]
    return out
