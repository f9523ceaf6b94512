import csv
import logging
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple, Union

import regex
from pydantic import ValidationError

from topickit.core.errors import ErrorCode, TopicKitError
from topickit.models.schemas import Corpus, Document, Label

logger = logging.getLogger(__name__)

_TOKEN = regex.compile(r"#?[\p{L}\p{M}\p{N}_]+")
_LABELS = {"1": Label.POSITIVE, "0": Label.NEGATIVE, "-": None, "": None}


class CorpusFormat(str, Enum):
    TXT = "txt"
    TSV = "tsv"


def tokenize(text: str) -> List[str]:
    """Case-folded runs of letters, combining marks, digits and underscore; a leading "#" stays on."""
    return _TOKEN.findall(text.casefold())


def token_spans(text: str) -> List[Tuple[str, int, int]]:
    return [(m.group(0), m.start(), m.end()) for m in _TOKEN.finditer(text)]


def guess_format(path: Union[str, Path]) -> CorpusFormat:
    return CorpusFormat.TSV if str(path).lower().endswith(".tsv") else CorpusFormat.TXT


def ingest(path: Union[str, Path], format: Optional[CorpusFormat] = None) -> Corpus:
    """Load a corpus file.

    TXT: one document per non-empty line, weight 1, unlabeled.
    TSV: text, weight, label ("1", "0" or "-") and an optional fourth id column.
    Document ids default to the 1-based line number.
    """
    path = Path(path)
    format = format or guess_format(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise TopicKitError(ErrorCode.IO_ERROR, str(e), str(path))

    docs = []
    if format == CorpusFormat.TXT:
        for line_no, line in enumerate(raw.splitlines(), start=1):
            if line.strip():
                docs.append(Document(id=str(line_no), text=line))
    else:
        reader = csv.reader(raw.splitlines(), delimiter="\t", quoting=csv.QUOTE_NONE)
        for line_no, row in enumerate(reader, start=1):
            if not row or not any(cell.strip() for cell in row):
                continue
            docs.append(_parse_row(row, line_no))
    logger.info(f"Ingested {len(docs)} documents from {path}")
    return Corpus(name=path.stem, docs=tuple(docs))


def _parse_row(row: List[str], line_no: int) -> Document:
    if len(row) > 4:
        raise TopicKitError(ErrorCode.MALFORMED_ROW, f"expected at most 4 columns, got {len(row)}", line_no)
    text = row[0]
    weight = row[1].strip() if len(row) > 1 else "1"
    label = row[2].strip() if len(row) > 2 else "-"
    doc_id = row[3].strip() if len(row) > 3 and row[3].strip() else str(line_no)
    if not weight.isdigit() or int(weight) < 1:
        raise TopicKitError(ErrorCode.MALFORMED_ROW, f"weight must be a positive integer, got '{weight}'", line_no)
    if label not in _LABELS:
        raise TopicKitError(ErrorCode.MALFORMED_ROW, f"label must be 1, 0 or -, got '{label}'", line_no)
    try:
        return Document(id=doc_id, text=text, weight=int(weight), label=_LABELS[label])
    except ValidationError as e:
        raise TopicKitError(ErrorCode.MALFORMED_ROW, e.errors()[0]["msg"], line_no)


def corpus_from_texts(name: str, texts, weights=None, labels=None) -> Corpus:
    docs = []
    for index, text in enumerate(texts):
        docs.append(Document(
            id=str(index + 1),
            text=text,
            weight=weights[index] if weights else 1,
            label=labels[index] if labels else None,
        ))
    return Corpus(name=name, docs=tuple(docs))


def require_nonempty(corpus: Corpus) -> Corpus:
    if not corpus.docs:
        raise TopicKitError(ErrorCode.EMPTY_SELECTION, f"corpus '{corpus.name}' has no documents")
    return corpus
