import hashlib
import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Pattern, Tuple, Union

from pydantic import ValidationError

from topickit.core.errors import ErrorCode, TopicKitError
from topickit.models.schemas import Customization, MatchReport

logger = logging.getLogger(__name__)

DEFAULT_CUSTOMIZATION = Customization()

# dot must never match a line end, so DOTALL (inline or otherwise) is refused
_DOTALL_FLAG = re.compile(r"\(\?[aiLmux]*s[aiLmsux]*[:)]")


@dataclass(frozen=True)
class CompiledTopicMatcher:
    main: Pattern
    customization: Customization
    source_fingerprint: str
    strips: Tuple[Pattern, ...] = ()
    negatives: Tuple[Pattern, ...] = ()
    discounts: Tuple[Pattern, ...] = ()

    @property
    def regex(self) -> str:
        return self.main.pattern


def fingerprint(regex: str) -> str:
    return hashlib.sha256(regex.encode("utf-8")).hexdigest()


def _compile_one(regex: str, role: str) -> Pattern:
    if _DOTALL_FLAG.search(regex):
        raise TopicKitError(ErrorCode.COMPILE_FAIL, f"{role} regex turns on dot-matches-newline")
    try:
        return re.compile(regex)
    except re.error as e:
        raise TopicKitError(ErrorCode.COMPILE_FAIL, f"{role} regex does not compile: {e.msg}", e.pos)


def compile(regex: str, customization: Customization = DEFAULT_CUSTOMIZATION) -> CompiledTopicMatcher:
    return CompiledTopicMatcher(
        main=_compile_one(regex, "main"),
        customization=customization,
        source_fingerprint=fingerprint(regex),
        strips=tuple(_compile_one(p, "strip") for p in customization.strip_patterns),
        negatives=tuple(_compile_one(p, "negative") for p in customization.negative_regexes),
        discounts=tuple(_compile_one(p, "discount") for p in customization.discount_snippet_patterns),
    )


def preprocess(text: str, customization: Customization = DEFAULT_CUSTOMIZATION, strips: Optional[Tuple[Pattern, ...]] = None) -> str:
    text = text.casefold()
    if strips is None:
        strips = tuple(re.compile(p) for p in customization.strip_patterns)
    for pattern in strips:
        text = pattern.sub("", text)
    if customization.first_k_lines is not None:
        text = "\n".join(text.splitlines()[:customization.first_k_lines])
    elif customization.first_k_words is not None:
        k = customization.first_k_words
        if k == 0:
            return ""
        for index, word in enumerate(re.finditer(r"\S+", text), start=1):
            if index == k:
                return text[:word.end()]
    return text


def classify(m: CompiledTopicMatcher, text: str, early_exit: bool = False) -> MatchReport:
    """Decide one text and explain the decision with matched snippets.

    Snippets are the non-empty, non-overlapping leftmost matches, deduplicated,
    minus discounted ones, sorted by length (stable) and capped.
    """
    custom = m.customization
    body = preprocess(text, custom, m.strips)
    vetoed = any(neg.search(body) for neg in m.negatives)

    if early_exit and not m.discounts:
        hit = next((found for found in m.main.finditer(body) if found.group(0)), None)
        matched = hit is not None and not vetoed
        return MatchReport(matched=matched, vetoed=vetoed)

    seen = set()
    snippets = []
    for found in m.main.finditer(body):
        snippet = found.group(0)
        if not snippet or snippet in seen:
            continue
        seen.add(snippet)
        if any(d.search(snippet) for d in m.discounts):
            continue
        snippets.append(snippet)
    snippets.sort(key=len)
    snippets = snippets[:custom.snippet_cap]
    return MatchReport(matched=bool(snippets) and not vetoed, snippets=tuple(snippets), vetoed=vetoed)


def is_match(m: CompiledTopicMatcher, text: str) -> bool:
    return classify(m, text, early_exit=True).matched


def load_customization(path: Union[str, Path]) -> Customization:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise TopicKitError(ErrorCode.IO_ERROR, str(e), str(path))
    except json.JSONDecodeError as e:
        raise TopicKitError(ErrorCode.BAD_ARGUMENT, f"customization is not JSON: {e.msg}", str(path))
    try:
        return Customization.model_validate(raw)
    except ValidationError as e:
        raise TopicKitError(ErrorCode.BAD_ARGUMENT, e.errors()[0]["msg"], str(path))
