import logging

import regex
from greenery import parse

from topickit.core.errors import ErrorCode, TopicKitError

logger = logging.getLogger(__name__)

# escapes are read whole, so "\\." is an escaped backslash followed by a wildcard
_TOKENS = regex.compile(r"\\.|\[\^|\(\?[=!<]|[.^$]", regex.DOTALL)
_CONTEXT_ESCAPES = set("bBdDwWsSAZ")


def _refuse_open_constructs(fragment: str) -> None:
    """Wildcards, anchors, negated classes, lookaround and class shorthands.

    These either depend on context or stand for a Unicode-sized set, which the
    finite-automaton count would report as a single symbol.
    """
    for m in _TOKENS.finditer(fragment):
        token = m.group(0)
        if token.startswith("\\") and len(token) == 2 and token[1] not in _CONTEXT_ESCAPES:
            continue
        raise TopicKitError(
            ErrorCode.UNBOUNDED_FRAGMENT,
            f"unsupported construct '{token}' in a finite fragment",
            m.start(),
        )


def count_variants(fragment: str) -> int:
    """Number of distinct literal strings a finite-language fragment denotes.

    The fragment is parsed into a finite automaton and its language counted,
    so duplicates ("[aa]", "a|a") count once. Literals, escaped punctuation,
    character classes and ranges, plain and non-capturing groups, alternation
    and bounded quantifiers are supported; infinite languages raise
    UNBOUNDED_FRAGMENT.
    """
    _refuse_open_constructs(fragment)
    try:
        pattern = parse(fragment)
    except Exception as e:
        raise TopicKitError(ErrorCode.UNBOUNDED_FRAGMENT, f"cannot read fragment '{fragment}': {e}")
    try:
        count = pattern.to_fsm().cardinality()
    except OverflowError:
        raise TopicKitError(ErrorCode.UNBOUNDED_FRAGMENT, f"fragment '{fragment}' spells infinitely many strings")
    logger.info(f"Fragment '{fragment}' spells {count} variants")
    return count
