"""Pre-submit checks for topic regexes.

Problems are reported as findings, never raised. ERROR findings block
publication; WARNING findings are readability hints.
"""
import logging
import re
from typing import List, Optional, Sequence, Union

from topickit.core.config import DEFAULT_BANLIST
from topickit.core.errors import TopicKitError
from topickit.models.schemas import Finding, FindingCode, RegexDocument, Severity
from topickit.services import matcher
from topickit.services.regex_scan import (
    Node,
    RegexSyntaxError,
    first_strong_is_rtl,
    is_inert,
    mask_literals,
    parse,
    rtl_runs,
    walk,
)
from topickit.services.renderer import lenient_unescape, render_clause, render_compact

logger = logging.getLogger(__name__)


def _error(code: FindingCode, location: int, message: str) -> Finding:
    return Finding(severity=Severity.ERROR, code=code, location=location, message=message)


def validate(target: Union[RegexDocument, str], banlist: Optional[Sequence[str]] = None) -> List[Finding]:
    banlist = DEFAULT_BANLIST if banlist is None else list(banlist)
    if isinstance(target, RegexDocument):
        findings = _validate_document(target, banlist)
    else:
        findings = _validate_stored(target, banlist)
    return sorted(findings, key=lambda f: (f.location, f.code.value, f.message))


def has_errors(findings: Sequence[Finding]) -> bool:
    return any(f.severity == Severity.ERROR for f in findings)


def _validate_stored(stored: str, banlist: Sequence[str]) -> List[Finding]:
    findings = [
        _error(FindingCode.ODD_BACKSLASH, pos, "lone backslash; stored regexes double every backslash")
        for pos in _lone_backslashes(stored)
    ]
    live, offsets = lenient_unescape(stored)
    findings.extend(_check_live(live, banlist, offsets))
    findings.extend(_check_rtl(live, offsets))
    return findings


def _validate_document(doc: RegexDocument, banlist: Sequence[str]) -> List[Finding]:
    live = render_compact(doc, check=False)
    offsets = list(range(len(live) + 1))
    findings = _check_live(live, banlist, offsets)
    for section in doc.sections:
        for clause in section.clauses:
            fragment = render_clause(clause)
            if first_strong_is_rtl(fragment):
                findings.extend(
                    _rtl_warning(live.find(fragment) + start if fragment in live else 0)
                    for start in _unwrapped_runs(fragment)
                )
    if not has_errors(findings):
        findings.extend(_run_tests(doc, live))
    return findings


def _lone_backslashes(stored: str) -> List[int]:
    positions = []
    i = 0
    while i < len(stored):
        if stored[i] == "\\":
            if i + 1 < len(stored) and stored[i + 1] == "\\":
                i += 2
                continue
            positions.append(i)
        i += 1
    return positions


def _check_live(live: str, banlist: Sequence[str], offsets: List[int]) -> List[Finding]:
    findings = []
    masked = mask_literals(live)
    for ban in banlist:
        for found in re.finditer(ban, masked):
            findings.append(_error(
                FindingCode.BANNED_SYNTAX,
                offsets[found.start()],
                f"banned construct '{live[found.start():found.end()]}' (engines disagree on it)",
            ))
    banned = bool(findings)

    try:
        re.compile(live)
    except re.error as e:
        # a banned construct that the engine also rejects is reported once, as banned
        if not banned:
            pos = e.pos if e.pos is not None else 0
            findings.append(_error(FindingCode.COMPILE_FAIL, offsets[min(pos, len(live))], f"regex does not compile: {e.msg}"))

    try:
        root = parse(live)
    except RegexSyntaxError:
        return findings
    findings.extend(
        _error(FindingCode.EMPTY_ALTERNATIVE, offsets[pos], "empty alternative matches every text")
        for pos in _empty_alternatives(live, root)
    )
    return findings


def _empty_alternatives(live: str, root: Node) -> List[int]:
    positions = []
    alternations = [(root, 0)]
    for node in walk(root):
        if node.kind == "group":
            alternations.append((node.children[0], node.start))
    for alt, opener in alternations:
        for index, branch in enumerate(alt.children):
            if branch.start == branch.end and not is_inert(live, branch):
                positions.append(opener if index == 0 else branch.start - 1)
    return positions


def _unwrapped_runs(fragment: str) -> List[int]:
    try:
        root = parse(fragment)
    except RegexSyntaxError:
        return []
    return [start for start, _, wrapped in rtl_runs(fragment, root) if not wrapped]


def _rtl_warning(location: int) -> Finding:
    return Finding(
        severity=Severity.WARNING,
        code=FindingCode.RTL_UNWRAPPED,
        location=location,
        message="right-to-left word is not wrapped in parentheses",
    )


def _check_rtl(live: str, offsets: List[int]) -> List[Finding]:
    try:
        root = parse(live)
    except RegexSyntaxError:
        return []
    findings = []
    for branch in root.children:
        fragment = live[branch.start:branch.end]
        if first_strong_is_rtl(fragment):
            findings.extend(_rtl_warning(offsets[branch.start + start]) for start in _unwrapped_runs(fragment))
    return findings


def _run_tests(doc: RegexDocument, live: str) -> List[Finding]:
    try:
        compiled = matcher.compile(live)
    except TopicKitError as e:
        return [_error(FindingCode.COMPILE_FAIL, e.location if isinstance(e.location, int) else 0, e.message)]
    findings = []
    for index, text in enumerate(doc.tests.must_match):
        if not matcher.classify(compiled, text).matched:
            findings.append(_error(FindingCode.TEST_FAIL, index, f"must_match[{index}] not matched: {text!r}"))
    offset = len(doc.tests.must_match)
    for index, text in enumerate(doc.tests.must_not_match):
        report = matcher.classify(compiled, text)
        if report.matched:
            findings.append(_error(
                FindingCode.TEST_FAIL,
                offset + index,
                f"must_not_match[{index}] matched {list(report.snippets)}: {text!r}",
            ))
    return findings
