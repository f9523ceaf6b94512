"""Structural scanner for the regex dialect topic regexes are written in.

This is not a full regex parser. It recognises enough structure (alternation,
groups and their extension prefixes, character classes, escapes, quantifiers)
to check clause fragments, lint stored regexes and cut regexes into chunks for
profiling, while keeping exact character spans for every node.
"""
import re
import unicodedata
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

from topickit.core.config import INERT

_BRACE_QUANT = re.compile(r"\{(\d+)\}|\{(\d*),(\d*)\}")
_GROUP_PREFIX = re.compile(
    r"\?(?::|!|=|<=|<!|P<\w+>|<\w+>|P=\w+\)|#[^)]*\)|[aiLmsux-]+(?::|\)))"
)
_RTL_BIDI = {"R", "AL"}


class RegexSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        self.pos = pos
        super().__init__(f"{message} at position {pos}")


@dataclass(frozen=True)
class Node:
    kind: str
    start: int
    end: int
    children: Tuple["Node", ...] = ()
    prefix: str = ""
    min: int = 1
    max: Optional[int] = 1
    lazy: bool = False
    possessive: bool = False

    @property
    def content_start(self) -> int:
        return self.start + 1 + len(self.prefix)

    @property
    def content_end(self) -> int:
        return self.end - 1

    @property
    def is_lookaround(self) -> bool:
        return self.kind == "group" and self.prefix in ("?!", "?=", "?<=", "?<!")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def parse(self) -> Node:
        node = self._alt()
        if self.pos < len(self.text):
            raise RegexSyntaxError("unbalanced parenthesis", self.pos)
        return node

    def _peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _alt(self) -> Node:
        start = self.pos
        branches = [self._seq()]
        while self._peek() == "|":
            self.pos += 1
            branches.append(self._seq())
        return Node("alt", start, self.pos, tuple(branches))

    def _seq(self) -> Node:
        start = self.pos
        items: List[Node] = []
        while self.pos < len(self.text) and self._peek() not in "|)":
            items.append(self._quantified(self._atom()))
        return Node("seq", start, self.pos, tuple(items))

    def _atom(self) -> Node:
        pos = self.pos
        ch = self.text[pos]
        if ch == "(":
            return self._group()
        if ch == "[":
            return self._class()
        if ch == "\\":
            if pos + 1 >= len(self.text):
                raise RegexSyntaxError("bad escape (end of pattern)", pos)
            self.pos += 2
            return Node("escape", pos, pos + 2)
        if ch in "*+?" or (ch == "{" and _BRACE_QUANT.match(self.text, pos)):
            raise RegexSyntaxError("nothing to repeat", pos)
        self.pos += 1
        if ch == ".":
            return Node("dot", pos, pos + 1)
        if ch in "^$":
            return Node("anchor", pos, pos + 1)
        return Node("literal", pos, pos + 1)

    def _group(self) -> Node:
        start = self.pos
        self.pos += 1
        prefix = ""
        if self._peek() == "?":
            m = _GROUP_PREFIX.match(self.text, self.pos)
            if not m:
                raise RegexSyntaxError("unknown extension", self.pos)
            prefix = m.group(0)
            self.pos = m.end()
            if prefix.endswith(")"):
                # flag, comment and backreference groups carry no sub-pattern
                return Node("directive", start, self.pos, prefix=prefix[:-1])
        child = self._alt()
        if self._peek() != ")":
            raise RegexSyntaxError("missing ), unterminated subpattern", start)
        self.pos += 1
        return Node("group", start, self.pos, (child,), prefix=prefix)

    def _class(self) -> Node:
        start = self.pos
        self.pos += 1
        if self._peek() == "^":
            self.pos += 1
        if self._peek() == "]":
            self.pos += 1
        while True:
            ch = self._peek()
            if not ch:
                raise RegexSyntaxError("unterminated character set", start)
            if ch == "\\":
                self.pos += 2
                continue
            self.pos += 1
            if ch == "]":
                return Node("class", start, self.pos)

    def _quantified(self, atom: Node) -> Node:
        ch = self._peek()
        if not ch or atom.kind in ("anchor", "directive"):
            return atom
        if ch == "*":
            lo, hi, self.pos = 0, None, self.pos + 1
        elif ch == "+":
            lo, hi, self.pos = 1, None, self.pos + 1
        elif ch == "?":
            lo, hi, self.pos = 0, 1, self.pos + 1
        elif ch == "{":
            m = _BRACE_QUANT.match(self.text, self.pos)
            if not m:
                return atom
            if m.group(1) is not None:
                lo = hi = int(m.group(1))
            else:
                lo = int(m.group(2)) if m.group(2) else 0
                hi = int(m.group(3)) if m.group(3) else None
            if hi is not None and hi < lo:
                raise RegexSyntaxError("min repeat greater than max repeat", self.pos)
            self.pos = m.end()
        else:
            return atom
        lazy = possessive = False
        if self._peek() == "?":
            lazy = True
            self.pos += 1
        elif self._peek() == "+":
            possessive = True
            self.pos += 1
        nxt = self._peek()
        if nxt in ("*", "+", "?") or (nxt == "{" and _BRACE_QUANT.match(self.text, self.pos)):
            raise RegexSyntaxError("multiple repeat", self.pos)
        return Node("quant", atom.start, self.pos, (atom,), min=lo, max=hi, lazy=lazy, possessive=possessive)


def parse(text: str) -> Node:
    return _Parser(text).parse()


def walk(node: Node) -> Iterator[Node]:
    yield node
    for child in node.children:
        yield from walk(child)


def is_inert(text: str, branch: Node) -> bool:
    return text.startswith(INERT, branch.start)


def top_level_branches(text: str, root: Node) -> List[Node]:
    """Top-level alternatives, excluding inert ones."""
    return [b for b in root.children if not is_inert(text, b)]


def mask_literals(text: str) -> str:
    """Same-length copy with escapes and class contents blanked to "_".

    Works on unbalanced input too, since the validator scans before compiling.
    """
    out = list(text)
    i = 0
    in_class = False
    first_member = -1
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            out[i] = "_"
            if i + 1 < len(text):
                out[i + 1] = "_"
            i += 2
            continue
        if in_class:
            if ch == "^" and i == first_member:
                first_member += 1
                out[i] = "_"
            elif ch == "]" and i != first_member:
                in_class = False
            else:
                out[i] = "_"
        elif ch == "[":
            in_class = True
            first_member = i + 1
        i += 1
    return "".join(out)


def unbalanced_paren(text: str) -> Optional[int]:
    """Position of the first unmatched "(" or ")" outside escapes and classes."""
    open_at: List[int] = []
    for i, ch in enumerate(mask_literals(text)):
        if ch == "(":
            open_at.append(i)
        elif ch == ")":
            if not open_at:
                return i
            open_at.pop()
    return open_at[0] if open_at else None


def is_rtl_char(ch: str) -> bool:
    return unicodedata.bidirectional(ch) in _RTL_BIDI


def first_strong_is_rtl(text: str) -> bool:
    for ch in text:
        bidi = unicodedata.bidirectional(ch)
        if bidi in _RTL_BIDI:
            return True
        if bidi == "L":
            return False
    return False


def rtl_runs(text: str, root: Node) -> List[Tuple[int, int, bool]]:
    """Maximal runs of right-to-left literal letters as (start, end, wrapped)."""
    runs: List[Tuple[int, int, bool]] = []
    _collect_rtl_runs(text, root, None, runs)
    return runs


def _collect_rtl_runs(text: str, node: Node, parent_group: Optional[Node], runs: List[Tuple[int, int, bool]]) -> None:
    if node.kind == "alt":
        only_branch = len(node.children) == 1
        for branch in node.children:
            _collect_seq_runs(text, branch, parent_group if only_branch else None, runs)
        return
    if node.kind == "group":
        _collect_rtl_runs(text, node.children[0], node if node.prefix == "" else None, runs)
        return
    for child in node.children:
        _collect_rtl_runs(text, child, None, runs)


def _collect_seq_runs(text: str, seq: Node, parent_group: Optional[Node], runs: List[Tuple[int, int, bool]]) -> None:
    items = seq.children
    i = 0
    while i < len(items):
        node = items[i]
        if node.kind == "literal" and is_rtl_char(text[node.start]):
            j = i + 1
            while j < len(items) and items[j].kind == "literal" and (
                is_rtl_char(text[items[j].start]) or unicodedata.bidirectional(text[items[j].start]) == "NSM"
            ):
                j += 1
            wrapped = parent_group is not None and i == 0 and j == len(items)
            runs.append((node.start, items[j - 1].end, wrapped))
            i = j
            continue
        if node.kind in ("group", "quant", "alt"):
            _collect_rtl_runs(text, node, None, runs)
        i += 1
