from datetime import datetime
from enum import Enum
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from topickit.core.config import (
    DEFAULT_MAX_GAP,
    DEFAULT_MAX_LINE_WIDTH,
    DEFAULT_PREFIX_GUARD,
    DEFAULT_SUFFIX_GUARD,
    MAX_GAP,
    MIN_LINE_WIDTH,
    SNIPPET_CAP,
)
from topickit.services.regex_scan import unbalanced_paren

LABEL_PATTERN = r"^[a-z0-9_]+$"


class FrozenModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class Tier(str, Enum):
    TIER1 = "tier1"
    TIER2 = "tier2"


# ---------------------------------------------------------------------------
# Regex documents
# ---------------------------------------------------------------------------

def _balanced(fragment: str) -> str:
    pos = unbalanced_paren(fragment)
    if pos is not None:
        raise ValueError(f"unbalanced parenthesis at position {pos} of '{fragment}' would split the clause")
    return fragment


class LiteralClause(FrozenModel):
    kind: Literal["literal"] = "literal"
    pattern: str = Field(min_length=1)

    @field_validator("pattern")
    @classmethod
    def _stays_one_clause(cls, pattern):
        return _balanced(pattern)


class KeywordClause(FrozenModel):
    kind: Literal["keyword"] = "keyword"
    core: str = Field(min_length=1)
    prefix_guard: str = DEFAULT_PREFIX_GUARD
    suffix_guard: str = DEFAULT_SUFFIX_GUARD
    exclusions: Tuple[str, ...] = ()

    @field_validator("core", "prefix_guard", "suffix_guard")
    @classmethod
    def _stays_one_clause(cls, fragment):
        return _balanced(fragment)

    @field_validator("exclusions")
    @classmethod
    def _exclusions_stay_inside_lookahead(cls, exclusions):
        return tuple(_balanced(e) for e in exclusions)


class BipartiteClause(FrozenModel):
    kind: Literal["bipartite"] = "bipartite"
    set_a: Tuple[str, ...] = Field(min_length=1)
    set_b: Tuple[str, ...] = Field(min_length=1)
    max_gap: int = Field(default=DEFAULT_MAX_GAP, ge=0, le=MAX_GAP)
    ordered_both_ways: bool = True

    @field_validator("set_a", "set_b")
    @classmethod
    def _words_stay_inside_their_set(cls, words):
        return tuple(_balanced(w) for w in words)


Clause = Annotated[Union[LiteralClause, KeywordClause, BipartiteClause], Field(discriminator="kind")]


class Section(FrozenModel):
    label: str = Field(min_length=1, pattern=LABEL_PATTERN)
    clauses: Tuple[Clause, ...] = Field(min_length=1)


class TestSuite(FrozenModel):
    must_match: Tuple[str, ...] = ()
    must_not_match: Tuple[str, ...] = ()

    @model_validator(mode="after")
    def _disjoint(self):
        overlap = sorted(set(self.must_match) & set(self.must_not_match))
        if overlap:
            raise ValueError(f"texts listed as both must_match and must_not_match: {overlap}")
        return self


class RegexDocument(FrozenModel):
    topic: str = Field(min_length=1)
    language: str = Field(min_length=1)
    tier: Tier
    version: int = Field(ge=1)
    sections: Tuple[Section, ...] = Field(min_length=1)
    tests: TestSuite = TestSuite()

    @field_validator("sections")
    @classmethod
    def _unique_labels(cls, sections):
        seen = set()
        for section in sections:
            if section.label in seen:
                raise ValueError(f"duplicate section label '{section.label}'")
            seen.add(section.label)
        return sections


class RenderOptions(FrozenModel):
    annotated: bool = True
    max_line_width: int = Field(default=DEFAULT_MAX_LINE_WIDTH, ge=MIN_LINE_WIDTH)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

class Severity(str, Enum):
    ERROR = "ERROR"
    WARNING = "WARNING"


class FindingCode(str, Enum):
    ODD_BACKSLASH = "ODD_BACKSLASH"
    EMPTY_ALTERNATIVE = "EMPTY_ALTERNATIVE"
    COMPILE_FAIL = "COMPILE_FAIL"
    BANNED_SYNTAX = "BANNED_SYNTAX"
    TEST_FAIL = "TEST_FAIL"
    RTL_UNWRAPPED = "RTL_UNWRAPPED"


class Finding(FrozenModel):
    severity: Severity
    code: FindingCode
    location: int
    message: str


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------

class Customization(FrozenModel):
    first_k_lines: Optional[int] = Field(default=None, ge=0)
    first_k_words: Optional[int] = Field(default=None, ge=0)
    strip_patterns: Tuple[str, ...] = ()
    negative_regexes: Tuple[str, ...] = ()
    discount_snippet_patterns: Tuple[str, ...] = ()
    snippet_cap: int = Field(default=SNIPPET_CAP, ge=1)

    @model_validator(mode="after")
    def _one_truncation(self):
        if self.first_k_lines is not None and self.first_k_words is not None:
            raise ValueError("set at most one of first_k_lines and first_k_words")
        return self


class MatchReport(FrozenModel):
    matched: bool
    snippets: Tuple[str, ...] = ()
    vetoed: bool = False


# ---------------------------------------------------------------------------
# Corpora and discovery
# ---------------------------------------------------------------------------

class Label(str, Enum):
    POSITIVE = "POSITIVE"
    NEGATIVE = "NEGATIVE"


class Outcome(str, Enum):
    TP = "TP"
    FP = "FP"
    FN = "FN"
    TN = "TN"


class Document(FrozenModel):
    id: str
    text: str
    weight: int = Field(default=1, ge=1)
    label: Optional[Label] = None


class Corpus(FrozenModel):
    name: str
    docs: Tuple[Document, ...] = ()

    @property
    def total_weight(self) -> int:
        return sum(doc.weight for doc in self.docs)


class DiffReport(FrozenModel):
    new_total: int
    lost_total: int
    new_top: Tuple[Tuple[str, int], ...] = ()
    lost_top: Tuple[Tuple[str, int], ...] = ()


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

class ConfusionReport(FrozenModel):
    tp: int
    fp: int
    fn: int
    tn: int
    accuracy: Optional[float] = None
    precision: Optional[float] = None
    recall: Optional[float] = None


class MetricGain(FrozenModel):
    accuracy: Optional[float] = None
    precision: Optional[float] = None
    recall: Optional[float] = None


class SafeScope(str, Enum):
    MATCHED_BY_MAIN = "MATCHED_BY_MAIN"
    ALL = "ALL"


class SafeConfirmReport(FrozenModel):
    considered: int
    auto_confirmed: int
    fraction: float
    residual_ids: Tuple[str, ...] = ()


class RecallGainReport(FrozenModel):
    base_weight: int
    improved_weight: int
    ratio: float
    display: str
    note: str = "match-count ratio; assumes both regexes are high-precision"


class TimingBucket(FrozenModel):
    mode: Literal["full", "early"]
    text_chars: int
    mean_ms: float = Field(gt=0)
    std_ms: float = Field(ge=0)
    reps: int = Field(ge=1)


class TimingReport(FrozenModel):
    regex_chars: int
    buckets: Tuple[TimingBucket, ...] = ()


# ---------------------------------------------------------------------------
# Profiling
# ---------------------------------------------------------------------------

class ChunkKind(str, Enum):
    CLAUSE = "CLAUSE"
    GROUP = "GROUP"
    CHAR_CLASS = "CHAR_CLASS"
    LITERAL_WORD = "LITERAL_WORD"
    QUANTIFIED_GAP = "QUANTIFIED_GAP"


class Chunk(FrozenModel):
    text: str
    kind: ChunkKind
    occurrences: Tuple[Tuple[int, int], ...] = Field(min_length=1)
    guarded: bool = False


class ProfileRow(FrozenModel):
    chunk: Chunk
    loss_pct: Dict[str, float] = {}
    gain_pct: Dict[str, float] = {}
    max_loss: float = 0.0
    skipped: bool = False


class ProfileReport(FrozenModel):
    regex: str
    corpora: Tuple[str, ...]
    baseline_weight: Dict[str, int] = {}
    skipped_corpora: Tuple[str, ...] = ()
    rows: Tuple[ProfileRow, ...] = ()


class DistillResult(FrozenModel):
    suggested_removals: Tuple[Chunk, ...] = ()
    final_regex: str
    final_loss_pct: float


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

class RegistryEntry(FrozenModel):
    topic: str = Field(min_length=1)
    language: str = Field(min_length=1)
    tier: Tier
    version: int = Field(ge=1)
    stored_regex: str = Field(min_length=1)
    published_at: Optional[datetime] = None
    fingerprint: Optional[str] = None


class RegistryFile(FrozenModel):
    entries: Tuple[RegistryEntry, ...] = ()


# ---------------------------------------------------------------------------
# HTTP request/response bodies
# ---------------------------------------------------------------------------

class ValidateRequest(BaseModel):
    document: Optional[RegexDocument] = None
    stored_regex: Optional[str] = None
    banlist: Optional[List[str]] = None


class RenderRequest(BaseModel):
    document: RegexDocument
    options: RenderOptions = RenderOptions(annotated=False)


class RenderResponse(BaseModel):
    live: str
    stored: str
    fingerprint: str


class CountVariantsRequest(BaseModel):
    fragment: str


class CountVariantsResponse(BaseModel):
    fragment: str
    variants: int


class ClassifyRequest(BaseModel):
    regex: str
    texts: List[str]
    customization: Customization = Customization()
    early_exit: bool = False


class ClassifyResponse(BaseModel):
    fingerprint: str
    reports: List[MatchReport]


class PublishRequest(BaseModel):
    document: RegexDocument
    annotated: bool = False


class PublishResponse(BaseModel):
    topic: str
    language: str
    tier: Tier
    version: int
    fingerprint: str
