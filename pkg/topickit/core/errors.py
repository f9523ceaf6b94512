from enum import Enum
from typing import Optional, Union


class ErrorCode(str, Enum):
    MALFORMED_DOCUMENT = "MALFORMED_DOCUMENT"
    INVARIANT_VIOLATION = "INVARIANT_VIOLATION"
    UNBOUNDED_FRAGMENT = "UNBOUNDED_FRAGMENT"
    RENDER_INVALID = "RENDER_INVALID"
    LABEL_CHARSET = "LABEL_CHARSET"
    ODD_BACKSLASH = "ODD_BACKSLASH"
    EMPTY_SET = "EMPTY_SET"
    COMPILE_FAIL = "COMPILE_FAIL"
    IO_ERROR = "IO_ERROR"
    MALFORMED_ROW = "MALFORMED_ROW"
    EMPTY_SELECTION = "EMPTY_SELECTION"
    UNLABELED_DOC = "UNLABELED_DOC"
    ZERO_BASE = "ZERO_BASE"
    ABLATION_INVALID = "ABLATION_INVALID"
    EMPTY_BASELINE = "EMPTY_BASELINE"
    VALIDATION_FAILED = "VALIDATION_FAILED"
    VERSION_CONFLICT = "VERSION_CONFLICT"
    NOT_FOUND = "NOT_FOUND"
    TOO_MANY_LANGS = "TOO_MANY_LANGS"
    BAD_ARGUMENT = "BAD_ARGUMENT"


# Codes that mean the caller handed us bad input rather than a negative result.
USAGE_CODES = {
    ErrorCode.IO_ERROR,
    ErrorCode.MALFORMED_DOCUMENT,
    ErrorCode.MALFORMED_ROW,
    ErrorCode.BAD_ARGUMENT,
}


class TopicKitError(Exception):
    def __init__(self, code: ErrorCode, message: str, location: Optional[Union[int, str]] = None):
        self.code = code
        self.message = message
        self.location = location
        where = f" at {location}" if location is not None else ""
        super().__init__(f"{code.value}{where}: {message}")

    def to_dict(self) -> dict:
        return {"code": self.code.value, "message": self.message, "location": self.location}


def http_status(code: ErrorCode) -> int:
    if code == ErrorCode.NOT_FOUND:
        return 404
    if code == ErrorCode.VERSION_CONFLICT:
        return 409
    return 400
