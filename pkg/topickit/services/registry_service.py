"""File-backed registry of published topic regexes.

One JSON file holds an append-only list of entries keyed by
(topic, language, tier) with strictly increasing versions. Writers replace the
whole file atomically, so readers never see a partial write.
"""
import datetime
import logging
import os
import re
import tempfile
from pathlib import Path
from typing import List, Optional, Sequence, Union

from pydantic import ValidationError

from topickit.core.config import MAX_CONCAT_LANGS, get_registry_path
from topickit.core.errors import ErrorCode, TopicKitError
from topickit.models.schemas import Finding, RegexDocument, RegistryEntry, RegistryFile, RenderOptions, Severity, Tier
from topickit.services.matcher import fingerprint
from topickit.services.renderer import render_stored, unescape_from_store
from topickit.services.validator import has_errors, validate

logger = logging.getLogger(__name__)


class RegistryStore:
    def __init__(self, path: Optional[Union[str, Path]] = None):
        self.path = Path(path if path is not None else get_registry_path())

    def load(self) -> RegistryFile:
        if not self.path.exists():
            return RegistryFile()
        try:
            raw = self.path.read_text(encoding="utf-8")
        except OSError as e:
            raise TopicKitError(ErrorCode.IO_ERROR, str(e), str(self.path))
        try:
            return RegistryFile.model_validate_json(raw)
        except ValidationError as e:
            raise TopicKitError(ErrorCode.IO_ERROR, f"registry file is corrupt: {e.errors()[0]['msg']}", str(self.path))

    def save(self, registry: RegistryFile) -> None:
        directory = self.path.parent if str(self.path.parent) else Path(".")
        directory.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=".registry-", suffix=".json", dir=directory)
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                f.write(registry.model_dump_json(indent=2))
                f.write("\n")
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp, self.path)
        except OSError as e:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise TopicKitError(ErrorCode.IO_ERROR, str(e), str(self.path))


def _same_key(entry: RegistryEntry, topic: str, language: str, tier: Tier) -> bool:
    return entry.topic == topic and entry.language == language and entry.tier == tier


def _raise_on_errors(findings: List[Finding]) -> None:
    if not has_errors(findings):
        return
    errors = [f for f in findings if f.severity == Severity.ERROR]
    first = errors[0]
    raise TopicKitError(
        ErrorCode.VALIDATION_FAILED,
        f"{len(errors)} validation error(s), first {first.code.value}: {first.message}",
        first.location,
    )


def _check_entry(entry: RegistryEntry) -> str:
    _raise_on_errors(validate(entry.stored_regex))
    return unescape_from_store(entry.stored_regex)


def build_entry(doc: RegexDocument, annotated: bool = False) -> RegistryEntry:
    """Registry entry for a document whose own test suite passes."""
    _raise_on_errors(validate(doc))
    return RegistryEntry(
        topic=doc.topic,
        language=doc.language,
        tier=doc.tier,
        version=doc.version,
        stored_regex=render_stored(doc, RenderOptions(annotated=annotated)),
    )


def publish(entry: RegistryEntry, path: Optional[Union[str, Path]] = None) -> int:
    live = _check_entry(entry)
    store = RegistryStore(path)
    registry = store.load()
    prior = [e.version for e in registry.entries if _same_key(e, entry.topic, entry.language, entry.tier)]
    if prior and entry.version <= max(prior):
        raise TopicKitError(
            ErrorCode.VERSION_CONFLICT,
            f"{entry.topic}/{entry.language}/{entry.tier.value} already has version {max(prior)}",
            entry.version,
        )
    stamped = entry.model_copy(update={
        "fingerprint": fingerprint(live),
        "published_at": datetime.datetime.now(datetime.timezone.utc),
    })
    store.save(RegistryFile(entries=registry.entries + (stamped,)))
    logger.info(f"Published {entry.topic}/{entry.language}/{entry.tier.value} v{entry.version} to {store.path}")
    return entry.version


def fetch(
    topic: str,
    language: str,
    tier: Tier,
    version: Optional[int] = None,
    path: Optional[Union[str, Path]] = None,
) -> RegistryEntry:
    """Latest entry for the key, or the pinned version; re-validated on the way out."""
    candidates = [e for e in RegistryStore(path).load().entries if _same_key(e, topic, language, tier)]
    if version is not None:
        candidates = [e for e in candidates if e.version == version]
    if not candidates:
        pinned = f" v{version}" if version is not None else ""
        raise TopicKitError(ErrorCode.NOT_FOUND, f"no entry for {topic}/{language}/{tier.value}{pinned}")
    entry = max(candidates, key=lambda e: e.version)
    _check_entry(entry)
    return entry


def list_entries(path: Optional[Union[str, Path]] = None) -> List[RegistryEntry]:
    entries = RegistryStore(path).load().entries
    return sorted(entries, key=lambda e: (e.topic, e.language, e.tier.value, e.version))


def concat_for_language(entries: Sequence[RegistryEntry], max_langs: int = MAX_CONCAT_LANGS) -> str:
    """Alternation of the entries' live regexes, primary language first.

    Mixed-language text is common, so the English regex is usually appended to
    each language's own regex before matching.
    """
    if not entries:
        raise TopicKitError(ErrorCode.BAD_ARGUMENT, "nothing to concatenate")
    if len(entries) > max_langs:
        logger.warning(f"Refusing to concatenate {len(entries)} regexes (limit {max_langs})")
        raise TopicKitError(ErrorCode.TOO_MANY_LANGS, f"{len(entries)} regexes exceed the limit of {max_langs}")
    combined = "|".join(f"({unescape_from_store(e.stored_regex)})" for e in entries)
    try:
        re.compile(combined)
    except re.error as e:
        raise TopicKitError(ErrorCode.COMPILE_FAIL, f"concatenated regex does not compile: {e.msg}", e.pos)
    return combined
