"""Streaming reader for line-delimited corpora.

Two record formats are understood:

``jsonl``
    ``{"id": "...", "ts": "2013-04-04T12:00:00Z" | 1365076800, "kind": "post", "text": "..."}``
    with ``kind`` optional (defaults to ``post``).
``tsv``
    ``ts<TAB>kind<TAB>text``; the record id is the line number.

Bad records are skipped and counted, never fatal.
"""
from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import IO, Callable, Iterable, Iterator, List, Optional, Tuple, Union

__all__ = [
    "Document",
    "IngestStats",
    "CorpusStream",
    "RecordError",
    "stream_corpus",
    "parse_timestamp",
    "format_record",
    "write_corpus",
    "KINDS",
    "sample_corpus_path",
]

KINDS = ("post", "comment")
MAX_ERROR_SAMPLES = 10


class RecordError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class Document:
    id: str
    timestamp: datetime
    kind: str
    text: str


@dataclass
class IngestStats:
    records_read: int = 0
    records_ok: int = 0
    records_skipped: int = 0
    # subset of records_skipped rejected by the filter predicate
    records_filtered: int = 0
    first_error_samples: List[Tuple[int, str]] = field(default_factory=list)

    def error(self, lineno: int, reason: str) -> None:
        self.records_skipped += 1
        if len(self.first_error_samples) < MAX_ERROR_SAMPLES:
            self.first_error_samples.append((lineno, reason))

    @property
    def records_invalid(self) -> int:
        return self.records_skipped - self.records_filtered


def parse_timestamp(value) -> datetime:
    """ISO-8601 string or integer epoch seconds to an aware UTC datetime.

    Naive ISO strings are taken as UTC.
    """
    if isinstance(value, bool):
        raise RecordError(f"bad timestamp {value!r}")
    if isinstance(value, int):
        try:
            return datetime.fromtimestamp(value, tz=timezone.utc)
        except (OverflowError, OSError, ValueError):
            raise RecordError(f"epoch seconds out of range: {value}")
    if not isinstance(value, str):
        raise RecordError(f"bad timestamp {value!r}")
    text = value.strip()
    if text.lstrip("-").isdigit():
        return parse_timestamp(int(text))
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        raise RecordError(f"unparseable timestamp {value!r}")
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def _parse_jsonl(line: str, lineno: int) -> Document:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RecordError(f"invalid JSON: {exc.msg}")
    if not isinstance(rec, dict):
        raise RecordError("record is not an object")
    for key in ("id", "ts", "text"):
        if key not in rec:
            raise RecordError(f"missing key {key!r}")
    doc_id, text = rec["id"], rec["text"]
    if not isinstance(doc_id, str):
        raise RecordError("id must be a string")
    if not isinstance(text, str):
        raise RecordError("text must be a string")
    kind = rec.get("kind", "post")
    if kind not in KINDS:
        raise RecordError(f"kind must be post or comment, got {kind!r}")
    return Document(doc_id, parse_timestamp(rec["ts"]), kind, text)


def _parse_tsv(line: str, lineno: int) -> Document:
    cols = line.split("\t", 2)
    if len(cols) != 3:
        raise RecordError(f"expected ts<TAB>kind<TAB>text, got {len(cols)} columns")
    ts, kind, text = cols
    kind = kind.strip() or "post"
    if kind not in KINDS:
        raise RecordError(f"kind must be post or comment, got {kind!r}")
    return Document(str(lineno), parse_timestamp(ts), kind, text)


_PARSERS = {"jsonl": _parse_jsonl, "tsv": _parse_tsv}


class CorpusStream:
    """Iterable over the documents of one corpus source.

    ``stats`` is complete once iteration finishes.  A stream can be
    iterated once.
    """

    def __init__(
        self,
        source: Union[str, Path, IO[bytes], None],
        fmt: str = "jsonl",
        filter: Optional[Callable[[Document], bool]] = None,
    ):
        if fmt not in _PARSERS:
            raise ValueError(f"unknown corpus format {fmt!r}")
        self._parse = _PARSERS[fmt]
        self._filter = filter
        self.stats = IngestStats()
        if source is None or source == "-":
            self._fh = sys.stdin.buffer
            self._owned = False
        elif isinstance(source, (str, Path)):
            # unreadable source fails here, before any iteration
            self._fh = open(source, "rb")
            self._owned = True
        else:
            self._fh = source
            self._owned = False

    def __iter__(self) -> Iterator[Document]:
        stats = self.stats
        parse = self._parse
        keep = self._filter
        try:
            for lineno, raw in enumerate(self._fh, start=1):
                if not raw.strip():
                    continue
                stats.records_read += 1
                try:
                    line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
                    if lineno == 1:
                        line = line.lstrip("\ufeff")
                    doc = parse(line.rstrip("\r\n"), lineno)
                except UnicodeDecodeError as exc:
                    stats.error(lineno, f"invalid UTF-8 ({exc.reason})")
                    continue
                except RecordError as exc:
                    stats.error(lineno, str(exc))
                    continue
                if keep is not None and not keep(doc):
                    stats.records_skipped += 1
                    stats.records_filtered += 1
                    continue
                stats.records_ok += 1
                yield doc
        finally:
            if self._owned:
                self._fh.close()


def stream_corpus(source, fmt: str = "jsonl", filter=None) -> CorpusStream:
    return CorpusStream(source, fmt=fmt, filter=filter)


def _iso(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def format_record(doc: Document, fmt: str = "jsonl") -> str:
    if fmt == "jsonl":
        rec = {"id": doc.id, "ts": _iso(doc.timestamp), "kind": doc.kind, "text": doc.text}
        return json.dumps(rec, ensure_ascii=False)
    if fmt == "tsv":
        if "\t" in doc.kind or "\n" in doc.text:
            raise ValueError("text with newlines cannot be written as TSV")
        return f"{_iso(doc.timestamp)}\t{doc.kind}\t{doc.text}"
    raise ValueError(f"unknown corpus format {fmt!r}")


def write_corpus(docs: Iterable[Document], out: Union[str, Path, IO[str]], fmt: str = "jsonl") -> int:
    if isinstance(out, (str, Path)):
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            return write_corpus(docs, fh, fmt)
    count = 0
    for doc in docs:
        out.write(format_record(doc, fmt) + "\n")
        count += 1
    return count


def sample_corpus_path() -> Path:
    """The bundled 400-document, 14-day demonstration corpus."""
    return Path(str(resources.files("sentindex") / "data" / "sample_corpus.jsonl"))
