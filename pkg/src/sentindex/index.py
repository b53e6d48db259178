"""Per-bucket counters and the four corpus indexes.

Counters are exact integers and merge by field-wise addition, so corpora
can be sharded, counted independently and combined in any order.  The
indexes are derived views computed from the counters:

========  =====================================================
``s_w``   (positive word hits + eps) / (negative word hits + eps)
``s_t``   (positive texts + eps) / (negative texts + eps)
``e_w``   (positive + negative word hits + eps) / (tokens + eps)
``e_t``   (positive + negative texts + eps) / (texts + eps)
========  =====================================================
"""
from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field, fields
from datetime import date, datetime, timedelta, timezone
from typing import Dict, Iterable, List, Optional, Sequence

from .ingest import KINDS, RecordError, parse_timestamp

__all__ = [
    "Counters",
    "BucketCounters",
    "CounterStore",
    "IndexConfig",
    "IndexRow",
    "GRANULARITIES",
    "INDEX_NAMES",
    "parse_tz",
    "observe",
    "merge",
    "word_sentiment_index",
    "text_sentiment_index",
    "word_emotion_index",
    "text_emotion_index",
    "series",
    "dynamic_range",
    "series_header",
    "write_series_csv",
    "summary_table",
]

GRANULARITIES = ("day", "week", "month")
INDEX_NAMES = ("s_w", "s_t", "e_w", "e_t")
DEFAULT_EPSILON = 1e-6


@dataclass(slots=True)
class Counters:
    n_texts: int = 0
    n_tokens: int = 0
    pos_words: int = 0
    neg_words: int = 0
    pos_texts: int = 0
    neg_texts: int = 0
    neutral_texts: int = 0

    def add(self, cls) -> None:
        self.n_texts += 1
        self.n_tokens += cls.n
        self.pos_words += cls.pos_hits
        self.neg_words += cls.neg_hits
        if cls.label > 0:
            self.pos_texts += 1
        elif cls.label < 0:
            self.neg_texts += 1
        else:
            self.neutral_texts += 1

    def iadd(self, other: "Counters") -> None:
        self.n_texts += other.n_texts
        self.n_tokens += other.n_tokens
        self.pos_words += other.pos_words
        self.neg_words += other.neg_words
        self.pos_texts += other.pos_texts
        self.neg_texts += other.neg_texts
        self.neutral_texts += other.neutral_texts

    def values(self) -> tuple:
        return (self.n_texts, self.n_tokens, self.pos_words, self.neg_words,
                self.pos_texts, self.neg_texts, self.neutral_texts)

    def copy(self) -> "Counters":
        return Counters(*self.values())


COUNTER_FIELDS = tuple(f.name for f in fields(Counters))


def _empty_kinds() -> Dict[str, Counters]:
    return {k: Counters() for k in KINDS}


@dataclass(slots=True)
class BucketCounters(Counters):
    """Totals for one time bucket plus identical per-kind sub-counters."""

    bucket_start: Optional[date] = None
    by_kind: Dict[str, Counters] = field(default_factory=_empty_kinds)

    def add_doc(self, kind: str, cls) -> None:
        self.add(cls)
        self.by_kind[kind].add(cls)

    def merge_from(self, other: "BucketCounters") -> None:
        self.iadd(other)
        for k, sub in other.by_kind.items():
            self.by_kind[k].iadd(sub)

    def copy(self) -> "BucketCounters":
        return BucketCounters(
            *self.values(),
            bucket_start=self.bucket_start,
            by_kind={k: c.copy() for k, c in self.by_kind.items()},
        )

    def kind(self, name: str) -> Counters:
        return self.by_kind[name]


_TZ_RE = re.compile(r"^(?:UTC|Z|([+-])(\d{2}):?(\d{2}))$")


def parse_tz(text) -> timezone:
    """``+03:00`` / ``-0530`` / ``UTC`` to a fixed-offset timezone."""
    if isinstance(text, timezone):
        return text
    m = _TZ_RE.match(str(text).strip())
    if not m:
        raise ValueError(f"bad timezone offset {text!r} (expected ±HH:MM)")
    if m.group(1) is None:
        return timezone.utc
    hours, minutes = int(m.group(2)), int(m.group(3))
    if hours > 23 or minutes > 59:
        raise ValueError(f"bad timezone offset {text!r}")
    delta = timedelta(hours=hours, minutes=minutes)
    return timezone(-delta if m.group(1) == "-" else delta)


@dataclass(frozen=True)
class IndexConfig:
    epsilon: float = DEFAULT_EPSILON
    bucket: str = "day"
    tz: timezone = timezone.utc

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.bucket not in GRANULARITIES:
            raise ValueError(f"bucket must be one of {GRANULARITIES}, got {self.bucket!r}")
        object.__setattr__(self, "tz", parse_tz(self.tz))


def _bucket_start(day: date, bucket: str) -> date:
    if bucket == "day":
        return day
    if bucket == "week":
        return day - timedelta(days=day.weekday())
    return day.replace(day=1)


def _next_bucket(start: date, bucket: str) -> date:
    if bucket == "day":
        return start + timedelta(days=1)
    if bucket == "week":
        return start + timedelta(days=7)
    if start.month == 12:
        return date(start.year + 1, 1, 1)
    return date(start.year, start.month + 1, 1)


class CounterStore:
    """Mapping of bucket start date to :class:`BucketCounters`.

    Single writer.  Stores with the same granularity and timezone merge
    into a new store; the empty store is the identity.
    """

    def __init__(self, bucket: str = "day", tz="UTC"):
        if bucket not in GRANULARITIES:
            raise ValueError(f"bucket must be one of {GRANULARITIES}, got {bucket!r}")
        self.bucket = bucket
        self.tz = parse_tz(tz)
        self.buckets: Dict[date, BucketCounters] = {}
        self.errors = 0

    @classmethod
    def for_config(cls, cfg: IndexConfig) -> "CounterStore":
        return cls(cfg.bucket, cfg.tz)

    def bucket_key(self, ts: datetime) -> date:
        return _bucket_start(ts.astimezone(self.tz).date(), self.bucket)

    def observe(self, doc, cls) -> None:
        ts = doc.timestamp
        try:
            if not isinstance(ts, datetime):
                ts = parse_timestamp(ts)
            elif ts.tzinfo is None:
                ts = ts.replace(tzinfo=timezone.utc)
            key = self.bucket_key(ts)
        except (RecordError, OverflowError, ValueError):
            self.errors += 1
            return
        kind = getattr(doc, "kind", "post") or "post"
        if kind not in KINDS:
            self.errors += 1
            return
        bc = self.buckets.get(key)
        if bc is None:
            bc = self.buckets[key] = BucketCounters(bucket_start=key)
        bc.add_doc(kind, cls)

    def merge(self, other: "CounterStore") -> "CounterStore":
        out = CounterStore(self.bucket, self.tz)
        out.update(self)
        out.update(other)
        return out

    def update(self, other: "CounterStore") -> None:
        """In-place merge of ``other`` into this store."""
        if (self.bucket, self.tz) != (other.bucket, other.tz):
            raise ValueError(
                f"cannot merge {self.bucket}/{self.tz} buckets with "
                f"{other.bucket}/{other.tz} buckets"
            )
        self.errors += other.errors
        for key, bc in other.buckets.items():
            cur = self.buckets.get(key)
            if cur is None:
                self.buckets[key] = bc.copy()
            else:
                cur.merge_from(bc)

    def total(self) -> BucketCounters:
        tot = BucketCounters()
        for bc in self.buckets.values():
            tot.merge_from(bc)
        return tot

    def sorted_buckets(self) -> List[BucketCounters]:
        return [self.buckets[k] for k in sorted(self.buckets)]

    def __len__(self) -> int:
        return len(self.buckets)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CounterStore):
            return NotImplemented
        return (
            self.bucket == other.bucket
            and self.tz == other.tz
            and self.errors == other.errors
            and self.buckets == other.buckets
        )

    def __repr__(self) -> str:
        return f"<CounterStore {self.bucket} {self.tz} buckets={len(self.buckets)}>"


def observe(acc: CounterStore, doc, cls) -> CounterStore:
    acc.observe(doc, cls)
    return acc


def merge(a: CounterStore, b: CounterStore) -> CounterStore:
    return a.merge(b)


def _eps(cfg) -> float:
    if cfg is None:
        return DEFAULT_EPSILON
    if isinstance(cfg, (int, float)):
        return float(cfg)
    return cfg.epsilon


def _ratio(num: int, den: int, eps: float) -> float:
    top = num + eps
    bottom = den + eps
    if bottom == 0:
        return math.inf if top > 0 else math.nan
    return top / bottom


def word_sentiment_index(c: Counters, cfg=None) -> float:
    return _ratio(c.pos_words, c.neg_words, _eps(cfg))


def text_sentiment_index(c: Counters, cfg=None) -> float:
    return _ratio(c.pos_texts, c.neg_texts, _eps(cfg))


def word_emotion_index(c: Counters, cfg=None) -> float:
    return _ratio(c.pos_words + c.neg_words, c.n_tokens, _eps(cfg))


def text_emotion_index(c: Counters, cfg=None) -> float:
    return _ratio(c.pos_texts + c.neg_texts, c.n_texts, _eps(cfg))


def compute_indexes(c: Counters, cfg=None) -> Dict[str, float]:
    return {
        "s_w": word_sentiment_index(c, cfg),
        "s_t": text_sentiment_index(c, cfg),
        "e_w": word_emotion_index(c, cfg),
        "e_t": text_emotion_index(c, cfg),
    }


@dataclass
class IndexRow:
    bucket_start: date
    counters: BucketCounters
    s_w: float
    s_t: float
    e_w: float
    e_t: float

    @classmethod
    def from_counters(cls, bc: BucketCounters, cfg=None) -> "IndexRow":
        return cls(bc.bucket_start, bc, **compute_indexes(bc, cfg))

    def index(self, name: str) -> float:
        if name not in INDEX_NAMES:
            raise ValueError(f"unknown index {name!r}")
        return getattr(self, name)


def series(store: CounterStore, cfg=None) -> List[IndexRow]:
    """One row per bucket from the first to the last observed bucket.

    Buckets without documents inside that range are emitted with zero
    counters.
    """
    if not store.buckets:
        return []
    keys = sorted(store.buckets)
    rows = []
    cur, last = keys[0], keys[-1]
    while cur <= last:
        bc = store.buckets.get(cur)
        if bc is None:
            bc = BucketCounters(bucket_start=cur)
        rows.append(IndexRow.from_counters(bc, cfg))
        cur = _next_bucket(cur, store.bucket)
    return rows


def dynamic_range(rows: Iterable, which: str = "s_w") -> float:
    """max / min of one index over the rows with finite positive values."""
    if which not in INDEX_NAMES:
        raise ValueError(f"unknown index {which!r}")
    vals = [getattr(r, which) for r in rows]
    vals = [v for v in vals if math.isfinite(v) and v > 0]
    if not vals:
        raise ValueError(f"no finite positive {which} values for a dynamic range")
    return max(vals) / min(vals)


def series_header(by_kind: bool = False) -> List[str]:
    cols = ["bucket_start", *COUNTER_FIELDS, *INDEX_NAMES]
    if by_kind:
        for k in KINDS:
            cols += [f"{k}_{name}" for name in (*COUNTER_FIELDS, *INDEX_NAMES)]
    return cols


def _fmt(x: float) -> str:
    return repr(float(x))


def series_records(rows: Sequence[IndexRow], cfg=None, by_kind: bool = False) -> List[List[str]]:
    out = []
    for r in rows:
        rec = [r.bucket_start.isoformat(), *map(str, r.counters.values())]
        rec += [_fmt(r.s_w), _fmt(r.s_t), _fmt(r.e_w), _fmt(r.e_t)]
        if by_kind:
            for k in KINDS:
                sub = r.counters.by_kind[k]
                rec += [str(v) for v in sub.values()]
                rec += [_fmt(v) for v in compute_indexes(sub, cfg).values()]
        out.append(rec)
    return out


def write_series_csv(rows: Sequence[IndexRow], fh, cfg=None, by_kind: bool = False) -> None:
    """Write the series CSV; floats keep full double precision (``repr``)."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(series_header(by_kind))
    writer.writerows(series_records(rows, cfg, by_kind))


SUMMARY_ROWS = (
    ("positive words, %", "pct", "pos_words", "n_tokens"),
    ("negative words, %", "pct", "neg_words", "n_tokens"),
    ("Word Emotion Index, e_w", "index", "e_w", None),
    ("Word Sentiment Index, s_w", "index", "s_w", None),
    ("positive texts, %", "pct", "pos_texts", "n_texts"),
    ("negative texts, %", "pct", "neg_texts", "n_texts"),
    ("Text Emotion Index, e_t", "index", "e_t", None),
    ("Text Sentiment Index, s_t", "index", "s_t", None),
)


def summary_table(total: BucketCounters, cfg=None) -> List[tuple]:
    """Corpus-level rows ``(label, kind, posts, comments, combined)``.

    ``kind`` is ``"pct"`` (a percentage) or ``"index"``.
    """
    views = [total.by_kind["post"], total.by_kind["comment"], total]
    idx = [compute_indexes(v, cfg) for v in views]
    rows = []
    for label, kind, num, den in SUMMARY_ROWS:
        vals = []
        for v, ix in zip(views, idx):
            if kind == "index":
                vals.append(ix[num])
            else:
                d = getattr(v, den)
                vals.append(100.0 * getattr(v, num) / d if d else math.nan)
        rows.append((label, kind, *vals))
    return rows
