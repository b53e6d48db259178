import io
import json
import random
import tracemalloc
from datetime import datetime, timezone

import pytest

from sentindex.ingest import (
    Document,
    RecordError,
    format_record,
    parse_timestamp,
    sample_corpus_path,
    stream_corpus,
    write_corpus,
)

from synth import random_vocab, synthetic_docs

UTC = timezone.utc


def jsonl(*records):
    lines = [r if isinstance(r, str) else json.dumps(r, ensure_ascii=False) for r in records]
    return io.BytesIO(("\n".join(lines) + "\n").encode("utf-8"))


def rec(i, text="текст", ts="2013-04-04T12:00:00Z", kind="post"):
    return {"id": str(i), "ts": ts, "kind": kind, "text": text}


class TestJsonl:
    def test_three_valid(self):
        s = stream_corpus(jsonl(rec(1), rec(2), rec(3)))
        docs = list(s)
        assert [d.id for d in docs] == ["1", "2", "3"]
        assert (s.stats.records_read, s.stats.records_ok, s.stats.records_skipped) == (3, 3, 0)

    def test_malformed_line_skipped(self):
        s = stream_corpus(jsonl(rec(1), "{not json"))
        assert len(list(s)) == 1
        assert s.stats.records_ok == 1
        assert s.stats.records_skipped == 1
        assert s.stats.first_error_samples[0][0] == 2

    @pytest.mark.parametrize("bad", [
        {"ts": "2013-04-04T12:00:00Z", "text": "x"},
        {"id": "1", "text": "x"},
        {"id": "1", "ts": "2013-04-04T12:00:00Z"},
        {"id": 1, "ts": "2013-04-04T12:00:00Z", "text": "x"},
        {"id": "1", "ts": "yesterday", "text": "x"},
        {"id": "1", "ts": "2013-04-04T12:00:00Z", "text": "x", "kind": "tweet"},
        {"id": "1", "ts": True, "text": "x"},
        [1, 2, 3],
    ])
    def test_bad_records(self, bad):
        s = stream_corpus(jsonl(bad, rec(2)))
        assert [d.id for d in s] == ["2"]
        assert s.stats.records_invalid == 1

    def test_kind_defaults_to_post(self):
        r = rec(1)
        del r["kind"]
        (d,) = stream_corpus(jsonl(r))
        assert d.kind == "post"

    def test_invalid_utf8_counted(self):
        data = io.BytesIO(json.dumps(rec(1)).encode() + b"\n\xff\xfe\n")
        s = stream_corpus(data)
        assert len(list(s)) == 1
        assert s.stats.records_skipped == 1

    def test_blank_lines_ignored(self):
        s = stream_corpus(jsonl(rec(1), "", "   ", rec(2)))
        assert len(list(s)) == 2
        assert s.stats.records_read == 2

    def test_error_samples_bounded(self):
        s = stream_corpus(jsonl(*["bad"] * 50))
        assert list(s) == []
        assert s.stats.records_skipped == 50
        assert len(s.stats.first_error_samples) == 10


class TestTimestamps:
    def test_epoch_and_iso_agree(self):
        a = parse_timestamp(1365076800)
        assert a == parse_timestamp("2013-04-04T12:00:00Z")
        assert a == parse_timestamp("1365076800")
        assert a == parse_timestamp("2013-04-04T16:00:00+04:00")
        assert a.tzinfo is UTC

    def test_naive_is_utc(self):
        assert parse_timestamp("2013-04-04T12:00:00") == datetime(2013, 4, 4, 12, tzinfo=UTC)

    @pytest.mark.parametrize("bad", ["", "2013-13-01", None, 1.5, True, 10 ** 20])
    def test_rejects(self, bad):
        with pytest.raises(RecordError):
            parse_timestamp(bad)


class TestTsv:
    def test_parse(self):
        data = io.BytesIO("2013-04-04T12:00:00Z\tcomment\tплохой\tдень\n1365076800\tpost\tx\n".encode())
        docs = list(stream_corpus(data, fmt="tsv"))
        assert docs[0] == Document("1", datetime(2013, 4, 4, 12, tzinfo=UTC), "comment", "плохой\tдень")
        assert docs[1].id == "2"

    def test_short_line(self):
        s = stream_corpus(io.BytesIO(b"2013-04-04\tpost\n"), fmt="tsv")
        assert list(s) == []
        assert s.stats.records_skipped == 1

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            stream_corpus(io.BytesIO(b""), fmt="csv")


def test_filter_counts_as_skipped():
    s = stream_corpus(jsonl(rec(1, kind="comment"), rec(2), rec(3, kind="comment")),
                      filter=lambda d: d.kind == "post")
    assert [d.id for d in s] == ["2"]
    assert s.stats.records_skipped == 2
    assert s.stats.records_filtered == 2
    assert s.stats.records_invalid == 0


def test_unreadable_path_fails_up_front(tmp_path):
    with pytest.raises(OSError):
        stream_corpus(tmp_path / "missing.jsonl")


@pytest.mark.parametrize("fmt", ["jsonl", "tsv"])
def test_round_trip_10000(tmp_path, fmt):
    rng = random.Random(4)
    docs = list(synthetic_docs(rng, random_vocab(rng, 200), 10_000))
    path = tmp_path / f"c.{fmt}"
    assert write_corpus(docs, path, fmt) == 10_000
    s = stream_corpus(path, fmt)
    back = list(s)
    assert s.stats.records_ok == len(back) == 10_000
    assert [(d.timestamp, d.kind, d.text) for d in back] == [(d.timestamp, d.kind, d.text) for d in docs]
    if fmt == "jsonl":
        assert [d.id for d in back] == [d.id for d in docs]


def test_tsv_rejects_newlines():
    with pytest.raises(ValueError):
        format_record(Document("1", datetime(2013, 1, 1, tzinfo=UTC), "post", "a\nb"), "tsv")


def test_constant_memory(tmp_path):
    path = tmp_path / "big.jsonl"
    line = json.dumps(rec(0, text="слово " * 30), ensure_ascii=False) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        for _ in range(60_000):
            fh.write(line)
    assert path.stat().st_size > 10_000_000
    tracemalloc.start()
    try:
        count = 0
        for _ in stream_corpus(path):
            count += 1
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    assert count == 60_000
    assert peak < 2_000_000


def test_bundled_sample_corpus():
    s = stream_corpus(sample_corpus_path())
    docs = list(s)
    assert len(docs) == 400
    assert s.stats.records_skipped == 0
    assert {d.kind for d in docs} == {"post", "comment"}
    days = {d.timestamp.date() for d in docs}
    assert len(days) == 14
