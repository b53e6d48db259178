"""Command-line interface: ``sentindex classify | index | eval``.

Every flag can also come from a JSON config file (``--config``) whose keys
are the long flag names (``"alpha": 0.07``, ``"by-kind": true``).  Flags
given on the command line win over the file.
"""
from __future__ import annotations

import argparse
import importlib
import json
import logging
import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from typing import List, Optional

from . import __version__
from .classifier import DEFAULT_ALPHA
from .evaluation import EvalError, alpha_sweep, confusion, format_table, load_labeled, report, write_report_csv
from .index import (
    DEFAULT_EPSILON,
    GRANULARITIES,
    INDEX_NAMES,
    IndexConfig,
    dynamic_range,
    series,
    summary_table,
    write_series_csv,
)
from .ingest import stream_corpus
from .lexicon import LexiconError, load_lexicon, load_nb_model, sample_lexicon_path
from .pipeline import TextClassifier, aggregate, classify_stream
from .textproc import get_normalizer

log = logging.getLogger("sentindex")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    normalizer: str = "lower-trimmed"
    lexicon: Optional[str] = None
    nb_model: Optional[str] = None
    classifier: str = "dict"
    alpha: float = DEFAULT_ALPHA
    epsilon: float = DEFAULT_EPSILON
    bucket: str = "day"
    tz: str = "+00:00"
    format: str = "jsonl"
    by_kind: bool = False
    sweep: Optional[List[float]] = None
    workers: int = 1
    out: Optional[str] = None
    filter: Optional[str] = None

    def validate(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise UsageError(f"--alpha must be in [0, 1], got {self.alpha}")
        if not self.epsilon >= 0:
            raise UsageError(f"--epsilon must be >= 0, got {self.epsilon}")
        if self.workers < 1:
            raise UsageError(f"--workers must be >= 1, got {self.workers}")
        if self.classifier not in ("dict", "nb"):
            raise UsageError(f"--classifier must be dict or nb, got {self.classifier!r}")
        if self.classifier == "nb" and not self.nb_model:
            raise UsageError("--classifier nb requires --nb-model")
        if self.bucket not in GRANULARITIES:
            raise UsageError(f"--bucket must be one of {', '.join(GRANULARITIES)}")
        if self.format not in ("jsonl", "tsv"):
            raise UsageError(f"--format must be jsonl or tsv, got {self.format!r}")
        if self.sweep is not None:
            if not self.sweep:
                raise UsageError("--sweep needs at least one alpha")
            for a in self.sweep:
                if not 0.0 <= a <= 1.0:
                    raise UsageError(f"--sweep alpha {a} outside [0, 1]")


def _alpha_list(text) -> List[float]:
    if isinstance(text, list):
        return [float(a) for a in text]
    try:
        return [float(a) for a in str(text).split(",") if a.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad alpha list {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # defaults are None so that config-file values can fill the gaps
    common.add_argument("--config", metavar="PATH", help="JSON file of flag values")
    common.add_argument("--lexicon", metavar="PATH",
                        help="lexicon TSV (default: the bundled 20-term sample)")
    common.add_argument("--nb-model", metavar="PATH", help="NB phrase model TSV")
    common.add_argument("--classifier", choices=("dict", "nb"), default=None)
    common.add_argument("--alpha", type=float, default=None,
                        help=f"neutrality threshold (default {DEFAULT_ALPHA})")
    common.add_argument("--normalizer", metavar="NAME", default=None,
                        help="lower | lower-trimmed | external:<command> (default lower-trimmed)")
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--out", metavar="PATH", default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    corpus = argparse.ArgumentParser(add_help=False)
    corpus.add_argument("corpus", nargs="?", default="-", help="corpus file (default stdin)")
    corpus.add_argument("--format", choices=("jsonl", "tsv"), default=None)
    corpus.add_argument("--filter", metavar="MODULE:FUNC", default=None,
                        help="document predicate applied before classification")

    parser = argparse.ArgumentParser(
        prog="sentindex",
        description="Lexicon-based sentiment classification and corpus sentiment indexes.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("classify", parents=[common, corpus],
                   help="classify each document (id, label, delta, pos_hits, neg_hits, n)")

    p_index = sub.add_parser("index", parents=[common, corpus],
                             help="per-bucket counters and the four indexes as CSV")
    p_index.add_argument("--epsilon", type=float, default=None,
                         help=f"smoothing constant (default {DEFAULT_EPSILON:g})")
    p_index.add_argument("--bucket", choices=GRANULARITIES, default=None)
    p_index.add_argument("--tz", metavar="±HH:MM", default=None,
                         help="fixed offset for bucket alignment (default UTC)")
    p_index.add_argument("--by-kind", action="store_const", const=True, default=None,
                         help="add post_/comment_ column groups")

    p_eval = sub.add_parser("eval", parents=[common],
                            help="score against a labeled label<TAB>text dataset")
    p_eval.add_argument("dataset")
    p_eval.add_argument("--sweep", type=_alpha_list, default=None, metavar="LIST",
                        help="comma-separated alphas, e.g. 0.02,0.05,0.07")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}")
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a JSON object")
        known = set(RunConfig.__dataclass_fields__)
        for key, val in raw.items():
            name = key.replace("-", "_")
            if name not in known:
                raise UsageError(f"unknown config key {key!r}")
            values[name] = val
    for name in RunConfig.__dataclass_fields__:
        val = getattr(args, name, None)
        if val is not None:
            values[name] = val
    if "sweep" in values and values["sweep"] is not None:
        values["sweep"] = _alpha_list(values["sweep"])
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def _load_filter(spec: Optional[str]):
    if not spec:
        return None
    module, _, func = spec.partition(":")
    if not module or not func:
        raise UsageError("--filter must look like module:function")
    try:
        return getattr(importlib.import_module(module), func)
    except (ImportError, AttributeError) as exc:
        raise UsageError(f"cannot load filter {spec!r}: {exc}")


def build_classifier(cfg: RunConfig) -> TextClassifier:
    try:
        normalizer = get_normalizer(cfg.normalizer)
    except ValueError as exc:
        raise UsageError(str(exc))
    lexicon_path = cfg.lexicon or sample_lexicon_path()
    lexicon = load_lexicon(lexicon_path, normalizer)
    model = load_nb_model(cfg.nb_model, normalizer) if cfg.nb_model else None
    return TextClassifier(normalizer, lexicon, cfg.classifier, cfg.alpha, model)


@contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _report_skips(stats) -> None:
    if stats.records_skipped:
        log.warning(
            "read %d records: %d ok, %d skipped (%d filtered)",
            stats.records_read, stats.records_ok, stats.records_skipped, stats.records_filtered,
        )
        for lineno, reason in stats.first_error_samples:
            log.warning("  line %d: %s", lineno, reason)


def cmd_classify(cfg: RunConfig, corpus: str) -> int:
    clf = build_classifier(cfg)
    stream = stream_corpus(corpus, cfg.format, _load_filter(cfg.filter))
    with _output(cfg.out) as fh:
        for doc_id, c in classify_stream(stream, clf, workers=cfg.workers):
            delta = "NA" if c.delta is None else repr(c.delta)
            fh.write(f"{doc_id}\t{c.label}\t{delta}\t{c.pos_hits}\t{c.neg_hits}\t{c.n}\n")
    _report_skips(stream.stats)
    return 0


def _num(x: float, kind: str) -> str:
    if math.isnan(x):
        return "n/a"
    if math.isinf(x):
        return "inf"
    return f"{x:.2f}" if kind == "pct" else f"{x:.3f}"


def format_summary(store, rows, cfg: IndexConfig) -> str:
    table = summary_table(store.total(), cfg)
    header = ("", "posts", "comments", "posts + comments")
    body = [(label, *(_num(v, kind) for v in vals)) for label, kind, *vals in table]
    width0 = max(len(r[0]) for r in body)
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(1, 4)]
    lines = []
    for r in [header, *body]:
        cells = [r[0].ljust(width0)] + [c.rjust(w) for c, w in zip(r[1:], widths)]
        lines.append("  ".join(cells).rstrip())
    lines.append("")
    lines.append(f"dynamic range (max/min over {len(rows)} {store.bucket} buckets):")
    for name in INDEX_NAMES:
        try:
            value = f"{dynamic_range(rows, name):.3f}"
        except ValueError:
            value = "n/a"
        lines.append(f"  {name}: {value}")
    return "\n".join(lines) + "\n"


def cmd_index(cfg: RunConfig, corpus: str) -> int:
    clf = build_classifier(cfg)
    try:
        icfg = IndexConfig(cfg.epsilon, cfg.bucket, cfg.tz)
    except ValueError as exc:
        raise UsageError(str(exc))
    stream = stream_corpus(corpus, cfg.format, _load_filter(cfg.filter))
    store = aggregate(stream, clf, icfg, workers=cfg.workers)
    _report_skips(stream.stats)
    if not store.buckets:
        log.error("corpus is empty: no documents to index")
        return 1
    rows = series(store, icfg)
    with _output(cfg.out) as fh:
        write_series_csv(rows, fh, icfg, by_kind=cfg.by_kind)
    summary = format_summary(store, rows, icfg)
    (sys.stdout if cfg.out not in (None, "-") else sys.stderr).write(summary)
    return 0


def cmd_eval(cfg: RunConfig, dataset_path: str) -> int:
    clf = build_classifier(cfg)
    dataset = load_labeled(dataset_path)
    if not dataset:
        raise EvalError(f"{dataset_path}: no labeled records")
    rows = []
    if cfg.sweep and cfg.classifier == "dict":
        for r in alpha_sweep(dataset, clf.lexicon, cfg.sweep, clf.normalizer):
            rows.append((f"dict (alpha = {r.alpha:g})", r.report,
                         {"neutral_fraction": r.neutral_fraction}))
    else:
        if cfg.sweep:
            log.warning("--sweep applies to the dict classifier only; ignored")
        pairs = [(label, clf(text).label) for label, text in dataset]
        m = confusion(pairs)
        neutral = sum(m.cell(a, 0) for a in (-1, 0, 1)) / m.total
        run_id = f"dict (alpha = {cfg.alpha:g})" if cfg.classifier == "dict" else "nb"
        rows.append((run_id, report(m), {"neutral_fraction": neutral}))
    sys.stdout.write(format_table(rows))
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            write_report_csv(rows, fh)
    return 0


def _setup_logging(verbose: bool) -> None:
    # bind to the current stderr on every call, not just the first
    for h in list(log.handlers):
        log.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("sentindex: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.DEBUG if verbose else logging.INFO)
    log.propagate = False


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    try:
        cfg = resolve_config(args)
        if args.command == "classify":
            return cmd_classify(cfg, args.corpus)
        if args.command == "index":
            return cmd_index(cfg, args.corpus)
        return cmd_eval(cfg, args.dataset)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        log.error("%s", exc)
        return 2
    except (LexiconError, EvalError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
