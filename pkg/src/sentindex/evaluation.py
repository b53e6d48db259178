"""Three-class evaluation: confusion matrix, macro/per-class metrics, alpha sweeps.

Labels are -1, 0, +1.  Precision or recall of a class with an empty
denominator is 0, and macro scores always average over all three classes.
Macro F1 is the mean of the per-class F1 scores, not the F1 of macro P/R.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, List, Optional, Sequence, Tuple, Union

from .classifier import DictRuleConfig, classify_dict
from .lexicon import SentimentLexicon
from .textproc import Normalizer, LowerTrimmedNormalizer, normalize_text

__all__ = [
    "LABELS",
    "EvalError",
    "ConfusionMatrix",
    "EvalReport",
    "confusion",
    "report",
    "alpha_sweep",
    "load_labeled",
    "REPORT_COLUMNS",
    "format_table",
    "write_report_csv",
]

LABELS = (-1, 0, 1)
_INDEX = {-1: 0, 0: 1, 1: 2}

# column order of report tables and CSV
REPORT_COLUMNS = (
    "Macro_P", "Macro_R", "Macro_F1", "Accuracy",
    "P_1", "P_0", "P_-1", "R_1", "R_0", "R_-1",
)


class EvalError(ValueError):
    pass


@dataclass
class ConfusionMatrix:
    """``counts[actual][predicted]`` with rows/cols ordered -1, 0, +1."""

    counts: List[List[int]]

    @classmethod
    def empty(cls) -> "ConfusionMatrix":
        return cls([[0, 0, 0] for _ in LABELS])

    @property
    def total(self) -> int:
        return sum(map(sum, self.counts))

    def cell(self, actual: int, predicted: int) -> int:
        return self.counts[_INDEX[actual]][_INDEX[predicted]]

    def add(self, actual: int, predicted: int) -> None:
        self.counts[_INDEX[actual]][_INDEX[predicted]] += 1


def _check_label(label, what: str, record: int) -> int:
    if isinstance(label, bool) or label not in _INDEX:
        raise EvalError(f"record {record}: {what} label {label!r} not in {{-1, 0, 1}}")
    return int(label)


def confusion(pairs: Iterable[Tuple[int, int]]) -> ConfusionMatrix:
    m = ConfusionMatrix.empty()
    for i, (actual, predicted) in enumerate(pairs):
        m.add(_check_label(actual, "actual", i), _check_label(predicted, "predicted", i))
    return m


@dataclass(frozen=True)
class EvalReport:
    precision: dict
    recall: dict
    f1: dict
    macro_p: float
    macro_r: float
    macro_f1: float
    accuracy: float
    total: int

    def as_row(self) -> dict:
        row = {
            "Macro_P": self.macro_p,
            "Macro_R": self.macro_r,
            "Macro_F1": self.macro_f1,
            "Accuracy": self.accuracy,
        }
        for c in (1, 0, -1):
            row[f"P_{c}"] = self.precision[c]
        for c in (1, 0, -1):
            row[f"R_{c}"] = self.recall[c]
        return row


def report(m: ConfusionMatrix) -> EvalReport:
    total = m.total
    if total == 0:
        raise EvalError("cannot score an empty confusion matrix")
    precision, recall, f1 = {}, {}, {}
    for c in LABELS:
        tp = m.cell(c, c)
        predicted = sum(m.cell(a, c) for a in LABELS)
        actual = sum(m.cell(c, p) for p in LABELS)
        p = tp / predicted if predicted else 0.0
        r = tp / actual if actual else 0.0
        precision[c], recall[c] = p, r
        f1[c] = 2 * p * r / (p + r) if p + r else 0.0
    correct = sum(m.cell(c, c) for c in LABELS)
    return EvalReport(
        precision=precision,
        recall=recall,
        f1=f1,
        macro_p=sum(precision.values()) / 3,
        macro_r=sum(recall.values()) / 3,
        macro_f1=sum(f1.values()) / 3,
        accuracy=correct / total,
        total=total,
    )


def load_labeled(source: Union[str, Path, IO[str]]) -> List[Tuple[int, str]]:
    """Read ``label<TAB>text`` lines; ``#`` lines and blank lines are skipped."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            return load_labeled(fh)
    data = []
    for lineno, line in enumerate(source, start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        label, sep, text = line.partition("\t")
        if not sep:
            raise EvalError(f"line {lineno}: expected label<TAB>text")
        label = label.strip()
        if label not in ("-1", "0", "1", "+1"):
            raise EvalError(f"line {lineno}: label {label!r} not in {{-1, 0, 1}}")
        data.append((int(label), text))
    return data


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    report: EvalReport
    neutral_fraction: float


def alpha_sweep(
    dataset: Sequence[Tuple[int, str]],
    lexicon: SentimentLexicon,
    alphas: Sequence[float],
    normalizer: Optional[Normalizer] = None,
) -> List[SweepRow]:
    """Score the dictionary rule at every alpha, normalizing texts only once."""
    if not alphas:
        raise EvalError("alpha list is empty")
    if not dataset:
        raise EvalError("dataset is empty")
    normalizer = normalizer or LowerTrimmedNormalizer()
    docs = [(label, normalize_text(text, normalizer)) for label, text in dataset]
    rows = []
    for alpha in alphas:
        cfg = DictRuleConfig(alpha)
        pairs = [(label, classify_dict(t, lexicon, cfg).label) for label, t in docs]
        m = confusion(pairs)
        neutral = sum(m.cell(a, 0) for a in LABELS)
        rows.append(SweepRow(alpha, report(m), neutral / m.total))
    return rows


def format_table(rows: Sequence[Tuple[str, EvalReport, dict]], digits: int = 3) -> str:
    """Aligned text table; ``rows`` holds ``(run_id, report, extra_columns)``."""
    extra_cols: List[str] = []
    for _, _, extra in rows:
        for k in extra:
            if k not in extra_cols:
                extra_cols.append(k)
    header = ["RunID", *REPORT_COLUMNS, *extra_cols]
    body = []
    for run_id, rep, extra in rows:
        vals = rep.as_row()
        cells = [run_id] + [f"{vals[c]:.{digits}f}" for c in REPORT_COLUMNS]
        cells += [f"{extra[c]:.{digits}f}" if c in extra else "" for c in extra_cols]
        body.append(cells)
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                       for i, (c, w) in enumerate(zip(r, widths)))
             for r in [header, *body]]
    return "\n".join(lines) + "\n"


def write_report_csv(rows: Sequence[Tuple[str, EvalReport, dict]], fh: IO[str]) -> None:
    extra_cols: List[str] = []
    for _, _, extra in rows:
        for k in extra:
            if k not in extra_cols:
                extra_cols.append(k)
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["RunID", *REPORT_COLUMNS, *extra_cols])
    for run_id, rep, extra in rows:
        vals = rep.as_row()
        writer.writerow([run_id, *(repr(vals[c]) for c in REPORT_COLUMNS),
                         *(repr(extra[c]) if c in extra else "" for c in extra_cols)])
