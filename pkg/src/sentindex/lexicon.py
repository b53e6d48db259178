"""Sentiment lexicons and Naive Bayes phrase models.

Lexicon file (TSV, UTF-8)::

    # comment
    хороший<TAB>+1
    плохой<TAB>-1

NB model file (TSV, UTF-8)::

    #priors<TAB>p(-1)<TAB>p(0)<TAB>p(+1)      (optional)
    phrase<TAB>p(w|-1)<TAB>p(w|+1)
    phrase<TAB>p(w|-1)<TAB>p(w|0)<TAB>p(w|+1)

Phrases may span several whitespace-separated tokens.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import IO, Dict, FrozenSet, Iterable, Optional, Tuple, Union

from .textproc import LowerTrimmedNormalizer, Normalizer

__all__ = [
    "LexiconError",
    "SentimentLexicon",
    "NbModel",
    "load_lexicon",
    "dump_lexicon",
    "load_nb_model",
    "sample_lexicon_path",
    "sample_nb_model_path",
    "DEFAULT_NB_FLOOR",
]

LABELS = (-1, 0, 1)
DEFAULT_NB_FLOOR = 1e-7

Source = Union[str, Path, bytes, IO[bytes], IO[str]]


class LexiconError(ValueError):
    """Raised for malformed lexicon or model files."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _read_lines(source: Source) -> Iterable[Tuple[int, str]]:
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            yield from _read_lines(fh)
        return
    for lineno, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise LexiconError(f"invalid UTF-8 ({exc.reason})", lineno)
        if lineno == 1:
            raw = raw.lstrip("\ufeff")
        yield lineno, raw.rstrip("\r\n")


@dataclass(frozen=True)
class SentimentLexicon:
    positive_terms: FrozenSet[str] = frozenset()
    negative_terms: FrozenSet[str] = frozenset()
    _polarity: Dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        pos = frozenset(self.positive_terms)
        neg = frozenset(self.negative_terms)
        both = pos & neg
        if both:
            term = sorted(both)[0]
            raise LexiconError(f"term {term!r} has both polarities")
        object.__setattr__(self, "positive_terms", pos)
        object.__setattr__(self, "negative_terms", neg)
        table = dict.fromkeys(pos, 1)
        table.update(dict.fromkeys(neg, -1))
        object.__setattr__(self, "_polarity", table)

    def polarity(self, term: str) -> Optional[int]:
        """+1 for a positive term, -1 for a negative one, None otherwise."""
        return self._polarity.get(term)

    def swapped(self) -> "SentimentLexicon":
        return SentimentLexicon(self.negative_terms, self.positive_terms)

    def __len__(self) -> int:
        return len(self._polarity)

    def __contains__(self, term: str) -> bool:
        return term in self._polarity


def load_lexicon(source: Source, normalizer: Optional[Normalizer] = None) -> SentimentLexicon:
    """Parse a lexicon TSV, normalizing every term with ``normalizer``.

    Duplicate identical entries collapse; a term listed with both polarities
    is a conflict.
    """
    if normalizer is None:
        normalizer = LowerTrimmedNormalizer()
    seen: Dict[str, Tuple[int, int]] = {}
    for lineno, line in _read_lines(source):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise LexiconError(f"expected 2 tab-separated columns, got {len(cols)}", lineno)
        raw_term, raw_pol = cols[0].strip(), cols[1].strip()
        if raw_pol not in ("+1", "-1"):
            raise LexiconError(f"polarity must be +1 or -1, got {raw_pol!r}", lineno)
        if not raw_term or any(ch.isspace() for ch in raw_term):
            raise LexiconError(f"term must be a single token, got {raw_term!r}", lineno)
        term = normalizer(raw_term)
        if not term:
            raise LexiconError(f"term {raw_term!r} normalizes to nothing", lineno)
        pol = -1 if raw_pol == "-1" else 1
        prev = seen.get(term)
        if prev is not None and prev[0] != pol:
            raise LexiconError(
                f"conflict: term {term!r} is {prev[0]:+d} on line {prev[1]} "
                f"and {pol:+d} on line {lineno}"
            )
        seen[term] = (pol, lineno)
    pos = frozenset(t for t, (p, _) in seen.items() if p > 0)
    neg = frozenset(t for t, (p, _) in seen.items() if p < 0)
    return SentimentLexicon(pos, neg)


def dump_lexicon(lexicon: SentimentLexicon) -> str:
    """Serialize to the TSV format, sorted for stable diffs."""
    lines = [f"{t}\t+1" for t in sorted(lexicon.positive_terms)]
    lines += [f"{t}\t-1" for t in sorted(lexicon.negative_terms)]
    return "".join(line + "\n" for line in lines)


def sample_lexicon_path() -> Path:
    """The bundled 20-term lexicon (ten positive and ten negative adjectives)."""
    return Path(str(resources.files("sentindex") / "data" / "sample_lexicon.tsv"))


def sample_nb_model_path() -> Path:
    return Path(str(resources.files("sentindex") / "data" / "sample_nb_model.tsv"))


@dataclass(frozen=True)
class NbModel:
    """Class-conditional phrase probabilities for the Naive Bayes rule.

    ``phrases`` maps a tuple of normalized tokens to a dict
    ``{label: p(phrase | label)}``; labels missing from the dict are served
    at ``floor``.
    """

    phrases: Dict[Tuple[str, ...], Dict[int, float]]
    priors: Dict[int, float] = field(
        default_factory=lambda: {c: 1.0 / 3.0 for c in LABELS}
    )
    floor: float = DEFAULT_NB_FLOOR
    max_phrase_len: int = field(init=False, default=0)

    def __post_init__(self):
        if not self.floor > 0:
            raise LexiconError(f"floor must be > 0, got {self.floor}")
        if set(self.priors) != set(LABELS):
            raise LexiconError("priors must cover labels -1, 0, +1")
        for c, p in self.priors.items():
            if not 0 < p <= 1:
                raise LexiconError(f"prior p({c:+d}) = {p} outside (0, 1]")
        if abs(sum(self.priors.values()) - 1.0) > 1e-9:
            raise LexiconError("priors must sum to 1")
        for phrase, probs in self.phrases.items():
            for c, p in probs.items():
                if not 0 < p <= 1:
                    raise LexiconError(
                        f"p({' '.join(phrase)!r}|{c:+d}) = {p} outside (0, 1]"
                    )
        longest = max((len(p) for p in self.phrases), default=0)
        object.__setattr__(self, "max_phrase_len", longest)

    def prob(self, phrase: Tuple[str, ...], label: int) -> float:
        probs = self.phrases.get(phrase)
        if probs is None:
            return self.floor
        return probs.get(label, self.floor)


def _parse_prob(text: str, lineno: int) -> float:
    try:
        p = float(text)
    except ValueError:
        raise LexiconError(f"not a number: {text!r}", lineno)
    if not (0 < p <= 1) or math.isnan(p):
        raise LexiconError(f"probability {text} outside (0, 1]", lineno)
    return p


def load_nb_model(
    source: Source,
    normalizer: Optional[Normalizer] = None,
    floor: float = DEFAULT_NB_FLOOR,
) -> NbModel:
    if normalizer is None:
        normalizer = LowerTrimmedNormalizer()
    priors = None
    phrases: Dict[Tuple[str, ...], Dict[int, float]] = {}
    for lineno, line in _read_lines(source):
        if not line.strip():
            continue
        cols = line.split("\t")
        if cols[0].strip() == "#priors":
            if len(cols) != 4:
                raise LexiconError("#priors needs 3 values (p-1, p0, p+1)", lineno)
            vals = [_parse_prob(c, lineno) for c in cols[1:]]
            total = sum(vals)
            if abs(total - 1.0) > 1e-6:
                raise LexiconError(f"priors sum to {total!r}, expected 1", lineno)
            priors = {c: v / total for c, v in zip(LABELS, vals)}
            continue
        if line.startswith("#"):
            continue
        if len(cols) == 3:
            labels = (-1, 1)
        elif len(cols) == 4:
            labels = (-1, 0, 1)
        else:
            raise LexiconError(f"expected 3 or 4 columns, got {len(cols)}", lineno)
        phrase = tuple(normalizer.normalize_tokens(cols[0].split()))
        if not phrase:
            raise LexiconError(f"empty phrase {cols[0]!r}", lineno)
        probs = {c: _parse_prob(v, lineno) for c, v in zip(labels, cols[1:])}
        if phrase in phrases and phrases[phrase] != probs:
            raise LexiconError(f"phrase {' '.join(phrase)!r} defined twice", lineno)
        phrases[phrase] = probs
    if priors is None:
        return NbModel(phrases, floor=floor)
    return NbModel(phrases, priors=priors, floor=floor)
