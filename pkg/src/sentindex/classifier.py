"""Per-text sentiment classification.

Two rules are available:

* the dictionary rule, driven by the emotion delta
  ``(positive hits - negative hits) / n`` and a neutrality threshold alpha;
* a Naive Bayes rule over a phrase model, scored in log space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

from .lexicon import NbModel, SentimentLexicon

__all__ = [
    "Classification",
    "DictRuleConfig",
    "DEFAULT_ALPHA",
    "emotion_delta",
    "classify_dict",
    "classify_nb",
    "nb_scores",
    "match_phrases",
]

DEFAULT_ALPHA = 0.05
MAX_PHRASE_TOKENS = 3

# argmax preference on exact ties: least committal label first
_NB_TIE_ORDER = (0, 1, -1)


class Classification(NamedTuple):
    """Verdict for one text; ``delta`` is None on the Naive Bayes path."""

    label: int
    delta: Optional[float]
    pos_hits: int
    neg_hits: int
    n: int


@dataclass(frozen=True)
class DictRuleConfig:
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")


def _lemmas(t) -> Sequence[str]:
    return t.lemmas if hasattr(t, "lemmas") else t


def _count_hits(lemmas: Sequence[str], lexicon: SentimentLexicon) -> Tuple[int, int]:
    get = lexicon._polarity.get
    pos = neg = 0
    for w in lemmas:
        p = get(w)
        if p is not None:
            if p > 0:
                pos += 1
            else:
                neg += 1
    return pos, neg


def emotion_delta(t, lexicon: SentimentLexicon) -> Tuple[float, int, int]:
    """Return ``(delta, pos_hits, neg_hits)`` for a lemma multiset.

    Hits count occurrences, so a repeated term contributes each time.
    An empty text has delta 0.
    """
    lemmas = _lemmas(t)
    pos, neg = _count_hits(lemmas, lexicon)
    n = len(lemmas)
    delta = (pos - neg) / n if n else 0.0
    return delta, pos, neg


def classify_dict(t, lexicon: SentimentLexicon, cfg: DictRuleConfig = DictRuleConfig()) -> Classification:
    lemmas = _lemmas(t)
    n = len(lemmas)
    pos, neg = _count_hits(lemmas, lexicon)
    if n == 0:
        return Classification(0, 0.0, 0, 0, 0)
    delta = (pos - neg) / n
    label = 0
    # |delta| == alpha is polar; delta == 0 is neutral even at alpha == 0
    if delta > 0 and delta >= cfg.alpha:
        label = 1
    elif delta < 0 and -delta >= cfg.alpha:
        label = -1
    return Classification(label, delta, pos, neg, n)


def match_phrases(lemmas: Sequence[str], model: NbModel, max_tokens: int = MAX_PHRASE_TOKENS):
    """Greedy left-to-right longest match of model phrases over ``lemmas``."""
    phrases = model.phrases
    longest = min(max_tokens, model.max_phrase_len)
    n = len(lemmas)
    matches = []
    i = 0
    while i < n:
        for size in range(min(longest, n - i), 0, -1):
            cand = tuple(lemmas[i:i + size])
            if cand in phrases:
                matches.append(cand)
                i += size
                break
        else:
            i += 1
    return matches


def nb_scores(t, model: NbModel, max_tokens: int = MAX_PHRASE_TOKENS) -> dict:
    """Log-space scores ``log p(c) + sum log p(w|c)`` for each label."""
    matches = match_phrases(_lemmas(t), model, max_tokens)
    scores = {}
    for c in (-1, 0, 1):
        s = math.log(model.priors[c])
        for phrase in matches:
            s += math.log(model.prob(phrase, c))
        scores[c] = s
    return scores


def classify_nb(
    t,
    model: NbModel,
    lexicon: Optional[SentimentLexicon] = None,
    max_tokens: int = MAX_PHRASE_TOKENS,
) -> Classification:
    """Naive Bayes argmax over {-1, 0, +1}.

    Exact score ties go to 0, then +1, then -1.  When ``lexicon`` is given
    the lexicon hit counts are filled in so the result can feed the word
    indexes; ``delta`` is always None.
    """
    lemmas = _lemmas(t)
    scores = nb_scores(lemmas, model, max_tokens)
    best = _NB_TIE_ORDER[0]
    for c in _NB_TIE_ORDER[1:]:
        if scores[c] > scores[best]:
            best = c
    pos = neg = 0
    if lexicon is not None:
        pos, neg = _count_hits(lemmas, lexicon)
    return Classification(best, None, pos, neg, len(lemmas))
