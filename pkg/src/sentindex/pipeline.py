"""Batch and parallel execution of classification and aggregation.

Documents are cut into fixed-size batches.  With more than one worker the
batches go to a process pool; results are consumed in submission order, so
the output never depends on scheduling.  Aggregation builds one counter
store per batch and merges them, which is exact because counters are
integers.
"""
from __future__ import annotations

import itertools
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Iterator, List, Optional, Tuple

from .classifier import (
    Classification,
    DictRuleConfig,
    DEFAULT_ALPHA,
    classify_nb,
)
from .index import CounterStore, IndexConfig
from .lexicon import NbModel, SentimentLexicon
from .textproc import Normalizer, _URL_PREFIXES, _is_lexical, normalize_text

__all__ = ["TextClassifier", "classify_stream", "aggregate", "batched"]

DEFAULT_BATCH = 2000

# The token cache maps a raw token to a packed code so that summing the
# codes of a text yields n, pos_hits and neg_hits in one C-level pass.
_FIELD = 21
_MASK = (1 << _FIELD) - 1
_DROPPED = 0
_NEUTRAL = 1
_POS = 1 | (1 << _FIELD)
_NEG = 1 | (1 << (2 * _FIELD))
_CODE = {1: _POS, -1: _NEG, 0: _NEUTRAL}
# texts this long could overflow a field (n < 2**21 is guaranteed below it)
_LONG_TEXT = 2 * _MASK

_EMPTY = Classification(0, 0.0, 0, 0, 0)
# skips the Python-level namedtuple __new__ on the hot path
_new_tuple = tuple.__new__


class TextClassifier:
    """Raw text in, :class:`Classification` out.

    Bundles normalizer, lexicon and rule so the whole thing can be shipped
    to worker processes.  The dictionary path memoizes, per raw token, the
    lemma's polarity (or that the token is dropped) so that classifying a
    text is one dictionary lookup per token.
    """

    _cache_limit = 1_000_000

    def __init__(
        self,
        normalizer: Normalizer,
        lexicon: Optional[SentimentLexicon] = None,
        method: str = "dict",
        alpha: float = DEFAULT_ALPHA,
        nb_model: Optional[NbModel] = None,
    ):
        if method not in ("dict", "nb"):
            raise ValueError(f"unknown classifier {method!r}")
        if method == "dict" and lexicon is None:
            raise ValueError("the dict classifier needs a lexicon")
        if method == "nb" and nb_model is None:
            raise ValueError("the nb classifier needs an NB model")
        self.normalizer = normalizer
        self.lexicon = lexicon if lexicon is not None else SentimentLexicon()
        self.method = method
        self.alpha = DictRuleConfig(alpha).alpha
        self.nb_model = nb_model
        # raw token -> packed code (see _FIELD)
        self._tokens: dict = {}

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_tokens"] = {}
        return state

    def _token_code(self, tok: str) -> int:
        if tok.startswith(_URL_PREFIXES) or not _is_lexical(tok):
            out = _DROPPED
        else:
            lemma = self.normalizer(tok)
            out = _CODE[self.lexicon._polarity.get(lemma, 0)] if lemma else _DROPPED
        if len(self._tokens) >= self._cache_limit:
            self._tokens.clear()
        self._tokens[tok] = out
        return out

    def counts(self, text: str) -> Tuple[int, int, int]:
        """``(n, pos_hits, neg_hits)`` for a raw text."""
        get = self._tokens.get
        toks = text.split()
        if len(text) < _LONG_TEXT:
            try:
                s = sum(map(get, toks))
            except TypeError:
                miss = self._token_code
                s = sum([miss(t) if c is None else c for t, c in zip(toks, map(get, toks))])
            return s & _MASK, (s >> _FIELD) & _MASK, s >> (2 * _FIELD)
        codes = [get(t) if t in self._tokens else self._token_code(t) for t in toks]
        return len(codes) - codes.count(_DROPPED), codes.count(_POS), codes.count(_NEG)

    def __call__(self, text: str) -> Classification:
        if self.method == "nb":
            return classify_nb(normalize_text(text, self.normalizer), self.nb_model, self.lexicon)
        try:
            s = sum(map(self._tokens.get, text.split()))
        except TypeError:
            s = -1
        if s < 0 or len(text) >= _LONG_TEXT:
            n, pos, neg = self.counts(text)
        else:
            n = s & _MASK
            pos = (s >> _FIELD) & _MASK
            neg = s >> (2 * _FIELD)
        if not n:
            return _EMPTY
        delta = (pos - neg) / n
        alpha = self.alpha
        if delta > 0:
            label = 1 if delta >= alpha else 0
        elif delta < 0:
            label = -1 if -delta >= alpha else 0
        else:
            label = 0
        return _new_tuple(Classification, (label, delta, pos, neg, n))


def batched(items: Iterable, size: int) -> Iterator[list]:
    if size < 1:
        raise ValueError("batch size must be at least 1")
    it = iter(items)
    while True:
        chunk = list(itertools.islice(it, size))
        if not chunk:
            return
        yield chunk


# per-process state installed by the pool initializer
_WORKER: dict = {}


def _init_worker(classifier: TextClassifier, index_cfg: Optional[IndexConfig]) -> None:
    _WORKER["classifier"] = classifier
    _WORKER["index_cfg"] = index_cfg


def _classify_batch(batch: List[Tuple[str, str]]) -> List[tuple]:
    clf = _WORKER["classifier"]
    out = []
    for doc_id, text in batch:
        c = clf(text)
        out.append((doc_id, c.label, c.delta, c.pos_hits, c.neg_hits, c.n))
    return out


def _aggregate_batch(batch) -> CounterStore:
    clf = _WORKER["classifier"]
    store = CounterStore.for_config(_WORKER["index_cfg"])
    for doc in batch:
        store.observe(doc, clf(doc.text))
    return store


def _ordered_map(fn: Callable, batches: Iterable, workers: int, initargs: tuple) -> Iterator:
    if workers <= 1:
        _init_worker(*initargs)
        for b in batches:
            yield fn(b)
        return
    window = 2 * workers
    with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=initargs) as pool:
        pending: deque = deque()
        for b in batches:
            pending.append(pool.submit(fn, b))
            if len(pending) >= window:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()


def classify_stream(
    docs: Iterable,
    classifier: TextClassifier,
    workers: int = 1,
    batch_size: int = DEFAULT_BATCH,
) -> Iterator[Tuple[str, Classification]]:
    """Yield ``(doc_id, Classification)`` in input order."""
    pairs = ((d.id, d.text) for d in docs)
    for result in _ordered_map(_classify_batch, batched(pairs, batch_size), workers, (classifier, None)):
        for doc_id, label, delta, pos, neg, n in result:
            yield doc_id, Classification(label, delta, pos, neg, n)


def aggregate(
    docs: Iterable,
    classifier: TextClassifier,
    cfg: IndexConfig = IndexConfig(),
    workers: int = 1,
    batch_size: int = DEFAULT_BATCH,
) -> CounterStore:
    """Classify and count ``docs`` into a single store."""
    store = CounterStore.for_config(cfg)
    for part in _ordered_map(_aggregate_batch, batched(docs, batch_size), workers, (classifier, cfg)):
        store.update(part)
    return store
