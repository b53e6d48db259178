"""Tokenization and lemma normalization.

A text becomes an ordered list of normalized tokens (a multiset that keeps
duplicates).  Normalization is pluggable: two surface normalizers ship, and
any external lemmatizer that reads one token per line and writes one lemma
per line can be attached with ``external:<command>``.
"""
from __future__ import annotations

import shlex
import subprocess
import threading
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence

__all__ = [
    "Normalizer",
    "LowerNormalizer",
    "LowerTrimmedNormalizer",
    "ExternalNormalizer",
    "TokenMultiset",
    "get_normalizer",
    "tokenize",
    "normalize_text",
]

_URL_PREFIXES = ("http://", "https://")


def _is_lexical(token: str) -> bool:
    # isalpha() on the whole token is the common case and is much cheaper
    if token.isalpha():
        return True
    for ch in token:
        if ch.isalpha():
            return True
    return False


def tokenize(text: str) -> List[str]:
    """Split ``text`` on Unicode whitespace.

    Tokens without a single letter (punctuation, symbols, digits) and URLs
    are dropped.  Order is preserved.
    """
    out = []
    for tok in text.split():
        if tok.startswith(_URL_PREFIXES):
            continue
        if _is_lexical(tok):
            out.append(tok)
    return out


class Normalizer:
    """Maps a raw token to its normalized form ("" means drop the token).

    Subclasses implement :meth:`normalize`.  Results are memoized, since
    corpus vocabularies are heavily repetitive.
    """

    name = "abstract"
    _cache_limit = 500_000

    def __init__(self) -> None:
        self._cache: Dict[str, str] = {}

    def normalize(self, token: str) -> str:
        raise NotImplementedError

    def __call__(self, token: str) -> str:
        cache = self._cache
        try:
            return cache[token]
        except KeyError:
            pass
        lemma = self.normalize(token)
        if len(cache) >= self._cache_limit:
            cache.clear()
        cache[token] = lemma
        return lemma

    def normalize_tokens(self, tokens: Sequence[str]) -> List[str]:
        cache = self._cache
        out = []
        for tok in tokens:
            lemma = cache.get(tok)
            if lemma is None:
                lemma = self(tok)
            if lemma:
                out.append(lemma)
        return out

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_cache"] = {}
        return state

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name!r}>"


class LowerNormalizer(Normalizer):
    name = "lower"

    def normalize(self, token: str) -> str:
        return token.lower()


class LowerTrimmedNormalizer(Normalizer):
    """Lowercase, then strip leading and trailing non-letter characters."""

    name = "lower-trimmed"

    def normalize(self, token: str) -> str:
        low = token.lower()
        if low.isalpha():
            return low
        start, end = 0, len(low)
        while start < end and not low[start].isalpha():
            start += 1
        while end > start and not low[end - 1].isalpha():
            end -= 1
        return low[start:end]


class ExternalNormalizer(Normalizer):
    """Delegates to a subprocess speaking a line protocol.

    The command receives one token per line on stdin and must answer each
    with exactly one lemma line on stdout (line-buffered, UTF-8).  An empty
    answer drops the token.  The process is started lazily, so instances
    can be pickled into worker processes.
    """

    def __init__(self, command: str) -> None:
        super().__init__()
        self.command = command
        self.name = f"external:{command}"
        self._proc: subprocess.Popen | None = None
        self._lock = threading.Lock()

    def _process(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                shlex.split(self.command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                encoding="utf-8",
                bufsize=1,
            )
        return self._proc

    def normalize(self, token: str) -> str:
        with self._lock:
            proc = self._process()
            proc.stdin.write(token + "\n")
            proc.stdin.flush()
            line = proc.stdout.readline()
        if not line:
            raise RuntimeError(f"external normalizer {self.command!r} exited")
        lemma = line.strip().lower()
        if any(ch.isspace() for ch in lemma):
            raise ValueError(
                f"external normalizer returned whitespace in lemma {lemma!r}"
            )
        return lemma

    def close(self) -> None:
        if self._proc is not None:
            self._proc.stdin.close()
            self._proc.wait(timeout=5)
            self._proc = None

    def __getstate__(self):
        state = super().__getstate__()
        state["_proc"] = None
        del state["_lock"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()


_BUILTIN: Dict[str, Callable[[], Normalizer]] = {
    "lower": LowerNormalizer,
    "lower-trimmed": LowerTrimmedNormalizer,
}


def get_normalizer(name: str) -> Normalizer:
    """Build a normalizer from its CLI name."""
    if name.startswith("external:"):
        command = name[len("external:"):].strip()
        if not command:
            raise ValueError("external normalizer needs a command")
        return ExternalNormalizer(command)
    try:
        return _BUILTIN[name]()
    except KeyError:
        known = ", ".join(sorted(_BUILTIN)) + ", external:<command>"
        raise ValueError(f"unknown normalizer {name!r} (expected one of {known})")


@dataclass(frozen=True)
class TokenMultiset:
    """Normalized lemmas of one text, duplicates preserved."""

    lemmas: tuple

    @property
    def n(self) -> int:
        return len(self.lemmas)

    def __len__(self) -> int:
        return len(self.lemmas)

    def __iter__(self):
        return iter(self.lemmas)


def normalize_text(text: str, normalizer: Normalizer) -> TokenMultiset:
    return TokenMultiset(tuple(normalizer.normalize_tokens(tokenize(text))))
