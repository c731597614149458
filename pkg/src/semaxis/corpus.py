"""Corpus cleaning, balancing and counting."""

from __future__ import annotations

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence
from urllib.parse import urlsplit

import numpy as np

__all__ = [
    "CorpusStats",
    "load_stopwords",
    "default_stopwords",
    "preprocess",
    "undersample",
    "count_tokens",
]

_URL = re.compile(r"(?:\b[a-zA-Z][a-zA-Z0-9+.\-]*://|\bwww\.)[^\s<>()\[\]{}\"']+")
# already-extracted host names survive a second pass unchanged
_HOST = re.compile(r"^[\w\-]+(?:\.[\w\-]+)+$")
_NUMERIC = re.compile(r"^\d+$")


def load_stopwords(path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(ln.strip().lower() for ln in fh if ln.strip() and not ln.startswith("#"))


def default_stopwords() -> frozenset[str]:
    """The packaged English stopword list."""
    ref = resources.files("semaxis") / "data" / "stopwords_en.txt"
    with resources.as_file(ref) as p:
        return load_stopwords(p)


def _host(url: str) -> str | None:
    if url.lower().startswith("www."):
        url = "http://" + url
    try:
        host = urlsplit(url).hostname
    except ValueError:
        return None
    return host.strip(".") if host else None


def _strip_punct(token: str) -> str:
    return "".join(ch for ch in token if not unicodedata.category(ch).startswith("P"))


def preprocess(text: str, stopwords: Iterable[str] = (), strip_numerals: bool = False) -> list[str]:
    """Lowercase, swap URLs for their host, drop punctuation and stopwords.

    Host-like tokens (``example.com``) keep their dots so the function is
    idempotent on its own output.
    """
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else set(stopwords)

    def swap(m):
        host = _host(m.group(0))
        return f" {host.lower()} " if host else " "

    text = _URL.sub(swap, text.lower())
    out = []
    for raw in text.split():
        tok = raw if _HOST.match(raw) else _strip_punct(raw)
        if not tok or tok in stop:
            continue
        if strip_numerals and _NUMERIC.match(tok):
            continue
        out.append(tok)
    return out


def undersample(corpus_big: Sequence, target_size: int, seed: int = 0) -> list:
    """Uniform sample of ``target_size`` documents without replacement.

    Documents keep their original relative order.
    """
    n = len(corpus_big)
    if target_size > n:
        raise ValueError(f"target_size {target_size} exceeds corpus size {n}")
    if target_size < 0:
        raise ValueError("target_size must be >= 0")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(n, size=target_size, replace=False))
    return [corpus_big[i] for i in idx]


@dataclass
class CorpusStats:
    documents: int = 0
    tokens: int = 0
    frequencies: Counter = field(default_factory=Counter)

    def __getitem__(self, token: str) -> int:
        return self.frequencies.get(token, 0)

    def get(self, token: str, default: int = 0) -> int:
        return self.frequencies.get(token, default)


def count_tokens(corpus: Iterable) -> CorpusStats:
    """Exact token frequencies over whitespace-split documents."""
    stats = CorpusStats()
    for doc in corpus:
        toks = doc.split() if isinstance(doc, str) else list(doc)
        stats.documents += 1
        stats.tokens += len(toks)
        stats.frequencies.update(toks)
    return stats
