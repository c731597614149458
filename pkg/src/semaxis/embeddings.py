"""Word-vector storage and queries.

Models are immutable once built: the matrix is flagged read-only and every
query works on float64 copies of the rows it touches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "EmbeddingFormatError",
    "OOVError",
    "Vocabulary",
    "EmbeddingModel",
    "AnalogySet",
    "AnalogyReport",
    "load_embeddings",
    "save_embeddings",
    "cosine",
    "nearest_neighbors",
    "analogy_query",
    "load_analogies",
    "evaluate_analogies",
]


class EmbeddingFormatError(ValueError):
    """Raised when an embedding or analogy file does not match its format."""


class OOVError(KeyError):
    """Raised when a token is required but missing from the vocabulary."""

    def __init__(self, tokens):
        if isinstance(tokens, str):
            tokens = [tokens]
        self.tokens = list(tokens)
        super().__init__(f"out of vocabulary: {', '.join(self.tokens)}")

    def __str__(self):
        return self.args[0]


class Vocabulary:
    """Ordered set of tokens with an index and optional corpus counts."""

    def __init__(self, words: Sequence[str], counts: dict[str, int] | None = None):
        words = list(words)
        index: dict[str, int] = {}
        for i, w in enumerate(words):
            if not isinstance(w, str) or not w or any(c.isspace() for c in w):
                raise ValueError(f"invalid token {w!r}")
            if w in index:
                raise ValueError(f"duplicate token {w!r}")
            index[w] = i
        self.words = tuple(words)
        self.index = index
        self.counts = dict(counts) if counts is not None else None

    def __len__(self):
        return len(self.words)

    def __contains__(self, token):
        return token in self.index

    def __iter__(self):
        return iter(self.words)

    def __getitem__(self, token: str) -> int:
        try:
            return self.index[token]
        except KeyError:
            raise OOVError(token) from None

    def __repr__(self):
        return f"Vocabulary({len(self)} words)"


@dataclass(frozen=True, eq=False)
class EmbeddingModel:
    """A vocabulary plus a |V| x d matrix of word vectors.

    ``context`` holds the output (negative-sampling) vectors when the model
    came out of the trainer; loaded models usually have none.
    """

    vocab: Vocabulary
    matrix: np.ndarray
    meta: dict = field(default_factory=dict)
    context: np.ndarray | None = None
    norm_cache: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.dtype not in (np.float32, np.float64):
            m = m.astype(np.float64)
        if m.ndim != 2 or m.shape[1] < 1:
            raise ValueError("matrix must be 2-D with at least one column")
        if m.shape[0] != len(self.vocab):
            raise ValueError(f"matrix has {m.shape[0]} rows for {len(self.vocab)} words")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix contains non-finite values")
        if m.flags.writeable:
            m = m.copy() if m is self.matrix else m
            m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        if self.context is not None:
            c = np.array(self.context, copy=True)
            if c.shape != m.shape:
                raise ValueError("context matrix shape differs from word matrix")
            c.flags.writeable = False
            object.__setattr__(self, "context", c)
        norms = np.linalg.norm(m.astype(np.float64, copy=False), axis=1)
        norms.flags.writeable = False
        object.__setattr__(self, "norm_cache", norms)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self):
        return len(self.vocab)

    def __contains__(self, token):
        return token in self.vocab

    def vector(self, token: str) -> np.ndarray:
        return self.matrix[self.vocab[token]].astype(np.float64)

    def vectors(self, tokens: Iterable[str]) -> np.ndarray:
        tokens = list(tokens)
        missing = [t for t in tokens if t not in self.vocab]
        if missing:
            raise OOVError(missing)
        idx = [self.vocab.index[t] for t in tokens]
        return self.matrix[idx].astype(np.float64)

    @property
    def model_id(self) -> str:
        return str(self.meta.get("source", "model-%x" % id(self)))

    def __repr__(self):
        return f"EmbeddingModel({len(self.vocab)} x {self.dim}, source={self.meta.get('source')!r})"


# ---------------------------------------------------------------- file formats


def load_embeddings(path, format: str = "text", source: str | None = None) -> EmbeddingModel:
    """Read a word2vec text or binary file."""
    path = Path(path)
    if format not in ("text", "binary"):
        raise ValueError(f"unknown format {format!r}")
    with open(path, "rb") as fh:
        data = fh.read()
    if format == "text":
        words, matrix = _parse_text(data)
    else:
        words, matrix = _parse_binary(data)
    matrix.flags.writeable = False
    try:
        vocab = Vocabulary(words)
    except ValueError as exc:
        raise EmbeddingFormatError(str(exc)) from None
    return EmbeddingModel(vocab, matrix, meta={"source": source or str(path), "epochs": 0})


def _parse_header(line: bytes) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 2:
        raise EmbeddingFormatError(f"malformed header {line[:60]!r}")
    try:
        n, d = int(parts[0]), int(parts[1])
    except ValueError:
        raise EmbeddingFormatError(f"malformed header {line[:60]!r}") from None
    if n < 0 or d < 1:
        raise EmbeddingFormatError(f"malformed header {line[:60]!r}")
    return n, d


def _parse_text(data: bytes):
    lines = [ln for ln in data.decode("utf-8").splitlines() if ln.strip()]
    if not lines:
        raise EmbeddingFormatError("empty file")
    n, d = _parse_header(lines[0].encode())
    rows = lines[1:]
    if len(rows) != n:
        raise EmbeddingFormatError(f"header declares {n} rows, found {len(rows)}")
    words = []
    matrix = np.empty((n, d), dtype=np.float32)
    for i, line in enumerate(rows):
        parts = line.split()
        if len(parts) != d + 1:
            raise EmbeddingFormatError(f"row {i + 1}: expected {d} values, got {len(parts) - 1}")
        words.append(parts[0])
        try:
            matrix[i] = [float(x) for x in parts[1:]]
        except ValueError:
            raise EmbeddingFormatError(f"row {i + 1}: bad number") from None
    if not np.all(np.isfinite(matrix)):
        raise EmbeddingFormatError("non-finite value")
    return words, matrix


def _parse_binary(data: bytes):
    nl = data.find(b"\n")
    if nl < 0:
        raise EmbeddingFormatError("missing header")
    n, d = _parse_header(data[:nl])
    pos = nl + 1
    width = 4 * d
    words = []
    matrix = np.empty((n, d), dtype=np.float32)
    for i in range(n):
        while pos < len(data) and data[pos : pos + 1] == b"\n":
            pos += 1
        sp = data.find(b" ", pos)
        if sp < 0 or sp == pos:
            raise EmbeddingFormatError(f"entry {i}: missing token")
        token = data[pos:sp].decode("utf-8")
        pos = sp + 1
        if pos + width > len(data):
            raise EmbeddingFormatError(f"entry {i}: truncated vector")
        matrix[i] = np.frombuffer(data, dtype="<f4", count=d, offset=pos)
        pos += width
        words.append(token)
    if data[pos:].strip(b"\n"):
        raise EmbeddingFormatError(f"trailing data after {n} entries")
    if not np.all(np.isfinite(matrix)):
        raise EmbeddingFormatError("non-finite value")
    return words, matrix


def save_embeddings(model: EmbeddingModel, path, format: str = "text") -> None:
    """Write ``model`` in word2vec text or binary format."""
    if format not in ("text", "binary"):
        raise ValueError(f"unknown format {format!r}")
    n, d = model.matrix.shape
    m32 = model.matrix.astype("<f4", copy=False)
    with open(path, "wb") as fh:
        fh.write(f"{n} {d}\n".encode())
        if format == "binary":
            for i, w in enumerate(model.vocab.words):
                fh.write(w.encode("utf-8") + b" ")
                fh.write(m32[i].tobytes())
                fh.write(b"\n")
        else:
            for i, w in enumerate(model.vocab.words):
                vals = " ".join(repr(float(x)) for x in m32[i])
                fh.write(f"{w} {vals}\n".encode("utf-8"))


# ---------------------------------------------------------------- similarity


def _max_scaled(x: np.ndarray) -> np.ndarray:
    m = float(np.max(np.abs(x))) if x.size else 0.0
    return x / m if m > 0.0 and np.isfinite(m) else x


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    # cosine is scale-free; rescaling keeps u @ u from under- or overflowing
    u, v = _max_scaled(u), _max_scaled(v)
    nu, nv = math.sqrt(float(u @ u)), math.sqrt(float(v @ v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine of a zero-norm vector")
    return min(1.0, max(-1.0, float(u @ v) / (nu * nv)))


def _scan(model: EmbeddingModel, vec: np.ndarray) -> np.ndarray:
    """Cosine of ``vec`` against every row (zero rows score 0)."""
    vec = np.asarray(vec, dtype=np.float64)
    qn = np.linalg.norm(vec)
    if qn == 0.0:
        raise ValueError("query vector has zero norm")
    dots = model.matrix @ vec.astype(model.matrix.dtype)
    norms = model.norm_cache
    with np.errstate(invalid="ignore", divide="ignore"):
        scores = np.where(norms > 0, dots / (norms * qn), 0.0)
    return np.clip(scores, -1.0, 1.0)


def _top_k(scores: np.ndarray, k: int, banned: Sequence[int] = ()) -> np.ndarray:
    """Indices of the k best scores, ties broken by ascending index."""
    scores = np.array(scores, dtype=np.float64)
    if len(banned):
        scores[list(banned)] = -np.inf
    avail = len(scores) - len(set(banned))
    k = min(k, avail)
    if k <= 0:
        return np.empty(0, dtype=np.int64)
    if k < len(scores):
        part = np.argpartition(-scores, k - 1)[:k]
        thr = scores[part].min()
        cand = np.flatnonzero(scores >= thr)
    else:
        cand = np.arange(len(scores))
    order = cand[np.lexsort((cand, -scores[cand]))]
    return order[:k]


def nearest_neighbors(model: EmbeddingModel, query, k: int = 10, exclude=()) -> list[tuple[str, float]]:
    """The k tokens most cosine-similar to ``query`` (a token or a vector).

    A token query never returns itself. Ties go to the lower vocab index.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    banned = {model.vocab.index[t] for t in exclude if t in model.vocab}
    if isinstance(query, str):
        qi = model.vocab[query]
        banned.add(qi)
        vec = model.matrix[qi]
    else:
        vec = np.asarray(query, dtype=np.float64)
        if vec.shape != (model.dim,):
            raise ValueError(f"query has shape {vec.shape}, model dim is {model.dim}")
    scores = _scan(model, vec)
    idx = _top_k(scores, k, sorted(banned))
    return [(model.vocab.words[i], float(scores[i])) for i in idx]


def _unit_rows(model: EmbeddingModel) -> np.ndarray:
    norms = np.where(model.norm_cache > 0, model.norm_cache, 1.0)
    return model.matrix / norms[:, None].astype(model.matrix.dtype)


def analogy_query(model: EmbeddingModel, a: str, b: str, c: str) -> str:
    """Answer a:b :: c:? with the additive offset rule on unit vectors."""
    missing = [t for t in (a, b, c) if t not in model.vocab]
    if missing:
        raise OOVError(missing)
    unit = _unit_rows(model)
    ia, ib, ic = (model.vocab.index[t] for t in (a, b, c))
    target = unit[ib].astype(np.float64) - unit[ia] + unit[ic]
    if not np.any(target):
        target = unit[ib].astype(np.float64)
    scores = unit @ target.astype(unit.dtype)
    idx = _top_k(scores, 1, sorted({ia, ib, ic}))
    if len(idx) == 0:
        raise ValueError("vocabulary has no candidate answers")
    return model.vocab.words[idx[0]]


# ---------------------------------------------------------------- analogy sets


class AnalogySet:
    """Named sections of (a, b, c, d) quadruples meaning a:b :: c:d."""

    def __init__(self, sections: Sequence[tuple[str, Sequence[Sequence[str]]]]):
        names = [name for name, _ in sections]
        if len(set(names)) != len(names):
            raise ValueError("section names must be unique")
        self.sections = []
        for name, quads in sections:
            checked = []
            for q in quads:
                q = tuple(q)
                if len(q) != 4 or not all(isinstance(t, str) and t for t in q):
                    raise ValueError(f"bad analogy quadruple {q!r} in section {name!r}")
                checked.append(q)
            self.sections.append((name, checked))

    def __len__(self):
        return sum(len(q) for _, q in self.sections)

    def questions(self):
        for name, quads in self.sections:
            for q in quads:
                yield name, q


def load_analogies(path, lowercase: bool = False) -> AnalogySet:
    sections: list[tuple[str, list]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith(":"):
                sections.append((line[1:].strip(), []))
                continue
            parts = line.split()
            if len(parts) != 4:
                raise EmbeddingFormatError(f"line {lineno}: expected 4 tokens")
            if lowercase:
                parts = [p.lower() for p in parts]
            if not sections:
                sections.append(("default", []))
            sections[-1][1].append(tuple(parts))
    return AnalogySet(sections)


@dataclass
class AnalogyReport:
    sections: dict[str, float]
    accuracy: float
    answered: int
    skipped: int
    correct: int

    @property
    def total(self) -> int:
        return self.answered + self.skipped

    def to_dict(self) -> dict:
        return {
            "sections": self.sections,
            "accuracy": self.accuracy,
            "answered": self.answered,
            "skipped": self.skipped,
            "correct": self.correct,
        }


def evaluate_analogies(model: EmbeddingModel, analogies: AnalogySet, batch_size: int = 512) -> AnalogyReport:
    """Accuracy of the additive offset rule over every answerable question.

    Questions touching an out-of-vocabulary token are skipped, not failed.
    """
    if len(analogies) == 0:
        raise ValueError("empty analogy set")
    unit = _unit_rows(model)
    index = model.vocab.index
    per_section: dict[str, list[int]] = {}
    rows, names = [], []
    skipped = 0
    for name, q in analogies.questions():
        per_section.setdefault(name, [0, 0])
        if any(t not in index for t in q):
            skipped += 1
            continue
        rows.append([index[t] for t in q])
        names.append(name)
    rows_arr = np.array(rows, dtype=np.int64).reshape(-1, 4)
    correct_flags = np.zeros(len(rows_arr), dtype=bool)
    for start in range(0, len(rows_arr), batch_size):
        chunk = rows_arr[start : start + batch_size]
        targets = unit[chunk[:, 1]].astype(np.float64) - unit[chunk[:, 0]] + unit[chunk[:, 2]]
        scores = (targets.astype(unit.dtype) @ unit.T).astype(np.float64)
        r = np.arange(len(chunk))
        for j in range(3):
            scores[r, chunk[:, j]] = -np.inf
        best = scores.max(axis=1)
        # lowest index among ties
        answer = np.argmax(scores >= best[:, None], axis=1)
        correct_flags[start : start + len(chunk)] = answer == chunk[:, 3]
    for name, ok in zip(names, correct_flags):
        per_section[name][0] += int(ok)
        per_section[name][1] += 1
    answered = len(rows_arr)
    correct = int(correct_flags.sum())
    return AnalogyReport(
        sections={k: (c / n if n else 0.0) for k, (c, n) in per_section.items()},
        accuracy=correct / answered if answered else 0.0,
        answered=answered,
        skipped=skipped,
        correct=correct,
    )
