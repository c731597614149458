"""Projecting words onto an axis and turning scores into labels."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .axes import SemanticAxis
from .embeddings import EmbeddingModel, OOVError, cosine

__all__ = [
    "POSITIVE",
    "NEUTRAL",
    "NEGATIVE",
    "ScoredLexicon",
    "LabelDistribution",
    "score_word",
    "score_words",
    "induce_lexicon",
    "class_mass_counts",
    "class_mass_normalize",
]

POSITIVE, NEUTRAL, NEGATIVE = "positive", "neutral", "negative"
LABELS = (POSITIVE, NEUTRAL, NEGATIVE)


def _check_dim(model: EmbeddingModel, axis: SemanticAxis):
    if axis.vector.shape != (model.dim,):
        raise ValueError(f"axis has dimension {axis.vector.shape[0]}, model has {model.dim}")


def score_word(model: EmbeddingModel, axis: SemanticAxis, word: str) -> float:
    """Cosine between the word vector and the axis vector."""
    _check_dim(model, axis)
    return cosine(model.vector(word), axis.vector)


def score_words(model: EmbeddingModel, axis: SemanticAxis, words: Sequence[str]) -> np.ndarray:
    _check_dim(model, axis)
    missing = [w for w in words if w not in model]
    if missing:
        raise OOVError(missing)
    idx = np.fromiter((model.vocab.index[w] for w in words), dtype=np.int64, count=len(words))
    norms = model.norm_cache[idx]
    if np.any(norms == 0):
        raise ValueError("cosine of a zero-norm vector")
    a = np.asarray(axis.vector, dtype=np.float64)
    dots = model.matrix[idx].astype(np.float64) @ a
    return np.clip(dots / (norms * np.linalg.norm(a)), -1.0, 1.0)


@dataclass
class ScoredLexicon:
    axis_name: str
    entries: dict[str, float]
    labels: dict[str, str] | None = None
    model_id: str = ""
    oov: list[str] = field(default_factory=list)

    def __post_init__(self):
        for w, s in self.entries.items():
            if not (math.isfinite(s) and -1.0 <= s <= 1.0):
                raise ValueError(f"score for {w!r} outside [-1, 1]: {s}")
        if self.labels is not None and set(self.labels) != set(self.entries):
            raise ValueError("labels must cover exactly the scored tokens")

    def __len__(self):
        return len(self.entries)

    @property
    def coverage(self) -> float:
        n = len(self.entries) + len(self.oov)
        return len(self.entries) / n if n else 0.0

    def ranked(self) -> list[tuple[str, float]]:
        """Entries by descending score, ties by ascending token."""
        return sorted(self.entries.items(), key=lambda kv: (-kv[1], kv[0]))

    def to_tsv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter="\t", lineterminator="\n")
        header = ["token", "score"] + (["label"] if self.labels else [])
        w.writerow(header)
        for tok, s in self.ranked():
            row = [tok, repr(s)]
            if self.labels:
                row.append(self.labels[tok])
            w.writerow(row)
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "axis": self.axis_name,
                "model_id": self.model_id,
                "coverage": self.coverage,
                "oov": self.oov,
                "entries": [
                    {"token": t, "score": s, **({"label": self.labels[t]} if self.labels else {})}
                    for t, s in self.ranked()
                ],
            },
            ensure_ascii=False,
            indent=2,
        )


def induce_lexicon(model: EmbeddingModel, axis: SemanticAxis, words: Iterable[str] | str = "all") -> ScoredLexicon:
    """Score every requested word; out-of-vocabulary requests go to ``oov``."""
    if isinstance(words, str) and words == "all":
        requested = list(model.vocab.words)
    else:
        requested = list(dict.fromkeys(words))
    found = [w for w in requested if w in model]
    oov = [w for w in requested if w not in model]
    if not found:
        raise ValueError("no requested word is in the vocabulary")
    scores = score_words(model, axis, found)
    return ScoredLexicon(axis.name, dict(zip(found, scores.tolist())), model_id=model.model_id, oov=oov)


@dataclass(frozen=True)
class LabelDistribution:
    p_pos: float
    p_neu: float
    p_neg: float

    def __post_init__(self):
        ps = (self.p_pos, self.p_neu, self.p_neg)
        if any(not (0.0 <= p <= 1.0) for p in ps):
            raise ValueError("label fractions must lie in [0, 1]")
        if abs(sum(ps) - 1.0) > 1e-9:
            raise ValueError(f"label fractions sum to {sum(ps)}, not 1")

    @classmethod
    def from_labels(cls, labels: Iterable[str]) -> "LabelDistribution":
        labels = list(labels)
        if not labels:
            raise ValueError("no labels")
        n = len(labels)
        c = {k: 0 for k in LABELS}
        for lab in labels:
            c[lab] += 1
        return cls(c[POSITIVE] / n, c[NEUTRAL] / n, 1.0 - c[POSITIVE] / n - c[NEUTRAL] / n)

    def as_tuple(self) -> tuple[float, float, float]:
        return self.p_pos, self.p_neu, self.p_neg


def class_mass_counts(n: int, dist: LabelDistribution) -> tuple[int, int, int]:
    """Integer (pos, neu, neg) counts summing to n, by largest remainder.

    Remainder ties (equal to 1e-9) go to positive, then neutral, then negative.
    """
    quotas = [p * n for p in dist.as_tuple()]
    counts = [math.floor(q + 1e-9) for q in quotas]
    rest = n - sum(counts)
    order = sorted(range(3), key=lambda i: (-round(quotas[i] - counts[i], 9), i))
    for i in order[: max(rest, 0)]:
        counts[i] += 1
    for i in reversed(order[rest:] if rest < 0 else []):
        counts[i] -= 1
    return counts[0], counts[1], counts[2]


def class_mass_normalize(lexicon: ScoredLexicon, dist: LabelDistribution) -> ScoredLexicon:
    """Label the top words positive and the bottom words negative so the
    label proportions match ``dist``."""
    n = len(lexicon.entries)
    if n < 1:
        raise ValueError("empty lexicon")
    n_pos, n_neu, n_neg = class_mass_counts(n, dist)
    labels = {}
    for rank, (tok, _) in enumerate(lexicon.ranked()):
        if rank < n_pos:
            labels[tok] = POSITIVE
        elif rank < n_pos + n_neu:
            labels[tok] = NEUTRAL
        else:
            labels[tok] = NEGATIVE
    return ScoredLexicon(lexicon.axis_name, dict(lexicon.entries), labels, lexicon.model_id, list(lexicon.oov))
