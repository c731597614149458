"""Comparing how two embeddings place the same words on the same axes."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .axes import AxisCatalog, SemanticAxis, build_axis
from .embeddings import EmbeddingModel, OOVError, _scan, _top_k, nearest_neighbors
from .lexicon import score_word

__all__ = [
    "TopicExpansion",
    "TopicProjection",
    "AxisRanking",
    "expand_topic",
    "filter_topic_terms",
    "project_topic",
    "rank_axes",
]


@dataclass
class TopicExpansion:
    seed: str
    terms: list[str]
    target_count: int
    frequencies: dict[str, dict[str, int]] = field(default_factory=dict)


def expand_topic(model: EmbeddingModel, seed: str, target_count: int = 30, mode: str = "centroid") -> TopicExpansion:
    """Grow a topic from ``seed`` by repeatedly adding the word nearest the centroid.

    ``mode="centroid"`` averages every collected term; ``mode="pair"``
    averages only the two most recent ones.
    """
    if target_count < 2:
        raise ValueError("target_count must be >= 2")
    if mode not in ("centroid", "pair"):
        raise ValueError(f"unknown expansion mode {mode!r}")
    if seed not in model:
        raise OOVError(seed)
    if len(model) < 2:
        raise ValueError("vocabulary smaller than 2")
    first = nearest_neighbors(model, seed, 1)[0][0]
    terms = [seed, first]
    taken = {model.vocab.index[seed], model.vocab.index[first]}
    total = model.vector(seed) + model.vector(first)
    while len(terms) < target_count and len(taken) < len(model):
        if mode == "centroid":
            centre = total / len(terms)
        else:
            centre = (model.vector(terms[-1]) + model.vector(terms[-2])) / 2.0
        if not np.any(centre):
            break
        idx = _top_k(_scan(model, centre), 1, sorted(taken))
        if len(idx) == 0:
            break
        i = int(idx[0])
        word = model.vocab.words[i]
        terms.append(word)
        taken.add(i)
        total = total + model.vector(word)
    return TopicExpansion(seed, terms, target_count)


def filter_topic_terms(expansion, counts_a: Mapping[str, int], counts_b: Mapping[str, int], n: int = 100) -> list[str]:
    """Terms seen at least ``n`` times in both corpora."""
    terms = expansion.terms if isinstance(expansion, TopicExpansion) else list(expansion)
    kept = [t for t in terms if counts_a.get(t, 0) >= n and counts_b.get(t, 0) >= n]
    if isinstance(expansion, TopicExpansion):
        expansion.frequencies = {t: {"a": counts_a.get(t, 0), "b": counts_b.get(t, 0)} for t in terms}
    return kept


def _axis_in(model: EmbeddingModel, axis: SemanticAxis) -> SemanticAxis:
    return build_axis(model, axis.pos_poles, axis.neg_poles, axis.name)


@dataclass
class TopicProjection:
    axis_name: str
    rows: list[tuple[str, float, float]]
    oov: list[str] = field(default_factory=list)

    def to_tsv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter="\t", lineterminator="\n")
        w.writerow(["term", "score_a", "score_b", "diff"])
        for term, sa, diff in self.rows:
            w.writerow([term, repr(sa), repr(sa - diff), repr(diff)])
        return buf.getvalue()

    def plot_spec(self) -> dict:
        return {
            "kind": "scatter",
            "axis": self.axis_name,
            "x_label": f"score on {self.axis_name} (corpus A)",
            "y_label": "score A - score B",
            "points": [{"label": t, "x": sa, "y": d} for t, sa, d in self.rows],
            "oov": self.oov,
        }


def project_topic(
    model_a: EmbeddingModel,
    model_b: EmbeddingModel,
    terms: Sequence[str],
    axis_name: str | SemanticAxis,
    catalog: AxisCatalog | None = None,
) -> TopicProjection:
    """Per term: its score in A and the difference A minus B.

    The axis is rebuilt inside each model from the same pole words.
    """
    axis = axis_name if isinstance(axis_name, SemanticAxis) else catalog[axis_name]
    ax_a, ax_b = _axis_in(model_a, axis), _axis_in(model_b, axis)
    rows, oov = [], []
    for t in terms:
        if t not in model_a or t not in model_b:
            oov.append(t)
            continue
        sa = score_word(model_a, ax_a, t)
        sb = score_word(model_b, ax_b, t)
        rows.append((t, sa, sa - sb))
    return TopicProjection(axis.name, rows, oov)


@dataclass
class AxisRanking:
    word: str
    rows: list[tuple[str, float, float, float]]
    k: int
    skipped: list[str] = field(default_factory=list)
    no_contrast: bool = False
    mode: str = "abs"

    def to_tsv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter="\t", lineterminator="\n")
        w.writerow(["axis", "score_a", "score_b", "diff"])
        for name, sa, sb, d in self.rows:
            w.writerow([name, repr(sa), repr(sb), repr(d)])
        return buf.getvalue()

    def plot_spec(self) -> dict:
        return {
            "kind": "hbar",
            "word": self.word,
            "mode": self.mode,
            "no_contrast": self.no_contrast,
            "bars": [{"axis": n, "value": d, "score_a": sa, "score_b": sb} for n, sa, sb, d in self.rows],
            "skipped": self.skipped,
        }


_RANK_KEYS = {
    "abs": lambda r: -abs(r[3]),
    "positive": lambda r: -r[3],
    "negative": lambda r: r[3],
    "single": lambda r: -abs(r[1]),
}


def rank_axes(
    model_a: EmbeddingModel,
    model_b: EmbeddingModel,
    word: str,
    catalog: AxisCatalog,
    k: int = 20,
    mode: str = "abs",
) -> AxisRanking:
    """Top-k catalog axes on which ``word`` differs most between A and B.

    ``mode`` picks the ordering: ``abs`` (largest |diff|), ``positive`` /
    ``negative`` (signed diff), or ``single`` (largest |score| in A alone).
    Axes whose poles are missing from either model are skipped.
    """
    if mode not in _RANK_KEYS:
        raise ValueError(f"unknown ranking mode {mode!r}")
    missing = [m for m in (model_a, model_b) if word not in m]
    if missing:
        raise OOVError(word)
    rows, skipped = [], []
    for axis in catalog:
        try:
            ax_a, ax_b = _axis_in(model_a, axis), _axis_in(model_b, axis)
        except (OOVError, ValueError):
            skipped.append(axis.name)
            continue
        sa = score_word(model_a, ax_a, word)
        sb = score_word(model_b, ax_b, word)
        rows.append((axis.name, sa, sb, sa - sb))
    if not rows:
        raise ValueError("no usable axis in the catalog")
    key = _RANK_KEYS[mode]
    rows.sort(key=lambda r: (key(r), r[0]))
    no_contrast = all(r[3] == 0.0 for r in rows)
    return AxisRanking(word, rows[:k], k, skipped, no_contrast, mode)


def write_plot_json(spec: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec, fh, ensure_ascii=False, indent=2)
