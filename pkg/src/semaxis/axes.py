"""Semantic axes: antonym ingestion and filtering, pole expansion, axis vectors."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .embeddings import EmbeddingModel, OOVError, nearest_neighbors

__all__ = [
    "STANDARD_POLES",
    "TWITTER_POLES",
    "AntonymPair",
    "AntonymPairs",
    "SemanticAxis",
    "AxisCatalog",
    "ingest_antonyms",
    "load_synonyms",
    "load_lexicon_words",
    "filter_pairs",
    "expand_poles",
    "expand_axis",
    "build_axis",
    "build_catalog",
    "catalog_diversity",
    "save_catalog",
    "load_catalog",
    "default_sentiment_axis",
]

# Hand-picked sentiment seed words (positive, negative) for general English and Twitter.
STANDARD_POLES = (
    ("good", "lovely", "excellent", "fortunate", "pleasant", "delightful", "perfect", "loved", "love", "happy"),
    ("bad", "horrible", "poor", "unfortunate", "unpleasant", "disgusting", "evil", "hated", "hate", "unhappy"),
)
TWITTER_POLES = (
    ("love", "loved", "loves", "awesome", "nice", "amazing", "best", "fantastic", "correct", "happy"),
    ("hate", "hated", "hates", "terrible", "nasty", "awful", "worst", "horrible", "wrong", "sad"),
)

KEPT = "kept"
DROPPED = "dropped"
DROP_REASONS = ("non_english", "multi_word", "synonym_duplicate", "crowd_rejected", "redundant_axis", "oov")


@dataclass(frozen=True)
class AntonymPair:
    pos: str
    neg: str
    crowd_ok: bool | None = None
    status: str = KEPT
    reason: str | None = None

    def __post_init__(self):
        if self.pos == self.neg:
            raise ValueError(f"antonym pair with identical poles: {self.pos!r}")
        if (self.status == DROPPED) != (self.reason is not None):
            raise ValueError("dropped pairs carry exactly one reason")

    @property
    def kept(self) -> bool:
        return self.status == KEPT

    @property
    def name(self) -> str:
        return f"{self.neg}→{self.pos}"

    def drop(self, reason: str) -> "AntonymPair":
        assert reason in DROP_REASONS
        return replace(self, status=DROPPED, reason=reason)


class AntonymPairs(list):
    """A list of pairs that also carries the synonym table used for dedup."""

    def __init__(self, pairs=(), synonyms: dict[str, set[str]] | None = None):
        super().__init__(pairs)
        self.synonyms = synonyms or {}

    @property
    def kept(self) -> list[AntonymPair]:
        return [p for p in self if p.kept]


def _rows(path) -> Iterable[tuple[int, list[str]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line.split("\t")


def load_synonyms(path) -> dict[str, set[str]]:
    table: dict[str, set[str]] = {}
    for lineno, cols in _rows(path):
        if len(cols) != 2 or not all(c.strip() for c in cols):
            raise ValueError(f"{path}:{lineno}: synonym rows need two columns")
        a, b = (c.strip() for c in cols)
        table.setdefault(a, set()).add(b)
        table.setdefault(b, set()).add(a)
    return table


def load_lexicon_words(path) -> set[str]:
    with open(path, encoding="utf-8") as fh:
        return {ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")}


def ingest_antonyms(edges_file, synonyms_file=None) -> AntonymPairs:
    """Read antonym rows ``pos<TAB>neg[<TAB>crowd_ok]``; no filtering yet."""
    seen = set()
    pairs = []
    for lineno, cols in _rows(edges_file):
        if len(cols) not in (2, 3):
            raise ValueError(f"{edges_file}:{lineno}: expected 2 or 3 columns, got {len(cols)}")
        pos, neg = cols[0].strip(), cols[1].strip()
        if not pos or not neg:
            raise ValueError(f"{edges_file}:{lineno}: empty pole")
        crowd = None
        if len(cols) == 3 and cols[2].strip():
            flag = cols[2].strip()
            if flag not in ("0", "1"):
                raise ValueError(f"{edges_file}:{lineno}: crowd_ok must be 0 or 1")
            crowd = flag == "1"
        if (pos, neg) in seen:
            continue
        seen.add((pos, neg))
        pairs.append(AntonymPair(pos, neg, crowd))
    if not pairs:
        raise ValueError(f"{edges_file}: no antonym rows")
    synonyms = load_synonyms(synonyms_file) if synonyms_file else {}
    return AntonymPairs(pairs, synonyms)


def _is_multi_word(token: str) -> bool:
    return "_" in token or any(c.isspace() for c in token)


def _unit(v: np.ndarray) -> np.ndarray | None:
    n = np.linalg.norm(v)
    return v / n if n > 0 else None


def filter_pairs(
    pairs: Sequence[AntonymPair],
    model: EmbeddingModel,
    english_lexicon: set[str] | None,
    sim_threshold: float = 0.4,
    synonyms: dict[str, set[str]] | None = None,
    mode: str = "axis",
) -> AntonymPairs:
    """Label every pair kept or dropped, in a fixed order of filters.

    Order: non-English, multi-word, synonym duplicates, crowd rejections,
    redundant axes, then out-of-vocabulary poles. Earlier pairs win in the
    duplicate and redundancy checks. ``mode="pole_word"`` compares the
    non-shared pole words of pairs sharing a pole instead of whole axes.
    """
    if not 0 < sim_threshold < 1:
        raise ValueError("sim_threshold must be in (0, 1)")
    if mode not in ("axis", "pole_word"):
        raise ValueError(f"unknown redundancy mode {mode!r}")
    if synonyms is None:
        synonyms = getattr(pairs, "synonyms", {}) or {}
    out = list(pairs)

    def alive():
        return [i for i, p in enumerate(out) if p.kept]

    if english_lexicon is not None:
        for i in alive():
            p = out[i]
            if p.pos not in english_lexicon or p.neg not in english_lexicon:
                out[i] = p.drop("non_english")
    for i in alive():
        p = out[i]
        if _is_multi_word(p.pos) or _is_multi_word(p.neg):
            out[i] = p.drop("multi_word")

    partners: dict[str, list[str]] = {}
    for i in alive():
        p = out[i]
        dup = False
        for shared, other in ((p.pos, p.neg), (p.neg, p.pos)):
            for prev_other in partners.get(shared, ()):
                if prev_other == other or prev_other in synonyms.get(other, ()):
                    dup = True
                    break
            if dup:
                break
        if dup:
            out[i] = p.drop("synonym_duplicate")
        else:
            partners.setdefault(p.pos, []).append(p.neg)
            partners.setdefault(p.neg, []).append(p.pos)

    for i in alive():
        if out[i].crowd_ok is False:
            out[i] = out[i].drop("crowd_rejected")

    if mode == "axis":
        kept_dirs: list[np.ndarray] = []
        for i in alive():
            p = out[i]
            if p.pos not in model or p.neg not in model:
                continue
            d = _unit(model.vector(p.pos) - model.vector(p.neg))
            if d is None:
                out[i] = p.drop("redundant_axis")
                continue
            if kept_dirs and np.max(np.abs(np.array(kept_dirs) @ d)) > sim_threshold:
                out[i] = p.drop("redundant_axis")
            else:
                kept_dirs.append(d)
    else:
        kept_partners: dict[str, list[str]] = {}
        for i in alive():
            p = out[i]
            if p.pos not in model or p.neg not in model:
                continue
            redundant = False
            for shared, other in ((p.pos, p.neg), (p.neg, p.pos)):
                for prev_other in kept_partners.get(shared, ()):
                    u, v = _unit(model.vector(other)), _unit(model.vector(prev_other))
                    if u is not None and v is not None and abs(float(u @ v)) > sim_threshold:
                        redundant = True
            if redundant:
                out[i] = p.drop("redundant_axis")
            else:
                kept_partners.setdefault(p.pos, []).append(p.neg)
                kept_partners.setdefault(p.neg, []).append(p.pos)

    for i in alive():
        p = out[i]
        if p.pos not in model or p.neg not in model:
            out[i] = p.drop("oov")
    return AntonymPairs(out, synonyms)


# ---------------------------------------------------------------- axis vectors


@dataclass(frozen=True, eq=False)
class SemanticAxis:
    """An axis pointing from the negative pole mean to the positive pole mean."""

    name: str
    pos_poles: tuple[str, ...]
    neg_poles: tuple[str, ...]
    vector: np.ndarray = field(repr=False)
    model_id: str = ""

    def flipped(self) -> "SemanticAxis":
        neg, pos = self.name.split("→", 1) if "→" in self.name else (self.name, "")
        name = f"{pos}→{neg}" if pos else f"-{self.name}"
        return SemanticAxis(name, self.neg_poles, self.pos_poles, -self.vector, self.model_id)


def _ordered_unique(tokens) -> tuple[str, ...]:
    return tuple(dict.fromkeys(tokens))


def build_axis(model: EmbeddingModel, s_plus, s_minus, name: str | None = None, normalize: bool = False) -> SemanticAxis:
    """Mean of the positive pole vectors minus mean of the negative ones.

    ``normalize`` unit-normalizes each pole vector before averaging.
    """
    s_plus, s_minus = _ordered_unique(s_plus), _ordered_unique(s_minus)
    if not s_plus or not s_minus:
        raise ValueError("both pole sets must be non-empty")
    overlap = set(s_plus) & set(s_minus)
    if overlap:
        raise ValueError(f"pole sets overlap: {sorted(overlap)}")
    missing = [t for t in s_plus + s_minus if t not in model]
    if missing:
        raise OOVError(missing)
    plus, minus = model.vectors(s_plus), model.vectors(s_minus)
    if normalize:
        plus = plus / np.linalg.norm(plus, axis=1, keepdims=True)
        minus = minus / np.linalg.norm(minus, axis=1, keepdims=True)
    vec = plus.mean(axis=0) - minus.mean(axis=0)
    if not np.any(vec):
        raise ValueError("axis vector is zero")
    vec.flags.writeable = False
    if name is None:
        name = f"{s_minus[0]}→{s_plus[0]}"
    return SemanticAxis(name, s_plus, s_minus, vec, model.model_id)


def expand_poles(model: EmbeddingModel, pole_word: str, l: int, exclude=()) -> tuple[str, ...]:
    """The pole word followed by its ``l`` nearest neighbours."""
    if l < 0:
        raise ValueError("l must be >= 0")
    if pole_word not in model:
        raise OOVError(pole_word)
    if l == 0:
        return (pole_word,)
    return (pole_word, *(w for w, _ in nearest_neighbors(model, pole_word, l, exclude=exclude)))


def expand_axis(
    model: EmbeddingModel,
    pos_word: str,
    neg_word: str,
    l: int,
    name: str | None = None,
    expand_model: EmbeddingModel | None = None,
    normalize: bool = False,
) -> SemanticAxis:
    """Axis from two initial pole words, each grown by its l nearest neighbours.

    Neighbours are searched in ``expand_model`` (default: ``model``). The
    opposite initial word is never taken as a neighbour, and a neighbour
    claimed by both poles is removed from both.
    """
    src = expand_model or model
    plus = expand_poles(src, pos_word, l, exclude={neg_word})
    minus = expand_poles(src, neg_word, l, exclude={pos_word})
    clash = set(plus) & set(minus)
    plus = tuple(w for w in plus if w not in clash and w in model)
    minus = tuple(w for w in minus if w not in clash and w in model)
    return build_axis(model, plus, minus, name or f"{neg_word}→{pos_word}", normalize)


def default_sentiment_axis(model: EmbeddingModel, poles=STANDARD_POLES) -> SemanticAxis:
    plus = [w for w in poles[0] if w in model]
    minus = [w for w in poles[1] if w in model and w not in plus]
    if not plus or not minus:
        raise OOVError([w for w in poles[0] + poles[1] if w not in model])
    return build_axis(model, plus, minus, "sentiment")


# ---------------------------------------------------------------- catalog


def catalog_diversity(axes) -> tuple[float, float]:
    """(mean |cos|, population std of cos) over every unordered pair of axes."""
    vecs = [a.vector if isinstance(a, SemanticAxis) else np.asarray(a, dtype=np.float64) for a in axes]
    if len(vecs) < 2:
        raise ValueError("need at least two axes")
    m = np.array(vecs, dtype=np.float64)
    m = m / np.linalg.norm(m, axis=1, keepdims=True)
    iu = np.triu_indices(len(m), k=1)
    cos = np.clip((m @ m.T)[iu], -1.0, 1.0)
    return float(np.mean(np.abs(cos))), float(np.std(cos))


class AxisCatalog:
    def __init__(self, axes: Iterable[SemanticAxis] = ()):
        self._axes: dict[str, SemanticAxis] = {}
        self.diversity: tuple[float, float] | None = None
        for a in axes:
            self._insert(a)
        self._refresh()

    def _insert(self, axis: SemanticAxis):
        if axis.name in self._axes:
            raise ValueError(f"duplicate axis name {axis.name!r}")
        self._axes[axis.name] = axis

    def _refresh(self):
        self.diversity = catalog_diversity(self.axes) if len(self._axes) >= 2 else None

    def add(self, axis: SemanticAxis):
        self._insert(axis)
        self._refresh()

    def remove(self, name: str):
        del self._axes[name]
        self._refresh()

    @property
    def axes(self) -> list[SemanticAxis]:
        return list(self._axes.values())

    @property
    def names(self) -> list[str]:
        return list(self._axes)

    def __getitem__(self, name: str) -> SemanticAxis:
        return self._axes[name]

    def __contains__(self, name):
        return name in self._axes

    def __len__(self):
        return len(self._axes)

    def __iter__(self):
        return iter(self._axes.values())


def build_catalog(
    pairs: Sequence[AntonymPair],
    model: EmbeddingModel,
    l: int = 0,
    expand_model: EmbeddingModel | None = None,
    normalize: bool = False,
) -> AxisCatalog:
    """One axis per kept pair, optionally with expanded poles."""
    axes = []
    for p in pairs:
        if not p.kept:
            continue
        if l > 0:
            axes.append(expand_axis(model, p.pos, p.neg, l, p.name, expand_model, normalize))
        else:
            axes.append(build_axis(model, [p.pos], [p.neg], p.name, normalize))
    return AxisCatalog(axes)


def save_catalog(catalog: AxisCatalog, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a in catalog:
            rec = {"name": a.name, "pos_poles": list(a.pos_poles), "neg_poles": list(a.neg_poles), "model_id": a.model_id}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def read_catalog_records(path) -> list[dict]:
    recs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            rec = json.loads(line)
            if not {"name", "pos_poles", "neg_poles"} <= rec.keys():
                raise ValueError(f"{path}:{lineno}: catalog record missing fields")
            recs.append(rec)
    return recs


def load_catalog(path, model: EmbeddingModel, skip_oov: bool = False) -> AxisCatalog:
    """Rebuild every axis of a JSON-lines catalog inside ``model``."""
    axes = []
    for rec in read_catalog_records(path):
        try:
            axes.append(build_axis(model, rec["pos_poles"], rec["neg_poles"], rec["name"]))
        except OOVError:
            if not skip_oov:
                raise
    return AxisCatalog(axes)


def pairwise_abs_cos(catalog: AxisCatalog) -> np.ndarray:
    m = np.array([a.vector for a in catalog], dtype=np.float64)
    m = m / np.linalg.norm(m, axis=1, keepdims=True)
    return np.abs(m @ m.T)


def drop_summary(pairs: Sequence[AntonymPair]) -> dict[str, int]:
    counts = {r: 0 for r in DROP_REASONS}
    counts["kept"] = 0
    for p in pairs:
        counts[p.reason or "kept"] += 1
    return counts


def write_pair_report(pairs: Sequence[AntonymPair], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["pos", "neg", "crowd_ok", "status", "reason"])
        for p in pairs:
            crowd = "" if p.crowd_ok is None else int(p.crowd_ok)
            w.writerow([p.pos, p.neg, crowd, p.status, p.reason or ""])
