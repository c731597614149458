"""Lexicon evaluation against gold sentiment data, and pole sensitivity sweeps."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .axes import build_axis, expand_axis
from .embeddings import EmbeddingModel
from .lexicon import (
    LABELS,
    NEGATIVE,
    NEUTRAL,
    POSITIVE,
    LabelDistribution,
    ScoredLexicon,
    class_mass_normalize,
    induce_lexicon,
)

__all__ = [
    "GoldLexicon",
    "EvalReport",
    "SweepResult",
    "load_gold",
    "auc",
    "ternary_f1",
    "kendall_tau",
    "evaluate",
    "pole_sensitivity_sweep",
]


class GoldLexicon:
    """Gold labels and/or continuous valence scores for a set of tokens."""

    def __init__(self, labels: Mapping[str, str] | None = None, continuous: Mapping[str, float] | None = None):
        labels = dict(labels or {})
        for tok, lab in labels.items():
            if lab not in LABELS:
                raise ValueError(f"unknown gold label {lab!r} for {tok!r}")
        continuous = {k: float(v) for k, v in (continuous or {}).items()}
        if not all(math.isfinite(v) for v in continuous.values()):
            raise ValueError("continuous gold values must be finite")
        self.ternary = labels
        self.binary = {t: lab for t, lab in labels.items() if lab != NEUTRAL}
        self.continuous = continuous

    @property
    def tokens(self) -> set[str]:
        return set(self.ternary) | set(self.continuous)

    def merged(self, other: "GoldLexicon") -> "GoldLexicon":
        labels = dict(self.ternary)
        for t, lab in other.ternary.items():
            if labels.get(t, lab) != lab:
                raise ValueError(f"conflicting gold labels for {t!r}")
            labels[t] = lab
        return GoldLexicon(labels, {**self.continuous, **other.continuous})


def _parse_gold(path) -> GoldLexicon:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\r\n") for ln in fh]
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: first line must declare '#labels' or '#continuous'")
    head = lines[0][1:].split()
    kind = head[0] if head else ""
    opts = dict(h.split("=", 1) for h in head[1:] if "=" in h)
    rows = []
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise ValueError(f"{path}:{lineno}: expected token<TAB>value")
        rows.append((cols[0].strip(), cols[1].strip()))
    if kind == "labels":
        return GoldLexicon(labels=dict(rows))
    if kind == "continuous":
        cont = {t: float(v) for t, v in rows}
        labels = None
        if "neg_below" in opts or "pos_above" in opts:
            lo = float(opts.get("neg_below", "-inf"))
            hi = float(opts.get("pos_above", "inf"))
            labels = {t: NEGATIVE if v < lo else POSITIVE if v > hi else NEUTRAL for t, v in cont.items()}
        return GoldLexicon(labels, cont)
    raise ValueError(f"{path}: unknown gold file kind {kind!r}")


def load_gold(*paths) -> GoldLexicon:
    """Read and merge gold files (``#labels`` or ``#continuous`` headers)."""
    gold = GoldLexicon()
    for p in paths:
        gold = gold.merged(_parse_gold(p))
    return gold


# ---------------------------------------------------------------- metrics


def _auc_arrays(pos: np.ndarray, neg: np.ndarray) -> float:
    pos, neg = np.asarray(pos, dtype=np.float64), np.asarray(neg, dtype=np.float64)
    n_pos, n_neg = len(pos), len(neg)
    if n_pos == 0 or n_neg == 0:
        raise ValueError("auc needs at least one positive and one negative token")
    ranks = stats.rankdata(np.concatenate([pos, neg]))
    u = ranks[:n_pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def auc(scores: Mapping[str, float], gold_binary: Mapping[str, str]) -> float:
    """Probability that a random positive outscores a random negative (ties 1/2)."""
    pos = [scores[t] for t, lab in gold_binary.items() if lab == POSITIVE and t in scores]
    neg = [scores[t] for t, lab in gold_binary.items() if lab == NEGATIVE and t in scores]
    return _auc_arrays(np.array(pos), np.array(neg))


def ternary_f1(labels: Mapping[str, str], gold_ternary: Mapping[str, str]) -> float:
    """Macro F1 over the classes present in gold or prediction."""
    toks = [t for t in labels if t in gold_ternary]
    if not toks:
        raise ValueError("no token has both a prediction and a gold label")
    f1s = []
    for cls in LABELS:
        tp = sum(1 for t in toks if labels[t] == cls and gold_ternary[t] == cls)
        n_pred = sum(1 for t in toks if labels[t] == cls)
        n_gold = sum(1 for t in toks if gold_ternary[t] == cls)
        if n_pred == 0 and n_gold == 0:
            continue
        f1s.append(2.0 * tp / (n_pred + n_gold))
    return float(np.mean(f1s))


def kendall_tau(scores: Mapping[str, float], gold_continuous: Mapping[str, float]) -> float:
    """Tie-corrected Kendall tau (tau-b) over tokens present in both."""
    toks = [t for t in gold_continuous if t in scores]
    if len(toks) < 2:
        raise ValueError("kendall tau needs at least two covered tokens")
    x = np.array([scores[t] for t in toks], dtype=np.float64)
    y = np.array([gold_continuous[t] for t in toks], dtype=np.float64)
    tau = stats.kendalltau(x, y, variant="b").statistic
    if not math.isfinite(tau):
        raise ValueError("tau-b undefined: one side is entirely tied")
    return float(tau)


@dataclass
class EvalReport:
    auc: float | None
    ternary_f1: float | None
    tau: float | None
    n_auc: int = 0
    n_ternary: int = 0
    n_tau: int = 0
    coverage: float = 0.0
    n_gold: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    def to_table(self) -> str:
        def fmt(v, scale):
            return "n/a" if v is None else f"{v * scale:.1f}" if scale == 100 else f"{v:.2f}"

        return (
            f"{'AUC':>8} {'TernF1':>8} {'Tau':>6}  coverage\n"
            f"{fmt(self.auc, 100):>8} {fmt(self.ternary_f1, 100):>8} {fmt(self.tau, 1):>6}  "
            f"{self.coverage:.3f} ({self.n_gold} gold)\n"
        )


def evaluate(lexicon: ScoredLexicon, gold: GoldLexicon) -> EvalReport:
    """AUC, ternary F1 and tau of ``lexicon`` over the gold tokens it covers.

    Ternary labels come from class-mass normalization with the gold label
    distribution of the covered tokens.
    """
    if not lexicon.entries or not gold.tokens:
        raise ValueError("lexicon and gold must be non-empty")
    scores = lexicon.entries
    rep = EvalReport(None, None, None, n_gold=len(gold.tokens))
    rep.coverage = sum(1 for t in gold.tokens if t in scores) / len(gold.tokens)
    covered_bin = {t: lab for t, lab in gold.binary.items() if t in scores}
    if covered_bin:
        rep.auc = auc(scores, covered_bin)
        rep.n_auc = len(covered_bin)
    covered_tern = {t: lab for t, lab in gold.ternary.items() if t in scores}
    if covered_tern:
        sub = ScoredLexicon(lexicon.axis_name, {t: scores[t] for t in covered_tern}, model_id=lexicon.model_id)
        labelled = class_mass_normalize(sub, LabelDistribution.from_labels(covered_tern.values()))
        rep.ternary_f1 = ternary_f1(labelled.labels, covered_tern)
        rep.n_ternary = len(covered_tern)
    covered_cont = [t for t in gold.continuous if t in scores]
    if len(covered_cont) >= 2:
        rep.tau = kendall_tau(scores, gold.continuous)
        rep.n_tau = len(covered_cont)
    return rep


# ---------------------------------------------------------------- sensitivity


@dataclass
class SweepResult:
    rows: list[dict] = field(default_factory=list)

    def summary(self) -> dict[str, dict]:
        out = {}
        for mode in dict.fromkeys(r["mode"] for r in self.rows):
            rows = [r for r in self.rows if r["mode"] == mode]
            vals = np.array([r["auc"] for r in rows])
            best = rows[int(np.argmax(vals))]
            worst = rows[int(np.argmin(vals))]
            out[mode] = {
                "mean": float(vals.mean()),
                "min": float(vals.min()),
                "max": float(vals.max()),
                "best": (best["pos"], best["neg"]),
                "worst": (worst["pos"], worst["neg"]),
            }
        return out

    def to_tsv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter="\t", lineterminator="\n")
        w.writerow(["pos", "neg", "mode", "auc"])
        for r in self.rows:
            w.writerow([r["pos"], r["neg"], r["mode"], repr(r["auc"])])
        for mode, s in self.summary().items():
            for stat in ("mean", "min", "max"):
                w.writerow(["*", "*", f"{mode}:{stat}", repr(s[stat])])
        return buf.getvalue()


def pole_sensitivity_sweep(
    model: EmbeddingModel,
    pos_candidates: Sequence[str],
    neg_candidates: Sequence[str],
    l: int,
    gold: GoldLexicon,
    modes: Iterable[str] = ("two_pole", "expanded"),
) -> SweepResult:
    """AUC of every (positive, negative) candidate pair, with and without expansion."""
    gold_words = [t for t in gold.binary if t in model]
    result = SweepResult()
    for mode in modes:
        if mode not in ("two_pole", "expanded"):
            raise ValueError(f"unknown sweep mode {mode!r}")
        label = "two_pole" if mode == "two_pole" else f"expanded({l})"
        for p in pos_candidates:
            for n in neg_candidates:
                if mode == "two_pole":
                    axis = build_axis(model, [p], [n])
                else:
                    axis = expand_axis(model, p, n, l)
                lex = induce_lexicon(model, axis, gold_words)
                result.rows.append({"pos": p, "neg": n, "mode": label, "auc": auc(lex.entries, gold.binary)})
    return result
