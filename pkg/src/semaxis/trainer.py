"""CBOW word2vec with negative sampling, trained from scratch or continued.

The compiled loop lives in ``_kernels``; this module owns vocabulary
building, corpus encoding, threading and the fine-tuning monitor.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .embeddings import AnalogySet, EmbeddingModel, Vocabulary, evaluate_analogies

logger = logging.getLogger(__name__)

__all__ = [
    "TrainConfig",
    "FineTuneConfig",
    "FineTuneReport",
    "StopMonitor",
    "build_vocab",
    "train",
    "continue_training",
    "fine_tune",
    "negative_distribution",
    "keep_probabilities",
]

STOP_ACCURACY = "accuracy_budget"
STOP_DRIFT = "drift_converged"
STOP_MAX = "max_epochs"


@dataclass
class TrainConfig:
    dim: int = 300
    window: int = 5
    min_count: int = 10
    negatives: int = 5
    subsample_t: float = 1e-3
    lr_initial: float = 0.025
    epochs: int = 100
    seed: int = 1
    workers: int = 1

    def __post_init__(self):
        for name in ("dim", "window", "epochs", "negatives", "min_count", "workers"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0 < self.lr_initial < 1:
            raise ValueError("lr_initial must be in (0, 1)")


def _as_sentences(corpus) -> list[list[str]]:
    out = []
    for doc in corpus:
        out.append(doc.split() if isinstance(doc, str) else list(doc))
    return out


def build_vocab(corpus, min_count: int = 10) -> Vocabulary:
    """Tokens seen at least ``min_count`` times, most frequent first.

    Equal counts keep first-occurrence order.
    """
    counts: Counter = Counter()
    for sent in _as_sentences(corpus):
        counts.update(sent)
    kept = [(w, c) for w, c in counts.items() if c >= min_count]
    if not kept:
        raise ValueError("empty corpus after min_count filtering")
    kept.sort(key=lambda wc: -wc[1])
    return Vocabulary([w for w, _ in kept], counts=dict(kept))


def negative_distribution(counts: np.ndarray, power: float = 0.75) -> np.ndarray:
    """Cumulative noise distribution over vocab indices (unigram ** power)."""
    weights = np.asarray(counts, dtype=np.float64) ** power
    weights[np.asarray(counts) <= 0] = 0.0
    total = weights.sum()
    if total <= 0:
        raise ValueError("noise distribution has no mass")
    cum = np.cumsum(weights / total)
    cum[-1] = 1.0
    return cum


def keep_probabilities(counts: np.ndarray, t: float) -> np.ndarray:
    """Per-word probability of keeping an occurrence under frequent-word downsampling."""
    counts = np.asarray(counts, dtype=np.float64)
    if t is None or t <= 0 or math.isinf(t):
        return np.ones_like(counts)
    thresh = t * counts.sum()
    with np.errstate(divide="ignore", invalid="ignore"):
        p = (np.sqrt(counts / thresh) + 1.0) * thresh / counts
    p[counts <= 0] = 1.0
    return np.minimum(p, 1.0)


def _seed_state(*key: int) -> np.ndarray:
    state = np.random.SeedSequence([int(k) for k in key]).generate_state(1, np.uint64)
    if state[0] == 0:
        state[0] = 0x9E3779B97F4A7C15
    return state


class _Encoded:
    """A corpus as one flat id array plus sentence offsets."""

    def __init__(self, sentences: list[list[str]], index: dict[str, int]):
        ids, offsets = [], [0]
        for sent in sentences:
            ids.extend(index[w] for w in sent if w in index)
            offsets.append(len(ids))
        self.ids = np.asarray(ids, dtype=np.int64)
        self.offsets = np.asarray(offsets, dtype=np.int64)

    @property
    def n_tokens(self) -> int:
        return len(self.ids)

    @property
    def n_sentences(self) -> int:
        return len(self.offsets) - 1

    def has_pairs(self) -> bool:
        return bool(np.any(np.diff(self.offsets) >= 2))

    def chunks(self, n: int) -> list[tuple[int, int]]:
        if n <= 1 or self.n_sentences <= 1:
            return [(0, self.n_sentences)]
        bounds = np.searchsorted(self.offsets, np.linspace(0, self.n_tokens, n + 1)[1:-1])
        edges = [0, *sorted(set(int(b) for b in bounds)), self.n_sentences]
        return [(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


class _Session:
    """Mutable training state; owned by one train/continue call at a time."""

    def __init__(self, syn0, syn1, encoded: _Encoded, counts, cfg: TrainConfig):
        self.syn0 = syn0
        self.syn1 = syn1
        self.enc = encoded
        self.cfg = cfg
        self.neg_cum = negative_distribution(counts)
        self.keep = keep_probabilities(counts, cfg.subsample_t)
        self.trained_counts = np.zeros(len(counts), dtype=np.int64)

    def run_epoch(self, epoch: int, lr: float, decay: bool, total_epochs: int, seed_key=()) -> float:
        cfg = self.cfg
        chunks = self.enc.chunks(cfg.workers)
        n_tok = self.enc.n_tokens
        total = float(total_epochs * n_tok)
        progress0 = float(epoch * n_tok)
        scale = float(len(chunks))

        def work(i, lo, hi):
            state = _seed_state(cfg.seed, *seed_key, epoch, i)
            return _kernels.cbow_epoch(
                self.syn0, self.syn1, self.enc.ids, self.enc.offsets, lo, hi,
                self.keep, self.neg_cum, cfg.window, cfg.negatives, lr, decay,
                progress0, scale, total, state, self.trained_counts,
            )

        if len(chunks) == 1:
            results = [work(0, *chunks[0])]
        else:
            with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
                futures = [pool.submit(work, i, lo, hi) for i, (lo, hi) in enumerate(chunks)]
                results = [f.result() for f in futures]
        loss = sum(r[0] for r in results)
        n = sum(r[1] for r in results)
        return loss / n if n else 0.0


def _init_rows(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    return ((rng.random((n, dim)) - 0.5) / dim).astype(np.float32)


def train(corpus, config: TrainConfig | None = None, callback=None) -> EmbeddingModel:
    """Train CBOW vectors on ``corpus`` (token lists or whitespace strings).

    The learning rate decays linearly over all epochs down to 1e-4 of its
    start value. ``callback(epoch, loss)`` runs after each epoch.
    """
    cfg = config or TrainConfig()
    sentences = _as_sentences(corpus)
    vocab = build_vocab(sentences, cfg.min_count)
    enc = _Encoded(sentences, vocab.index)
    if not enc.has_pairs():
        raise ValueError("degenerate corpus: no training pairs")
    counts = np.array([vocab.counts[w] for w in vocab.words], dtype=np.int64)
    rng = np.random.default_rng(cfg.seed)
    syn0 = _init_rows(len(vocab), cfg.dim, rng)
    syn1 = np.zeros_like(syn0)
    session = _Session(syn0, syn1, enc, counts, cfg)
    losses = []
    for epoch in range(cfg.epochs):
        loss = session.run_epoch(epoch, cfg.lr_initial, True, cfg.epochs)
        losses.append(loss)
        logger.info("epoch %d loss %.6f", epoch + 1, loss)
        if callback is not None:
            callback(epoch + 1, loss)
    meta = {
        "source": "cbow",
        "epochs": cfg.epochs,
        "losses": losses,
        "config": asdict(cfg),
        "trained_counts": session.trained_counts,
    }
    return EmbeddingModel(vocab, syn0, meta=meta, context=syn1)


class _Continuation:
    """Prepared state for continued training of an existing model."""

    def __init__(self, model: EmbeddingModel, corpus, cfg: TrainConfig, extend_vocab: bool = True):
        sentences = _as_sentences(corpus)
        counts = Counter()
        for s in sentences:
            counts.update(s)
        words = list(model.vocab.words)
        new_words = []
        if extend_vocab:
            ranked = sorted(
                (w for w, c in counts.items() if c >= cfg.min_count and w not in model.vocab),
                key=lambda w: -counts[w],
            )
            new_words = ranked
        all_words = words + new_words
        vocab = Vocabulary(all_words, counts={w: counts.get(w, 0) for w in all_words})
        enc = _Encoded(sentences, vocab.index)
        if enc.n_tokens == 0:
            raise ValueError("empty effective corpus")
        if model.context is not None and model.context.shape[1] != model.dim:
            raise ValueError("dimension mismatch between word and context vectors")
        rng = np.random.default_rng(_seed_state(cfg.seed, 7919)[0])
        syn0 = np.vstack([model.matrix.astype(np.float32), _init_rows(len(new_words), model.dim, rng)])
        if model.context is not None:
            base_ctx = model.context.astype(np.float32)
        else:
            base_ctx = np.zeros((len(words), model.dim), dtype=np.float32)
        syn1 = np.vstack([base_ctx, np.zeros((len(new_words), model.dim), dtype=np.float32)])
        cvec = np.array([vocab.counts[w] for w in all_words], dtype=np.int64)
        self.vocab = vocab
        self.new_words = new_words
        self.counts = counts
        self.session = _Session(syn0, syn1, enc, cvec, cfg)
        self.base_meta = dict(model.meta)
        self.epochs_done = 0

    def step(self, lr: float) -> float:
        loss = self.session.run_epoch(self.epochs_done, lr, False, self.epochs_done + 1, seed_key=(104729,))
        self.epochs_done += 1
        return loss

    def snapshot(self, losses=()) -> EmbeddingModel:
        meta = dict(self.base_meta)
        meta["epochs"] = int(meta.get("epochs", 0)) + self.epochs_done
        meta["finetune_losses"] = list(losses)
        return EmbeddingModel(self.vocab, self.session.syn0.copy(), meta=meta, context=self.session.syn1.copy())


def continue_training(
    model: EmbeddingModel,
    corpus,
    lr: float,
    epochs: int = 1,
    config: TrainConfig | None = None,
    extend_vocab: bool = True,
) -> tuple[EmbeddingModel, float]:
    """Run ``epochs`` CBOW passes over ``corpus`` at a fixed learning rate.

    Returns the updated model and the mean loss of the last epoch. With
    ``extend_vocab`` target words meeting min_count are appended to the
    vocabulary with fresh random vectors.
    """
    cfg = config or TrainConfig(dim=model.dim)
    if cfg.dim != model.dim:
        raise ValueError(f"dimension mismatch: config {cfg.dim} vs model {model.dim}")
    if lr < 0:
        raise ValueError("lr must be >= 0")
    cont = _Continuation(model, corpus, cfg, extend_vocab)
    losses = [cont.step(lr) for _ in range(epochs)]
    return cont.snapshot(losses), (losses[-1] if losses else float("nan"))


# ---------------------------------------------------------------- fine-tuning


@dataclass
class FineTuneConfig:
    alpha: float = 0.3
    beta: float = 0.001
    top_k: int = 1000
    max_epochs: int = 100
    lr: float = 0.005
    drift_axis: object | None = None
    extend_vocab: bool = True

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must be in (0, 1)")
        if self.beta <= 0:
            raise ValueError("beta must be > 0")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be >= 0")


class StopMonitor:
    """Decides when fine-tuning stops.

    Stops at the first epoch where accuracy has fallen by at least ``alpha``
    from the starting accuracy, or where drift falls below ``beta``, or when
    ``max_epochs`` is reached. The accuracy budget wins if both fire at once.
    """

    def __init__(self, alpha: float, beta: float, max_epochs: int, acc0: float):
        self.alpha = alpha
        self.beta = beta
        self.max_epochs = max_epochs
        self.acc0 = acc0
        self.history: list[dict] = []

    def update(self, epoch: int, acc: float, delta: float) -> str | None:
        budget_hit = (self.acc0 - acc) >= self.alpha - 1e-12
        drift_hit = delta < self.beta
        self.history.append({"epoch": epoch, "accuracy_budget": budget_hit, "drift_converged": drift_hit})
        if budget_hit:
            return STOP_ACCURACY
        if drift_hit:
            return STOP_DRIFT
        if epoch >= self.max_epochs:
            return STOP_MAX
        return None


@dataclass
class FineTuneReport:
    acc0: float
    epochs: list[dict] = field(default_factory=list)
    trajectories: dict[str, list[float]] = field(default_factory=dict)
    stop_epoch: int = 0
    stop_reason: str = STOP_MAX
    triggers: list[dict] = field(default_factory=list)

    @property
    def accuracies(self) -> list[float]:
        return [e["accuracy"] for e in self.epochs]

    @property
    def deltas(self) -> list[float]:
        return [e["delta"] for e in self.epochs]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def to_tsv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter="\t", lineterminator="\n")
        w.writerow(["epoch", "loss", "acc", "delta"])
        w.writerow([0, "", repr(self.acc0), ""])
        for e in self.epochs:
            w.writerow([e["epoch"], repr(e["loss"]), repr(e["accuracy"]), repr(e["delta"])])
        return buf.getvalue()

    def box_table(self) -> str:
        """Per-epoch absolute score changes of every tracked word (long format)."""
        buf = io.StringIO()
        w = csv.writer(buf, delimiter="\t", lineterminator="\n")
        w.writerow(["epoch", "word", "abs_change"])
        for word, traj in self.trajectories.items():
            for e in range(1, len(traj)):
                w.writerow([e, word, repr(abs(traj[e] - traj[e - 1]))])
        return buf.getvalue()


def drift(prev: dict[str, float], cur: dict[str, float]) -> float:
    """Mean absolute score change over the tracked words."""
    if not prev:
        return 0.0
    return float(np.mean([abs(cur[w] - prev[w]) for w in prev]))


def _drift_scores(model: EmbeddingModel, axis, words: Sequence[str]) -> dict[str, float]:
    from .axes import build_axis
    from .lexicon import score_words

    ax = build_axis(model, axis.pos_poles, axis.neg_poles, axis.name)
    return dict(zip(words, score_words(model, ax, words)))


def fine_tune(
    reference: EmbeddingModel,
    target_corpus,
    cfg: FineTuneConfig,
    train_cfg: TrainConfig | None,
    analogy_set: AnalogySet,
) -> tuple[EmbeddingModel, FineTuneReport]:
    """Adapt ``reference`` to ``target_corpus`` one epoch at a time.

    After each epoch the analogy accuracy and the drift of the top-k target
    words on the drift axis are measured; see :class:`StopMonitor`.
    """
    from .axes import default_sentiment_axis

    train_cfg = train_cfg or TrainConfig(dim=reference.dim)
    if train_cfg.dim != reference.dim:
        train_cfg = TrainConfig(**{**asdict(train_cfg), "dim": reference.dim})
    if len(analogy_set) == 0:
        raise ValueError("empty analogy set")
    axis = cfg.drift_axis if cfg.drift_axis is not None else default_sentiment_axis(reference)
    acc0 = evaluate_analogies(reference, analogy_set).accuracy
    report = FineTuneReport(acc0=acc0)
    if cfg.max_epochs == 0:
        return reference, report

    cont = _Continuation(reference, target_corpus, train_cfg, cfg.extend_vocab)
    ranked = sorted((w for w in cont.counts if w in cont.vocab), key=lambda w: -cont.counts[w])
    tracked = ranked[: cfg.top_k]
    current = cont.snapshot()
    prev = _drift_scores(current, axis, tracked)
    report.trajectories = {w: [s] for w, s in prev.items()}
    monitor = StopMonitor(cfg.alpha, cfg.beta, cfg.max_epochs, acc0)
    losses = []
    for epoch in range(1, cfg.max_epochs + 1):
        losses.append(cont.step(cfg.lr))
        current = cont.snapshot(losses)
        acc = evaluate_analogies(current, analogy_set).accuracy
        scores = _drift_scores(current, axis, tracked)
        delta = drift(prev, scores)
        for w, s in scores.items():
            report.trajectories[w].append(s)
        prev = scores
        report.epochs.append({"epoch": epoch, "loss": losses[-1], "accuracy": acc, "delta": delta})
        logger.info("finetune epoch %d loss %.6f acc %.4f delta %.6f", epoch, losses[-1], acc, delta)
        reason = monitor.update(epoch, acc, delta)
        if reason is not None:
            report.stop_epoch = epoch
            report.stop_reason = reason
            break
    report.triggers = monitor.history
    return current, report
