import json

import numpy as np
import pytest
from scipy import stats
from hypothesis import given, settings
from hypothesis import strategies as st

from semaxis import (
    AnalogySet,
    FineTuneConfig,
    TrainConfig,
    build_axis,
    build_vocab,
    continue_training,
    evaluate_analogies,
    fine_tune,
    train,
)
from semaxis import _kernels
from semaxis.synthetic import relational_corpus, two_topic_corpus
from semaxis.trainer import (
    StopMonitor,
    _init_rows,
    _seed_state,
    drift,
    keep_probabilities,
    negative_distribution,
)

from oracles import cbow_epoch_replay


@pytest.fixture(scope="module")
def relational():
    sents, aset = relational_corpus()
    shuffled, _ = relational_corpus(shuffle_roles=True, seed=5)
    ref = train(sents, TrainConfig(dim=20, epochs=20, min_count=1, window=3, seed=1))
    return ref, sents, shuffled, aset


# ---------------------------------------------------------------- config and vocab


@pytest.mark.parametrize(
    "kw", [{"dim": 0}, {"window": 0}, {"epochs": 0}, {"negatives": 0}, {"min_count": 0}, {"lr_initial": 0.0}, {"lr_initial": 1.0}]
)
def test_train_config_validation(kw):
    with pytest.raises(ValueError):
        TrainConfig(**kw)


def test_train_config_defaults():
    c = TrainConfig()
    assert (c.dim, c.window, c.min_count, c.negatives, c.subsample_t, c.lr_initial, c.epochs) == (300, 5, 10, 5, 1e-3, 0.025, 100)
    f = FineTuneConfig()
    assert (f.alpha, f.beta, f.top_k, f.lr) == (0.3, 0.001, 1000, 0.005)


@pytest.mark.parametrize("kw", [{"alpha": 0}, {"alpha": 1}, {"beta": 0}, {"top_k": 0}, {"max_epochs": -1}])
def test_finetune_config_validation(kw):
    with pytest.raises(ValueError):
        FineTuneConfig(**kw)


def test_build_vocab_examples():
    v = build_vocab(["a a a b"], 2)
    assert list(v.words) == ["a"] and v.counts == {"a": 3}
    assert list(build_vocab(["a a a b"], 1).words) == ["a", "b"]
    v = build_vocab([" ".join(["rare"] * 9 + ["common"] * 10)], 10)
    assert "rare" not in v and "common" in v
    with pytest.raises(ValueError):
        build_vocab(["a b"], 2)


def test_build_vocab_order_ties_by_first_occurrence():
    v = build_vocab([["z", "y", "x", "y", "x", "w"]], 1)
    assert list(v.words) == ["y", "x", "z", "w"]


# ---------------------------------------------------------------- sampling


def test_negative_sampling_frequencies():
    # ten words, so every probability is large enough for a 1% relative check at 1e6 draws
    counts = np.array([900, 700, 520, 400, 310, 250, 190, 150, 120, 100])
    cum = negative_distribution(counts)
    p = counts**0.75 / np.sum(counts**0.75)
    draws = _kernels.draw_negatives(cum, 1_000_000, _seed_state(99))
    freq = np.bincount(draws, minlength=len(counts)) / 1e6
    assert np.max(np.abs(freq - p) / p) < 0.01


def test_negative_sampling_goodness_of_fit():
    rng = np.random.default_rng(4)
    counts = rng.integers(200, 5000, size=50)
    p = counts**0.75 / np.sum(counts**0.75)
    draws = _kernels.draw_negatives(negative_distribution(counts), 1_000_000, _seed_state(7))
    observed = np.bincount(draws, minlength=len(counts))
    assert stats.chisquare(observed, p * 1e6).pvalue > 1e-3


def test_negative_distribution_skips_zero_counts():
    cum = negative_distribution(np.array([0, 5, 0, 5]))
    draws = _kernels.draw_negatives(cum, 10000, _seed_state(1))
    assert set(np.unique(draws)) == {1, 3}


def test_keep_probabilities():
    counts = np.array([1000, 10, 1])
    assert np.all(keep_probabilities(counts, float("inf")) == 1.0)
    assert np.all(keep_probabilities(counts, 0) == 1.0)
    k = keep_probabilities(counts, 1e-3)
    f = counts / counts.sum()
    expected = np.minimum((np.sqrt(f / 1e-3) + 1) * 1e-3 / f, 1.0)
    np.testing.assert_allclose(k, expected, rtol=1e-12)
    assert k[0] < 1.0 and k[2] == 1.0


def test_subsampling_disabled_trains_every_token():
    sents, _, _ = two_topic_corpus(200, 10, 8, seed=1)
    m = train(sents, TrainConfig(dim=8, epochs=1, min_count=1, subsample_t=float("inf"), seed=2))
    counts = np.array([m.vocab.counts[w] for w in m.vocab.words])
    np.testing.assert_array_equal(m.meta["trained_counts"], counts)


def test_tiny_threshold_downsamples_most_frequent():
    sents = [["the"] * 20 + ["cat", "dog"] for _ in range(100)]
    m = train(sents, TrainConfig(dim=8, epochs=1, min_count=1, subsample_t=1e-5, seed=2))
    i = m.vocab.index["the"]
    assert m.meta["trained_counts"][i] < m.vocab.counts["the"]


# ---------------------------------------------------------------- training


def test_train_is_deterministic():
    sents, _, _ = two_topic_corpus(300, 10, 8, seed=0)
    cfg = TrainConfig(dim=10, epochs=2, min_count=1, seed=7)
    a, b = train(sents, cfg), train(sents, cfg)
    assert a.matrix.tobytes() == b.matrix.tobytes()
    assert a.meta["losses"] == b.meta["losses"]
    c = train(sents, TrainConfig(dim=10, epochs=2, min_count=1, seed=8))
    assert c.matrix.tobytes() != a.matrix.tobytes()


def test_train_metadata_and_shapes():
    sents, _, _ = two_topic_corpus(100, 10, 8, seed=0)
    seen = []
    m = train(sents, TrainConfig(dim=6, epochs=3, min_count=1), callback=lambda e, l: seen.append(e))
    assert m.dim == 6 and len(m) == 20
    assert m.meta["epochs"] == 3 and len(m.meta["losses"]) == 3
    assert seen == [1, 2, 3]
    assert m.context.shape == m.matrix.shape


def test_train_loss_matches_replay_oracle():
    sents, _, _ = two_topic_corpus(50, 20, 10, seed=3)
    cfg = TrainConfig(dim=25, epochs=1, min_count=1, seed=3)
    model = train(sents, cfg)
    vocab = build_vocab(sents, 1)
    counts = np.array([vocab.counts[w] for w in vocab.words])
    syn0 = _init_rows(len(vocab), cfg.dim, np.random.default_rng(cfg.seed))
    syn1 = np.zeros_like(syn0)
    ids = [[vocab.index[w] for w in s] for s in sents]
    assert len(ids) == 100
    loss = cbow_epoch_replay(
        syn0, syn1, ids, keep_probabilities(counts, cfg.subsample_t), negative_distribution(counts),
        cfg.window, cfg.negatives, cfg.lr_initial, sum(map(len, ids)), int(_seed_state(cfg.seed, 0, 0)[0]),
    )
    assert model.meta["losses"][0] == pytest.approx(loss, rel=1e-9)
    np.testing.assert_allclose(model.matrix, syn0, atol=1e-6)


def test_degenerate_corpus():
    with pytest.raises(ValueError, match="degenerate"):
        train([["a"], ["b"]], TrainConfig(dim=4, epochs=1, min_count=1))


def test_multi_worker_training_runs():
    sents, a, b = two_topic_corpus(2000, 10, 8, seed=0)
    m = train(sents, TrainConfig(dim=12, epochs=3, min_count=1, workers=3, seed=1))
    assert np.all(np.isfinite(m.matrix))
    assert m.meta["losses"][-1] < m.meta["losses"][0]


# ---------------------------------------------------------------- continued training


def test_continue_training_zero_lr_keeps_matrix(relational):
    ref, sents, _, _ = relational
    out, loss = continue_training(ref, sents, 0.0, config=TrainConfig(dim=20, min_count=1, window=3))
    np.testing.assert_array_equal(out.matrix, ref.matrix)
    assert np.isfinite(loss)


def test_continue_training_self_vs_foreign_corpus(relational):
    ref, sents, shuffled, aset = relational
    cfg = TrainConfig(dim=20, min_count=1, window=3, subsample_t=0)
    acc0 = evaluate_analogies(ref, aset).accuracy
    same, _ = continue_training(ref, sents, 0.025, config=cfg)
    other, _ = continue_training(ref, shuffled, 0.025, config=cfg)
    d_same = abs(evaluate_analogies(same, aset).accuracy - acc0)
    d_other = abs(evaluate_analogies(other, aset).accuracy - acc0)
    assert d_same < d_other


def test_continue_training_errors(relational):
    ref, _, _, _ = relational
    cfg = TrainConfig(dim=20, min_count=1)
    with pytest.raises(ValueError, match="empty effective corpus"):
        continue_training(ref, [["unseen", "tokens"]], 0.01, config=cfg, extend_vocab=False)
    with pytest.raises(ValueError, match="dimension"):
        continue_training(ref, [["e0_0", "e0_1"]], 0.01, config=TrainConfig(dim=5, min_count=1))


def test_continue_training_extends_vocab(relational):
    ref, _, _, _ = relational
    corpus = [["e0_0", "jargon", "e1_0", "jargon"]] * 3
    out, _ = continue_training(ref, corpus, 0.01, config=TrainConfig(dim=20, min_count=2))
    assert "jargon" in out and len(out) == len(ref) + 1
    assert list(out.vocab.words[: len(ref)]) == list(ref.vocab.words)
    kept, _ = continue_training(ref, corpus, 0.01, config=TrainConfig(dim=20, min_count=2), extend_vocab=False)
    assert "jargon" not in kept


def test_continue_training_is_deterministic(relational):
    ref, _, shuffled, _ = relational
    cfg = TrainConfig(dim=20, min_count=1, window=3)
    a, la = continue_training(ref, shuffled[:500], 0.01, config=cfg)
    b, lb = continue_training(ref, shuffled[:500], 0.01, config=cfg)
    assert a.matrix.tobytes() == b.matrix.tobytes() and la == lb


# ---------------------------------------------------------------- stop monitor


def test_monitor_accuracy_budget():
    accs = [0.60, 0.55, 0.28]
    mon = StopMonitor(0.3, 0.001, 100, accs[0])
    reasons = [mon.update(e, a, 1.0) for e, a in enumerate(accs[1:], 1)]
    assert reasons == [None, "accuracy_budget"]


def test_monitor_drift_converged():
    mon = StopMonitor(0.3, 0.001, 100, 0.6)
    reasons = [mon.update(e, 0.6, d) for e, d in enumerate([0.5, 0.01, 0.0005], 1)]
    assert reasons == [None, None, "drift_converged"]


def test_monitor_precedence_and_max_epochs():
    mon = StopMonitor(0.3, 0.001, 100, 0.6)
    assert mon.update(1, 0.2, 0.0) == "accuracy_budget"
    assert mon.history[-1] == {"epoch": 1, "accuracy_budget": True, "drift_converged": True}
    mon = StopMonitor(0.3, 0.001, 2, 0.6)
    assert [mon.update(e, 0.6, 1.0) for e in (1, 2)] == [None, "max_epochs"]


def test_monitor_budget_boundary_exact():
    # 0.6 - 0.3 is not exactly 0.3 in binary floating point
    mon = StopMonitor(0.3, 0.001, 10, 0.6)
    assert mon.update(1, 0.3, 1.0) == "accuracy_budget"


@given(st.dictionaries(st.text(min_size=1, max_size=4), st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=1, max_size=30), st.randoms())
def test_drift_is_order_invariant(pairs, rnd):
    prev = {w: a for w, (a, _) in pairs.items()}
    cur = {w: b for w, (_, b) in pairs.items()}
    keys = list(pairs)
    rnd.shuffle(keys)
    d = drift(prev, cur)
    assert d >= 0
    assert drift({k: prev[k] for k in keys}, {k: cur[k] for k in keys}) == pytest.approx(d, abs=1e-15)


# ---------------------------------------------------------------- fine-tuning


def _drift_axis(model):
    return build_axis(model, ["e0_1", "e1_1"], ["e0_0", "e1_0"], "group")


def test_fine_tune_zero_epochs_returns_reference(relational):
    ref, _, shuffled, aset = relational
    out, rep = fine_tune(ref, shuffled, FineTuneConfig(max_epochs=0, drift_axis=_drift_axis(ref)), None, aset)
    assert out is ref
    assert rep.stop_reason == "max_epochs" and rep.stop_epoch == 0 and rep.epochs == []


def test_fine_tune_empty_analogy_set(relational):
    ref, _, shuffled, _ = relational
    with pytest.raises(ValueError):
        fine_tune(ref, shuffled, FineTuneConfig(drift_axis=_drift_axis(ref)), None, AnalogySet([]))


def test_fine_tune_foreign_corpus_hits_accuracy_budget(relational):
    ref, _, shuffled, aset = relational
    cfg = FineTuneConfig(max_epochs=40, lr=0.025, top_k=30, drift_axis=_drift_axis(ref))
    out, rep = fine_tune(ref, shuffled, cfg, TrainConfig(dim=20, min_count=1, window=3, subsample_t=0), aset)
    assert rep.stop_reason == "accuracy_budget"
    assert rep.acc0 - rep.accuracies[-1] >= 0.3 - 1e-12
    assert all(rep.acc0 - a < 0.3 - 1e-12 for a in rep.accuracies[:-1])
    assert rep.stop_epoch == len(rep.epochs) <= cfg.max_epochs
    assert all(d >= 0 for d in rep.deltas)
    assert all(len(t) == rep.stop_epoch + 1 for t in rep.trajectories.values())
    assert len(rep.trajectories) == 30
    assert evaluate_analogies(out, aset).accuracy == rep.accuracies[-1]


def test_fine_tune_report_serialization(relational):
    ref, _, shuffled, aset = relational
    cfg = FineTuneConfig(max_epochs=3, lr=0.005, top_k=5, drift_axis=_drift_axis(ref))
    _, rep = fine_tune(ref, shuffled[:800], cfg, TrainConfig(dim=20, min_count=1, window=3), aset)
    data = json.loads(rep.to_json())
    assert data["stop_reason"] in ("accuracy_budget", "drift_converged", "max_epochs")
    rows = rep.to_tsv().splitlines()
    assert rows[0] == "epoch\tloss\tacc\tdelta"
    assert len(rows) == len(rep.epochs) + 2
    box = rep.box_table().splitlines()
    assert box[0] == "epoch\tword\tabs_change" and len(box) == 1 + 5 * len(rep.epochs)


def test_fine_tune_default_drift_axis_needs_sentiment_words(relational):
    ref, _, shuffled, aset = relational
    with pytest.raises(KeyError):
        fine_tune(ref, shuffled, FineTuneConfig(max_epochs=1), None, aset)
