import json

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from semaxis import (
    LabelDistribution,
    OOVError,
    ScoredLexicon,
    build_axis,
    class_mass_normalize,
    induce_lexicon,
    score_word,
)
from semaxis.axes import SemanticAxis
from semaxis.lexicon import NEGATIVE, NEUTRAL, POSITIVE, class_mass_counts, score_words
from semaxis.synthetic import make_model

from oracles import class_mass_enumerate


def _axis(vec, name="axis"):
    return SemanticAxis(name, ("p",), ("q",), np.asarray(vec, dtype=np.float64))


def test_score_word_examples():
    m = make_model(["w", "o"], [[1.0, 1.0], [0.0, 3.0]])
    assert score_word(m, _axis([1.0, 0.0]), "w") == pytest.approx(0.70710678, abs=1e-8)
    assert score_word(m, _axis([1.0, 0.0]), "o") == 0.0


def test_pole_word_scores_positive():
    m = make_model(["p", "q"], [[2.0, 1.0], [0.5, 1.5]])
    vp, vq = m.vector("p"), m.vector("q")
    assert vp @ (vp - vq) > 0
    ax = build_axis(m, ["p"], ["q"])
    assert score_word(m, ax, "p") > 0
    # brute force: cosine written out
    expected = vp @ (vp - vq) / (np.linalg.norm(vp) * np.linalg.norm(vp - vq))
    assert score_word(m, ax, "p") == pytest.approx(expected, abs=1e-12)


def test_score_word_errors():
    m = make_model(["w", "z"], [[1.0, 1.0], [0.0, 0.0]])
    with pytest.raises(OOVError):
        score_word(m, _axis([1.0, 0.0]), "nope")
    with pytest.raises(ValueError):
        score_word(m, _axis([1.0, 0.0]), "z")
    with pytest.raises(ValueError):
        score_word(m, _axis([1.0, 0.0, 0.0]), "w")


def test_induce_lexicon_examples(rng):
    words = list("abcde")
    m = make_model(words, rng.standard_normal((5, 3)))
    ax = build_axis(m, ["a"], ["b"])
    lex = induce_lexicon(m, ax, ["c", "d", "e"])
    assert len(lex) == 3
    for w in "cde":
        assert lex.entries[w] == pytest.approx(score_word(m, ax, w), abs=1e-12)
    lex = induce_lexicon(m, ax, ["a", "z"])
    assert list(lex.entries) == ["a"] and lex.oov == ["z"]
    assert lex.coverage == 0.5
    assert len(induce_lexicon(m, ax, "all")) == 5
    with pytest.raises(ValueError):
        induce_lexicon(m, ax, ["zz"])


def test_lexicon_invariants():
    with pytest.raises(ValueError):
        ScoredLexicon("x", {"a": 1.5})
    with pytest.raises(ValueError):
        ScoredLexicon("x", {"a": 0.5}, labels={"b": POSITIVE})


def test_lexicon_serialization():
    lex = ScoredLexicon("bad→good", {"a": 0.1, "b": 0.9, "c": 0.1}, model_id="m", oov=["z"])
    rows = lex.to_tsv().splitlines()
    assert rows == ["token\tscore", "b\t0.9", "a\t0.1", "c\t0.1"]
    data = json.loads(lex.to_json())
    assert data["axis"] == "bad→good" and data["model_id"] == "m" and data["coverage"] == 0.75
    labelled = class_mass_normalize(lex, LabelDistribution(1 / 3, 1 / 3, 1 / 3))
    assert labelled.to_tsv().splitlines()[1] == "b\t0.9\tpositive"


# ---------------------------------------------------------------- class-mass normalization


def test_class_mass_example():
    lex = ScoredLexicon("x", {"a": 0.9, "b": 0.5, "c": 0.1, "d": -0.3})
    out = class_mass_normalize(lex, LabelDistribution(0.5, 0.25, 0.25))
    assert out.labels == {"a": POSITIVE, "b": POSITIVE, "c": NEUTRAL, "d": NEGATIVE}
    all_pos = class_mass_normalize(lex, LabelDistribution(1, 0, 0))
    assert set(all_pos.labels.values()) == {POSITIVE}


def test_class_mass_counts_example():
    assert class_mass_counts(5, LabelDistribution(0.5, 0.3, 0.2)) == (3, 1, 1)
    assert class_mass_enumerate(5, (0.5, 0.3, 0.2)) == (3, 1, 1)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 40), st.lists(st.integers(0, 20), min_size=3, max_size=3))
def test_class_mass_counts_match_enumeration(n, weights):
    assume(sum(weights) > 0)
    p = [w / sum(weights) for w in weights]
    p[2] = 1.0 - p[0] - p[1]
    assume(p[2] >= 0)
    dist = LabelDistribution(*p)
    counts = class_mass_counts(n, dist)
    assert sum(counts) == n
    assert counts == class_mass_enumerate(n, dist.as_tuple())
    assert all(abs(c - q * n) <= 1 for c, q in zip(counts, dist.as_tuple()))


def test_label_distribution_validation():
    with pytest.raises(ValueError):
        LabelDistribution(0.5, 0.5, 0.5)
    with pytest.raises(ValueError):
        LabelDistribution(1.2, -0.1, -0.1)
    d = LabelDistribution.from_labels([POSITIVE, NEGATIVE, NEGATIVE, NEUTRAL])
    assert d.as_tuple() == (0.25, 0.25, 0.5)


def test_ties_broken_by_token():
    lex = ScoredLexicon("x", {"b": 0.5, "a": 0.5, "c": 0.5})
    out = class_mass_normalize(lex, LabelDistribution(1 / 3, 1 / 3, 1 / 3))
    assert out.labels == {"a": POSITIVE, "b": NEUTRAL, "c": NEGATIVE}


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31))
def test_mirrored_distribution_swaps_labels(seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(3, 30)), int(rng.integers(2, 6))
    words = [f"w{i}" for i in range(n)]
    m = make_model(words, rng.standard_normal((n, d)))
    ax = build_axis(m, ["w0"], ["w1"])
    lex = induce_lexicon(m, ax)
    flipped = induce_lexicon(m, ax.flipped())
    for w in words:
        assert flipped.entries[w] == -lex.entries[w]
    assume(len(set(lex.entries.values())) == n)
    p = rng.dirichlet([1, 1, 1])
    p[2] = 1 - p[0] - p[1]
    assume(p[2] >= 0)
    dist, mirror = LabelDistribution(*p), LabelDistribution(p[2], p[1], p[0])
    a = class_mass_normalize(lex, dist).labels
    b = class_mass_normalize(flipped, mirror).labels
    assume(class_mass_counts(n, dist)[::-1] == class_mass_counts(n, mirror))
    swap = {POSITIVE: NEGATIVE, NEGATIVE: POSITIVE, NEUTRAL: NEUTRAL}
    assert b == {w: swap[lab] for w, lab in a.items()}


@given(st.integers(0, 2**31), st.floats(1e-3, 1e3))
def test_scores_invariant_under_axis_rescaling(seed, lam):
    rng = np.random.default_rng(seed)
    m = make_model(list("abcdef"), rng.standard_normal((6, 4)))
    v = rng.standard_normal(4)
    s1 = score_words(m, _axis(v), list("abcdef"))
    s2 = score_words(m, _axis(lam * v), list("abcdef"))
    np.testing.assert_allclose(s1, s2, atol=1e-12)
