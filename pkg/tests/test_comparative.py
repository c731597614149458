import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semaxis import AxisCatalog, OOVError, build_axis, expand_topic, filter_topic_terms, project_topic, rank_axes
from semaxis.comparative import TopicExpansion, write_plot_json
from semaxis.synthetic import cluster_model, divergent_axis_fixture, make_model

from oracles import topic_iteration


# ---------------------------------------------------------------- topic expansion


def test_expand_topic_base_step():
    m = cluster_model()
    exp = expand_topic(m, "seed", 2)
    assert exp.terms == ["seed", "c1"]


def test_expand_topic_recovers_cluster():
    m = cluster_model()
    exp = expand_topic(m, "seed", 4)
    assert set(exp.terms) == {"seed", "c1", "c2", "c3"}
    assert exp.terms == topic_iteration(m.vocab.words, m.matrix, "seed", 4)


def test_expand_topic_errors_and_caps():
    m = cluster_model()
    with pytest.raises(OOVError):
        expand_topic(m, "nope", 4)
    with pytest.raises(ValueError):
        expand_topic(m, "seed", 1)
    with pytest.raises(ValueError):
        expand_topic(make_model(["solo"], [[1.0]]), "solo", 2)
    assert len(expand_topic(m, "seed", 30).terms) == 6


def test_expand_topic_pair_mode():
    m = cluster_model()
    exp = expand_topic(m, "seed", 4, mode="pair")
    assert exp.terms[:2] == ["seed", "c1"] and len(set(exp.terms)) == 4
    with pytest.raises(ValueError):
        expand_topic(m, "seed", 4, mode="spiral")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(3, 25))
def test_expand_topic_matches_literal_iteration(seed, n):
    rng = np.random.default_rng(seed)
    words = [f"w{i}" for i in range(n)]
    vecs = rng.standard_normal((n, 4))
    m = make_model(words, vecs)
    k = int(rng.integers(2, n + 1))
    exp = expand_topic(m, "w0", k)
    assert exp.terms == topic_iteration(words, vecs, "w0", k)
    assert exp.terms[0] == "w0" and len(set(exp.terms)) == len(exp.terms) <= k


# ---------------------------------------------------------------- frequency filter


def test_filter_topic_terms_examples():
    exp = TopicExpansion("gun", ["gun", "guns", "rifle"], 3)
    a = {"gun": 150, "guns": 150, "rifle": 150}
    b = {"gun": 150, "guns": 50}
    assert filter_topic_terms(exp, a, b, 100) == ["gun"]
    assert filter_topic_terms(exp, a, b, 0) == ["gun", "guns", "rifle"]
    assert exp.frequencies["guns"] == {"a": 150, "b": 50}


@given(st.lists(st.tuples(st.integers(0, 300), st.integers(0, 300)), max_size=20), st.integers(0, 300), st.integers(0, 300))
def test_filter_topic_terms_monotone(counts, n1, n2):
    terms = [f"t{i}" for i in range(len(counts))]
    a = {t: c[0] for t, c in zip(terms, counts)}
    b = {t: c[1] for t, c in zip(terms, counts)}
    lo, hi = sorted((n1, n2))
    assert set(filter_topic_terms(terms, a, b, hi)) <= set(filter_topic_terms(terms, a, b, lo))


# ---------------------------------------------------------------- projection


def test_project_self_comparison_is_zero():
    a, _, cat, _, name = divergent_axis_fixture()
    proj = project_topic(a, a, ["target", "hi0", "lo2"], name, cat)
    assert [d for _, _, d in proj.rows] == [0.0, 0.0, 0.0]


def test_project_swap_negates_diffs():
    a, b, cat, _, name = divergent_axis_fixture()
    terms = list(a.vocab.words)
    ab = project_topic(a, b, terms, name, cat)
    ba = project_topic(b, a, terms, name, cat)
    for (t1, _, d1), (t2, _, d2) in zip(ab.rows, ba.rows):
        assert t1 == t2 and d1 == -d2


def test_project_reflected_term():
    e = np.eye(3)
    words = ["hi", "lo", "t", "u"]
    va = [e[0], -e[0], 0.6 * e[0] + 0.8 * e[1], 0.3 * e[0] + e[2]]
    vb = list(va)
    vb[2] = -0.6 * e[0] + 0.8 * e[1]  # reflect the axis component of t
    a, b = make_model(words, va), make_model(words, vb)
    ax = build_axis(a, ["hi"], ["lo"], "lo→hi")
    proj = project_topic(a, b, ["t", "u"], ax)
    (t, sa, d), (u, _, du) = proj.rows
    assert d == pytest.approx(2 * sa, abs=1e-12) and du == 0.0


def test_project_reports_oov_terms_and_pole_errors():
    a, b, cat, _, name = divergent_axis_fixture()
    proj = project_topic(a, b, ["target", "ghost"], name, cat)
    assert [r[0] for r in proj.rows] == ["target"] and proj.oov == ["ghost"]
    c = make_model(["target", "x"], np.eye(2, 6))
    with pytest.raises(OOVError):
        project_topic(a, c, ["target"], name, cat)


def test_projection_outputs(tmp_path):
    a, b, cat, _, name = divergent_axis_fixture()
    proj = project_topic(a, b, ["target", "hi1"], name, cat)
    rows = proj.to_tsv().splitlines()
    assert rows[0] == "term\tscore_a\tscore_b\tdiff" and len(rows) == 3
    spec = proj.plot_spec()
    assert spec["kind"] == "scatter" and spec["points"][0]["label"] == "target"
    write_plot_json(spec, tmp_path / "p.json")
    assert json.loads((tmp_path / "p.json").read_text())["axis"] == name


# ---------------------------------------------------------------- axis ranking


def test_rank_axes_divergent_first():
    a, b, cat, target, name = divergent_axis_fixture()
    r = rank_axes(a, b, target, cat, k=20)
    assert r.rows[0][0] == name
    assert len(r.rows) == 3 and not r.no_contrast
    sa, sb, d = r.rows[0][1:]
    assert d == sa - sb


def test_rank_axes_no_contrast():
    a, _, cat, target, _ = divergent_axis_fixture()
    r = rank_axes(a, a, target, cat)
    assert r.no_contrast
    assert [row[0] for row in r.rows] == sorted(cat.names)
    assert all(row[3] == 0.0 for row in r.rows)


def test_rank_axes_cap_and_skips():
    a, b, cat, target, name = divergent_axis_fixture()
    assert len(rank_axes(a, b, target, cat, k=1).rows) == 1
    extra = AxisCatalog(list(cat) + [build_axis(a, ["hi0"], ["hi2"], "hi2→hi0")])
    b_missing = make_model([w for w in b.vocab.words if w != "hi2"], [b.vector(w) for w in b.vocab.words if w != "hi2"])
    r = rank_axes(a, b_missing, target, extra)
    assert sorted(r.skipped) == ["hi2→hi0", "lo2→hi2"]
    with pytest.raises(OOVError):
        rank_axes(a, b, "ghost", cat)
    with pytest.raises(ValueError):
        rank_axes(a, make_model(["target"], [np.ones(6)]), target, cat)


def test_rank_axes_modes():
    a, b, cat, target, name = divergent_axis_fixture()
    pos = rank_axes(a, b, target, cat, mode="positive")
    neg = rank_axes(a, b, target, cat, mode="negative")
    single = rank_axes(a, b, target, cat, mode="single")
    assert [r[3] for r in pos.rows] == sorted((r[3] for r in pos.rows), reverse=True)
    assert [r[3] for r in neg.rows] == sorted(r[3] for r in neg.rows)
    assert [abs(r[1]) for r in single.rows] == sorted((abs(r[1]) for r in single.rows), reverse=True)
    with pytest.raises(ValueError):
        rank_axes(a, b, target, cat, mode="median")


def test_rank_axes_pole_swap_keeps_position():
    a, b, cat, target, name = divergent_axis_fixture()
    flipped = AxisCatalog(ax.flipped() if ax.name == name else ax for ax in cat)
    r1 = rank_axes(a, b, target, cat)
    r2 = rank_axes(a, b, target, flipped)
    assert r2.rows[0][0] == "hi1→lo1"
    assert r2.rows[0][1:] == pytest.approx(tuple(-x for x in r1.rows[0][1:]), abs=1e-15)


def test_ranking_outputs():
    a, b, cat, target, _ = divergent_axis_fixture()
    r = rank_axes(a, b, target, cat)
    assert r.to_tsv().splitlines()[0] == "axis\tscore_a\tscore_b\tdiff"
    spec = r.plot_spec()
    assert spec["kind"] == "hbar" and len(spec["bars"]) == 3
