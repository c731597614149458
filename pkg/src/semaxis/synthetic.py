"""Small deterministic models and corpora with known structure.

Used by the test-suite and the notebooks; every builder is a pure function
of its arguments.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .axes import AxisCatalog, build_axis
from .embeddings import AnalogySet, EmbeddingModel, Vocabulary
from .evaluation import GoldLexicon
from .lexicon import NEGATIVE, POSITIVE

# cosine between the advisedly->accidentally and purposely->accidentally axes
REDUNDANT_AXIS_COS = 0.5148


def make_model(words, vectors, source="synthetic") -> EmbeddingModel:
    return EmbeddingModel(Vocabulary(list(words)), np.asarray(vectors, dtype=np.float64), meta={"source": source})


def exact_offset_model(n_pairs: int = 10):
    """2*n_pairs words x_i, y_i where every y_i is x_i shifted by one shared offset.

    Returns the model and an analogy set of n_pairs quadruples
    (x_i, y_i, x_j, y_j) with j = i + 1 (mod n_pairs).
    """
    d = n_pairs + 1
    eye = np.eye(d)
    words, vecs = [], []
    for i in range(n_pairs):
        words.append(f"x{i}")
        vecs.append(eye[i])
    for i in range(n_pairs):
        words.append(f"y{i}")
        vecs.append(eye[i] + eye[n_pairs])
    quads = [(f"x{i}", f"y{i}", f"x{(i + 1) % n_pairs}", f"y{(i + 1) % n_pairs}") for i in range(n_pairs)]
    return make_model(words, vecs, "exact-offset"), AnalogySet([("offset", quads)])


def two_topic_corpus(n_per_topic: int = 10000, words_per_topic: int = 20, length: int = 10, seed: int = 0):
    """Sentences drawn from one of two disjoint vocabularies, never mixed."""
    rng = np.random.default_rng(seed)
    topic_a = [f"a{i}" for i in range(words_per_topic)]
    topic_b = [f"b{i}" for i in range(words_per_topic)]
    sents = []
    for vocab in (topic_a, topic_b):
        draws = rng.integers(0, words_per_topic, size=(n_per_topic, length))
        sents.extend([[vocab[j] for j in row] for row in draws])
    order = rng.permutation(len(sents))
    return [sents[i] for i in order], topic_a, topic_b


def relational_corpus(
    n_entities: int = 8,
    n_sentences: int = 4000,
    markers: int = 3,
    seed: int = 0,
    shuffle_roles: bool = False,
):
    """Sentences about entities e{i}_{g} with two attributes: an index i and a group g.

    Each sentence mentions one entity among marker words for its index
    (``i{i}_*``) and its group (``g{g}_*``), so entity vectors become
    roughly additive in the two attributes and offset analogies
    e{i}_0 : e{i}_1 :: e{j}_0 : e{j}_1 hold. ``shuffle_roles`` surrounds
    entities with random markers instead, a corpus from another domain.
    """
    rng = np.random.default_rng(seed)
    sents = []
    for _ in range(n_sentences):
        i = int(rng.integers(n_entities))
        g = int(rng.integers(2))
        mi, mg = i, g
        if shuffle_roles:
            mi, mg = int(rng.integers(n_entities)), int(rng.integers(2))
        ctx = [f"i{mi}_{rng.integers(markers)}", f"i{mi}_{rng.integers(markers)}",
               f"g{mg}_{rng.integers(markers)}", f"g{mg}_{rng.integers(markers)}"]
        pos = int(rng.integers(len(ctx) + 1))
        ctx.insert(pos, f"e{i}_{g}")
        sents.append(ctx)
    quads = []
    for i in range(n_entities):
        j = (i + 1) % n_entities
        quads.append((f"e{i}_0", f"e{i}_1", f"e{j}_0", f"e{j}_1"))
    return sents, AnalogySet([("group", quads)])


def planted_sentiment_model(
    n_words: int = 120,
    dim: int = 40,
    noise: float = 0.5,
    n_candidates: int = 5,
    pole_noise: float = 1.5,
    seed: int = 0,
):
    """Words whose vectors are +/- a sentiment direction plus Gaussian noise.

    Candidate pole words carry extra idiosyncratic noise, so a two-word axis
    is tilted away from the sentiment direction while the average over a
    pole's neighbours is not.
    """
    rng = np.random.default_rng(seed)
    s = np.zeros(dim)
    s[0] = 1.0
    words, vecs, labels = [], [], {}
    for k in range(n_words):
        sign = 1 if k % 2 == 0 else -1
        w = f"{'p' if sign > 0 else 'n'}{k // 2}"
        words.append(w)
        vecs.append(sign * s + noise * rng.standard_normal(dim))
        labels[w] = POSITIVE if sign > 0 else NEGATIVE
    pos_c, neg_c = [], []
    for k in range(n_candidates):
        for sign, bucket in ((1, pos_c), (-1, neg_c)):
            w = f"{'pos' if sign > 0 else 'neg'}_seed{k}"
            extra = rng.standard_normal(dim)
            extra[0] = 0.0
            extra *= pole_noise / np.linalg.norm(extra)
            words.append(w)
            vecs.append(sign * s + noise * rng.standard_normal(dim) + extra)
            bucket.append(w)
    return make_model(words, vecs, "planted-sentiment"), pos_c, neg_c, GoldLexicon(labels)


def cluster_model():
    """Six words: a tight four-word cluster around ``seed`` and two outliers."""
    words = ["seed", "c1", "far1", "c2", "c3", "far2"]
    vecs = [
        [1.0, 0.05, 0.0],
        [0.98, 0.1, 0.02],
        [0.0, 1.0, 0.1],
        [0.95, 0.0, 0.12],
        [0.9, 0.15, -0.1],
        [-0.2, 0.1, 1.0],
    ]
    return make_model(words, vecs, "cluster")


def divergent_axis_fixture():
    """Two models over the same words that differ only in how ``target``
    sits on the second of three orthogonal axes.

    Returns (model_a, model_b, catalog, target, divergent_axis_name).
    """
    d = 6
    e = np.eye(d)
    base = 2.0 * e[5]
    words = ["hi0", "lo0", "hi1", "lo1", "hi2", "lo2"]
    vecs = []
    for i in range(3):
        vecs += [base + e[i], base - e[i]]
    target_a = 0.3 * e[0] + 0.4 * e[1] + 0.2 * e[2] + 0.5 * e[3] + e[5]
    # rotate the (axis-1, e3) components: same norm, only axis 1 changes
    r = np.hypot(0.4, 0.5)
    target_b = 0.3 * e[0] - 0.3 * e[1] + 0.2 * e[2] + np.sqrt(r * r - 0.09) * e[3] + e[5]
    model_a = make_model(words + ["target"], vecs + [target_a], "corpus-a")
    model_b = make_model(words + ["target"], vecs + [target_b], "corpus-b")
    catalog = AxisCatalog(build_axis(model_a, [f"hi{i}"], [f"lo{i}"], f"lo{i}→hi{i}") for i in range(3))
    return model_a, model_b, catalog, "target", "lo1→hi1"


def _data(name: str):
    return resources.files("semaxis") / "data" / name


def catalog_fixture_paths() -> dict:
    """Paths of the packaged antonym, synonym and English-lexicon fixture files."""
    return {
        "antonyms": _data("antonyms_fixture.tsv"),
        "synonyms": _data("synonyms_fixture.tsv"),
        "english": _data("english_fixture.txt"),
    }


CATALOG_MODEL_MISSING = ("zyzzyva", "bamboozle")


def catalog_fixture_model(dim: int = 300, seed: int = 0) -> EmbeddingModel:
    """Random word vectors for every fixture token except a couple of OOV ones.

    The advisedly/purposely/accidentally triple is placed so that the two
    axes sharing 'accidentally' have cosine exactly REDUNDANT_AXIS_COS.
    """
    from .axes import ingest_antonyms

    paths = catalog_fixture_paths()
    pairs = ingest_antonyms(paths["antonyms"], paths["synonyms"])
    tokens = list(dict.fromkeys(t for p in pairs for t in (p.pos, p.neg)))
    tokens += [s for s in pairs.synonyms if s not in tokens]
    tokens = [t for t in tokens if t not in CATALOG_MODEL_MISSING]
    rng = np.random.default_rng(seed)
    vecs = {t: rng.standard_normal(dim) for t in tokens}
    q, _ = np.linalg.qr(rng.standard_normal((dim, 2)))
    scale = np.sqrt(dim)
    u = scale * q[:, 0]
    w = scale * (REDUNDANT_AXIS_COS * q[:, 0] + np.sqrt(1 - REDUNDANT_AXIS_COS**2) * q[:, 1])
    vecs["advisedly"] = vecs["accidentally"] + u
    vecs["purposely"] = vecs["accidentally"] + w
    return make_model(tokens, [vecs[t] for t in tokens], "catalog-fixture")
