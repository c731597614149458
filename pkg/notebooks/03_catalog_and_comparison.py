# %% [markdown]
# # Axis catalog and comparing two corpora
#
# Build a catalog of axes from an antonym list, then use it to see how a word
# is characterized differently by two embeddings.

# %%
from semaxis import build_catalog, expand_topic, filter_pairs, ingest_antonyms, project_topic, rank_axes
from semaxis.axes import drop_summary, load_lexicon_words, pairwise_abs_cos
from semaxis.synthetic import (
    catalog_fixture_model,
    catalog_fixture_paths,
    cluster_model,
    divergent_axis_fixture,
)

# %% [markdown]
# ## Filtering antonym pairs
#
# The packaged fixture has 50 rows, with at least one case for every drop
# reason. Pairs are checked in a fixed order and each one records the first
# reason that applies.

# %%
paths = catalog_fixture_paths()
pairs = ingest_antonyms(paths["antonyms"], paths["synonyms"])
model = catalog_fixture_model()
result = filter_pairs(pairs, model, load_lexicon_words(paths["english"]), 0.4)
print(drop_summary(result))
for p in result:
    if p.reason in ("synonym_duplicate", "redundant_axis"):
        print(f"  dropped {p.name:<28} {p.reason}")

cat = build_catalog(result, model)
m = pairwise_abs_cos(cat)
m[range(len(m)), range(len(m))] = 0.0
print(len(cat), "axes; largest |cos| between kept axes:", round(float(m.max()), 3))
print("diversity (mean |cos|, std cos):", cat.diversity)

# %% [markdown]
# ## Which axis separates two corpora?
#
# The two models agree everywhere except on how `target` sits on one axis.
# Ranking axes by the score difference finds it.

# %%
a, b, axes, target, name = divergent_axis_fixture()
ranking = rank_axes(a, b, target, axes)
print(ranking.to_tsv())

# %% [markdown]
# ## Topic terms projected on an axis
#
# Grow a topic from a seed word by repeatedly taking the nearest word to the
# running centroid, then compare the terms' scores in both models.

# %%
print(expand_topic(cluster_model(), "seed", 4).terms)
print(project_topic(a, b, ["target", "hi0", "lo2"], name, axes).to_tsv())
