"""Semantic axes over word embeddings: build, project, evaluate, compare."""

from .axes import (
    STANDARD_POLES,
    TWITTER_POLES,
    AntonymPair,
    AxisCatalog,
    SemanticAxis,
    build_axis,
    build_catalog,
    catalog_diversity,
    expand_axis,
    expand_poles,
    filter_pairs,
    ingest_antonyms,
    load_catalog,
    save_catalog,
)
from .comparative import expand_topic, filter_topic_terms, project_topic, rank_axes
from .corpus import count_tokens, preprocess, undersample
from .embeddings import (
    AnalogySet,
    EmbeddingModel,
    OOVError,
    Vocabulary,
    analogy_query,
    cosine,
    evaluate_analogies,
    load_analogies,
    load_embeddings,
    nearest_neighbors,
    save_embeddings,
)
from .evaluation import GoldLexicon, auc, evaluate, kendall_tau, load_gold, pole_sensitivity_sweep, ternary_f1
from .lexicon import LabelDistribution, ScoredLexicon, class_mass_normalize, induce_lexicon, score_word
from .trainer import FineTuneConfig, TrainConfig, build_vocab, continue_training, fine_tune, train

__version__ = "0.1.0"
