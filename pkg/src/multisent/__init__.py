"""Multilingual tweet sentiment classification toolkit.

Pipeline: load labeled tweets, normalize the noisy surface text, embed
tokens per language, optionally map every language into one shared
vector space with least-squares translation matrices, then train and
cross-validate classifiers (convolutional and recurrent networks that
share parameters across languages, plus n-gram Naive Bayes and SVM
baselines). All randomness flows from named, seeded streams so any
result reproduces bit for bit.
"""

from .align import (
    DistanceReport,
    PivotPairSet,
    TranslationMatrix,
    alignment_report,
    apply_translation,
    fit_translation_matrix,
    load_dictionary,
    load_translation_matrix,
    resolve_pairs,
    save_translation_matrix,
    select_pivot_pairs,
)
from .baselines import (
    FeatureSpace,
    NBModel,
    SVMModel,
    build_feature_space,
    load_feature_space,
    predict_nb,
    predict_svm,
    save_feature_space,
    train_nb,
    train_svm_ovo,
    vectorize,
)
from .corpus import (
    FoldPlan,
    Polarity,
    TweetRecord,
    load_corpus,
    make_folds,
    parse_label,
    save_corpus,
    split_dev,
)
from .embeddings import (
    EmbeddingTable,
    VocabularyMatrix,
    build_vocabulary_matrix,
    embed_tokens,
    load_embedding_table,
    save_embedding_table,
)
from .errors import (
    ArgumentError,
    ConfigurationError,
    CoverageError,
    LeakageError,
    MultisentError,
    ParseError,
    RecordDropError,
    SchemaError,
)
from .experiment import (
    CVReport,
    ExperimentConfig,
    compare_runs,
    parse_config,
    run_experiment,
)
from .nn import TrainConfig, TrainedModel, predict, predict_batch, train
from .pipeline import EmbeddingContext
from .preprocess import (
    NormalizationRuleSet,
    TokenizedTweet,
    default_rules,
    normalize,
    preprocess_corpus,
    preprocess_record,
    tokenize,
)
from .rng import SplitMix64, derive_stream
from .synth import SynthSpec, generate_fixture, write_fixture

__version__ = "1.0.0"

__all__ = [
    "ArgumentError",
    "ConfigurationError",
    "CoverageError",
    "CVReport",
    "DistanceReport",
    "EmbeddingContext",
    "EmbeddingTable",
    "ExperimentConfig",
    "FeatureSpace",
    "FoldPlan",
    "LeakageError",
    "MultisentError",
    "NBModel",
    "NormalizationRuleSet",
    "ParseError",
    "PivotPairSet",
    "Polarity",
    "RecordDropError",
    "SchemaError",
    "SplitMix64",
    "SVMModel",
    "SynthSpec",
    "TokenizedTweet",
    "TrainConfig",
    "TrainedModel",
    "TranslationMatrix",
    "TweetRecord",
    "VocabularyMatrix",
    "alignment_report",
    "apply_translation",
    "build_feature_space",
    "build_vocabulary_matrix",
    "compare_runs",
    "default_rules",
    "derive_stream",
    "embed_tokens",
    "fit_translation_matrix",
    "generate_fixture",
    "load_corpus",
    "load_dictionary",
    "load_embedding_table",
    "load_feature_space",
    "load_translation_matrix",
    "make_folds",
    "normalize",
    "parse_config",
    "parse_label",
    "predict",
    "predict_batch",
    "predict_nb",
    "predict_svm",
    "preprocess_corpus",
    "preprocess_record",
    "run_experiment",
    "save_corpus",
    "save_embedding_table",
    "save_feature_space",
    "save_translation_matrix",
    "select_pivot_pairs",
    "split_dev",
    "tokenize",
    "train",
    "train_nb",
    "train_svm_ovo",
    "vectorize",
    "write_fixture",
]
