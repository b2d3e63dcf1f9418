"""Cross-validation experiment driver and run comparison.

A run is declared by a flat key=value config naming the corpus, the
language scope, a classifier kind, and (for the neural kinds) embedding
tables plus optional translation matrices. The driver executes k-fold
cross-validation where every per-fold artifact (feature space, neural
model, early-stopping decision) is built from the fold's training split
only; an id audit records exactly which records each stage consulted
and fails the run if any test-fold id leaks in.

Reports serialize canonically: wall-clock timings are carried for
humans but excluded from the canonical form, so identical (config,
seed, data) produce byte-identical report JSON.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .align import (
    fit_translation_matrix,
    load_dictionary,
    load_translation_matrix,
    resolve_pairs,
    select_pivot_pairs,
)
from .baselines import (
    build_feature_space,
    predict_nb,
    predict_svm,
    train_nb,
    train_svm_ovo,
    vectorize,
)
from .corpus import Polarity, load_corpus, make_folds, split_dev
from .embeddings import count_tokens, load_embedding_table, ranks_from_counts
from .errors import ArgumentError, ConfigurationError, LeakageError
from .nn import TrainConfig, predict_batch, train
from .pipeline import EmbeddingContext, corpus_max_len
from .preprocess import default_rules, preprocess_corpus
from .rng import derive_stream

KINDS = ("nb", "svm", "lstm", "cnn")
ALIGNMENTS = ("none", "translation_matrix")
REFIT_MODES = ("global", "per_fold")

# Config keys that map straight onto TrainConfig fields.
_TRAIN_KEYS = {
    "batch_size": int,
    "dropout_rate": float,
    "rho": float,
    "eps": float,
    "max_epochs": int,
    "patience": int,
    "candidate_activation": str,
    "cnn_activation": str,
    "filters_per_window": int,
    "hidden_dim": int,
    "forget_bias": float,
    "fine_tune_embeddings": lambda v: v.lower() in ("1", "true", "yes"),
}


@dataclass
class ExperimentConfig:
    """Everything one cross-validation run depends on."""

    name: str
    corpus: str
    languages: tuple[str, ...]
    kind: str
    folds: int
    seed: int
    scope: str = "all"                      # "all" or one language code
    alignment: str = "none"
    refit: str = "global"                   # per_fold refits maps from fold train splits
    target_language: str | None = None      # shared space for per_fold refit
    pivot_count: int = 20
    pivot_train_count: int = 16
    embeddings: dict[str, str] = field(default_factory=dict)
    matrices: dict[str, str] = field(default_factory=dict)
    dictionaries: dict[str, str] = field(default_factory=dict)
    scheme: str = "cumulative_multilingual"
    alpha: float = 1.0
    C: float = 1.0
    dev_fraction: float = 0.1
    tokenize_mode: str = "whitespace"
    oov_seed: int = 0
    oov_scale: float | None = None
    train_overrides: dict[str, object] = field(default_factory=dict)
    window_sizes: tuple[int, ...] = (3, 4, 5)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.alignment not in ALIGNMENTS:
            raise ConfigurationError(
                f"alignment must be one of {ALIGNMENTS}, got {self.alignment!r}"
            )
        if not self.languages:
            raise ConfigurationError("languages must be non-empty")
        if self.scope != "all" and self.scope not in self.languages:
            raise ConfigurationError(
                f"scope {self.scope!r} is not in languages {self.languages}"
            )
        if self.refit not in REFIT_MODES:
            raise ConfigurationError(
                f"refit must be one of {REFIT_MODES}, got {self.refit!r}"
            )
        if self.refit == "per_fold":
            if self.alignment != "translation_matrix":
                raise ConfigurationError("refit=per_fold needs alignment=translation_matrix")
            if self.target_language is None:
                raise ConfigurationError("refit=per_fold needs a target_language")
            if self.target_language not in self.active_languages():
                raise ConfigurationError(
                    f"target_language {self.target_language!r} is out of scope"
                )
            missing = [
                lang for lang in self.active_languages()
                if lang != self.target_language and lang not in self.dictionaries
            ]
            if missing:
                raise ConfigurationError(
                    f"refit=per_fold needs a dictionary for every mapped language; "
                    f"missing: {missing}"
                )
            if not 0 < self.pivot_train_count <= self.pivot_count:
                raise ConfigurationError(
                    "pivot_train_count must lie in [1, pivot_count]"
                )
        elif self.alignment == "translation_matrix" and not self.matrices:
            # languages without a matrix are taken as the shared target space
            raise ConfigurationError(
                "alignment=translation_matrix requires at least one matrix"
            )

    def active_languages(self) -> tuple[str, ...]:
        return self.languages if self.scope == "all" else (self.scope,)

    def canonical_text(self) -> str:
        """Sorted key=value lines; the basis of the config fingerprint."""
        items: dict[str, str] = {
            "name": self.name,
            "corpus": self.corpus,
            "languages": ",".join(self.languages),
            "kind": self.kind,
            "folds": str(self.folds),
            "seed": str(self.seed),
            "scope": self.scope,
            "alignment": self.alignment,
            "refit": self.refit,
            "target_language": str(self.target_language),
            "pivot_count": str(self.pivot_count),
            "pivot_train_count": str(self.pivot_train_count),
            "scheme": self.scheme,
            "alpha": repr(self.alpha),
            "C": repr(self.C),
            "dev_fraction": repr(self.dev_fraction),
            "tokenize_mode": self.tokenize_mode,
            "oov_seed": str(self.oov_seed),
            "oov_scale": repr(self.oov_scale),
            "window_sizes": ",".join(str(w) for w in self.window_sizes),
        }
        for lang, path in self.embeddings.items():
            items[f"embedding.{lang}"] = path
        for lang, path in self.matrices.items():
            items[f"matrix.{lang}"] = path
        for lang, path in self.dictionaries.items():
            items[f"dictionary.{lang}"] = path
        for key, value in self.train_overrides.items():
            items[f"train.{key}"] = str(value)
        return "\n".join(f"{k}={items[k]}" for k in sorted(items)) + "\n"

    def fingerprint(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()

    def train_config(self, seed: int) -> TrainConfig:
        kwargs: dict[str, object] = dict(self.train_overrides)
        kwargs["seed"] = seed
        kwargs["window_sizes"] = self.window_sizes
        return TrainConfig(**kwargs)


def parse_config(text: str, name: str = "run") -> ExperimentConfig:
    """Parse flat key=value lines ('#' starts a comment)."""
    raw: dict[str, str] = {}
    for i, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigurationError(f"line {i}: expected key=value, got {line!r}")
        key, _, value = stripped.partition("=")
        raw[key.strip()] = value.strip()

    def pop(key: str, default: str | None = None) -> str | None:
        return raw.pop(key, default)

    try:
        cfg = ExperimentConfig(
            name=pop("name", name),
            corpus=pop("corpus", ""),
            languages=tuple(filter(None, (pop("languages", "") or "").split(","))),
            kind=pop("kind", ""),
            folds=int(pop("folds", "10")),
            seed=int(pop("seed", "0")),
            scope=pop("scope", "all"),
            alignment=pop("alignment", "none"),
            refit=pop("refit", "global"),
            target_language=pop("target_language") or None,
            pivot_count=int(pop("pivot_count", "20")),
            pivot_train_count=int(pop("pivot_train_count", "16")),
            scheme=pop("scheme", "cumulative_multilingual"),
            alpha=float(pop("alpha", "1.0")),
            C=float(pop("C", "1.0")),
            dev_fraction=float(pop("dev_fraction", "0.1")),
            tokenize_mode=pop("tokenize_mode", "whitespace"),
            oov_seed=int(pop("oov_seed", "0")),
            oov_scale=(lambda v: None if v in (None, "", "none") else float(v))(pop("oov_scale")),
            window_sizes=tuple(int(w) for w in (pop("window_sizes", "3,4,5") or "").split(",")),
            embeddings={
                k.split(".", 1)[1]: raw.pop(k)
                for k in [k for k in raw if k.startswith("embedding.")]
            },
            matrices={
                k.split(".", 1)[1]: raw.pop(k)
                for k in [k for k in raw if k.startswith("matrix.")]
            },
            dictionaries={
                k.split(".", 1)[1]: raw.pop(k)
                for k in [k for k in raw if k.startswith("dictionary.")]
            },
            train_overrides={
                k.split(".", 1)[1]: _TRAIN_KEYS[k.split(".", 1)[1]](raw.pop(k))
                for k in [k for k in raw if k.startswith("train.")]
                if k.split(".", 1)[1] in _TRAIN_KEYS
            },
        )
    except ValueError as err:
        raise ConfigurationError(f"bad config value: {err}") from None
    if raw:
        raise ConfigurationError(f"unknown config keys: {sorted(raw)}")
    return cfg


class IdAudit:
    """Records which example ids training-side artifact construction used."""

    def __init__(self):
        self.touched: set[str] = set()

    def touch(self, ids) -> None:
        if isinstance(ids, str):
            self.touched.add(ids)
        else:
            self.touched.update(ids)

    def use(self, tweets):
        """Pass-through that registers every tweet it yields."""
        for tw in tweets:
            self.touched.add(tw.id)
            yield tw

    def assert_disjoint(self, test_ids) -> None:
        leaked = self.touched & set(test_ids)
        if leaked:
            raise LeakageError(
                f"training artifacts consulted {len(leaked)} held-out ids "
                f"(first: {sorted(leaked)[:3]})"
            )


@dataclass
class CVReport:
    """Cross-validation outcome with canonical serialization."""

    name: str
    kind: str
    folds: int
    seed: int
    fold_accuracies: list[float]
    mean_accuracy: float
    overall_accuracy: float
    per_language: dict[str, dict[str, float]]
    config_fingerprint: str
    wall_clock_per_fold: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.fold_accuracies:
            mean = sum(self.fold_accuracies) / len(self.fold_accuracies)
            if abs(mean - self.mean_accuracy) > 1e-12:
                raise ArgumentError(
                    f"mean_accuracy {self.mean_accuracy} is not the fold mean {mean}"
                )

    def canonical_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "folds": self.folds,
            "seed": self.seed,
            "fold_accuracies": self.fold_accuracies,
            "mean_accuracy": self.mean_accuracy,
            "overall_accuracy": self.overall_accuracy,
            "per_language": {
                lang: dict(sorted(stats.items()))
                for lang, stats in sorted(self.per_language.items())
            },
            "config_fingerprint": self.config_fingerprint,
        }

    def canonical_json(self) -> str:
        """Timings excluded: identical runs give identical bytes."""
        return json.dumps(self.canonical_dict(), sort_keys=True, ensure_ascii=False)

    def to_json(self) -> str:
        obj = self.canonical_dict()
        obj["wall_clock_per_fold"] = self.wall_clock_per_fold
        return json.dumps(obj, sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "CVReport":
        obj = json.loads(text)
        return cls(
            name=obj["name"],
            kind=obj["kind"],
            folds=obj["folds"],
            seed=obj["seed"],
            fold_accuracies=list(obj["fold_accuracies"]),
            mean_accuracy=obj["mean_accuracy"],
            overall_accuracy=obj["overall_accuracy"],
            per_language=obj["per_language"],
            config_fingerprint=obj["config_fingerprint"],
            wall_clock_per_fold=list(obj.get("wall_clock_per_fold", [])),
        )


def _load_context(config: ExperimentConfig, tweets, rules_version: str) -> EmbeddingContext:
    missing = [lang for lang in config.active_languages() if lang not in config.embeddings]
    if missing:
        raise ConfigurationError(f"no embedding path for languages: {missing}")
    tables = {
        lang: load_embedding_table(config.embeddings[lang], lang)
        for lang in config.active_languages()
    }
    translations = {}
    if config.alignment == "translation_matrix" and config.refit == "global":
        for lang, path in config.matrices.items():
            if lang in tables:
                translations[lang] = load_translation_matrix(path)
        targets = {tm.tgt_lang for tm in translations.values()}
        uncovered = [
            lang for lang in config.active_languages()
            if lang not in translations and lang not in targets
        ]
        if uncovered:
            raise ConfigurationError(
                f"languages neither mapped nor the map target: {uncovered}"
            )
    return EmbeddingContext(
        tables=tables,
        translations=translations,
        oov_seed=config.oov_seed,
        oov_scale=config.oov_scale,
        max_len=corpus_max_len(tweets),
        rules_version=rules_version,
    )


def _refit_context(
    config: ExperimentConfig,
    base: EmbeddingContext,
    train_tweets,
    dictionaries: dict[str, dict[str, str]],
    seed: int,
) -> EmbeddingContext:
    """Fit fold-local translation maps from training-split frequency ranks."""
    target = config.target_language
    translations = {}
    for lang in config.active_languages():
        if lang == target:
            continue
        ranks = ranks_from_counts(count_tokens(train_tweets, lang))
        pairs = select_pivot_pairs(
            ranks,
            dictionaries[lang],
            config.pivot_count,
            config.pivot_train_count,
            seed,
            src_lang=lang,
            tgt_lang=target,
        )
        X, Z = resolve_pairs(
            pairs.train_pairs,
            base.tables[lang],
            base.tables[target],
            oov_seed=config.oov_seed,
            oov_scale=config.oov_scale,
        )
        translations[lang] = fit_translation_matrix(X, Z, src_lang=lang, tgt_lang=target)
    return EmbeddingContext(
        tables=base.tables,
        translations=translations,
        oov_seed=base.oov_seed,
        oov_scale=base.oov_scale,
        max_len=base.max_len,
        rules_version=base.rules_version,
    )


def run_experiment(
    config: ExperimentConfig,
    records=None,
    context: EmbeddingContext | None = None,
) -> CVReport:
    """Execute k-fold cross-validation per the config.

    records and context may be passed directly (tests, library use);
    otherwise they load from the configured paths. The corpus maximum
    length and the embedding tables are structural constants shared
    across folds; everything derived from examples (feature spaces,
    model parameters, early stopping) uses training-split ids only,
    which the per-fold audit enforces.
    """
    if config.folds < 2:
        raise ArgumentError(f"cross-validation needs k >= 2 folds, got {config.folds}")
    rules = default_rules()
    rules_version = rules.fingerprint()
    if records is None:
        records = load_corpus(config.corpus)
    active = set(config.active_languages())
    records = [r for r in records if r.lang in active]
    tweets, _dropped = preprocess_corpus(records, rules, config.tokenize_mode)
    if not tweets:
        raise ArgumentError("no usable records in scope")

    if config.kind in ("lstm", "cnn") and context is None:
        context = _load_context(config, tweets, rules_version)
    dictionaries = None
    if config.kind in ("lstm", "cnn") and config.refit == "per_fold":
        dictionaries = {
            lang: load_dictionary(path) for lang, path in config.dictionaries.items()
        }

    plan = make_folds(tweets, config.folds, config.seed, stratify=True)
    by_id = {tw.id: tw for tw in tweets}

    fold_accuracies: list[float] = []
    wall_clock: list[float] = []
    lang_correct: dict[str, int] = {lang: 0 for lang in sorted(active)}
    lang_total: dict[str, int] = {lang: 0 for lang in sorted(active)}
    total_correct = 0

    for fold in range(config.folds):
        start = time.perf_counter()
        test_ids = plan.fold_ids(fold)
        train_ids = [tw.id for tw in tweets if plan.assignments[tw.id] != fold]
        audit = IdAudit()
        predictions = _run_fold(
            config, fold, train_ids, test_ids, by_id, context, dictionaries, audit
        )
        audit.assert_disjoint(test_ids)

        correct = 0
        for rid, pred in predictions.items():
            tw = by_id[rid]
            lang_total[tw.lang] += 1
            if pred == tw.label:
                correct += 1
                lang_correct[tw.lang] += 1
        total_correct += correct
        fold_accuracies.append(correct / len(test_ids))
        wall_clock.append(time.perf_counter() - start)

    per_language = {
        lang: {
            "correct": float(lang_correct[lang]),
            "total": float(lang_total[lang]),
            "accuracy": (lang_correct[lang] / lang_total[lang]) if lang_total[lang] else 0.0,
        }
        for lang in sorted(active)
    }
    return CVReport(
        name=config.name,
        kind=config.kind,
        folds=config.folds,
        seed=config.seed,
        fold_accuracies=fold_accuracies,
        mean_accuracy=sum(fold_accuracies) / len(fold_accuracies),
        overall_accuracy=total_correct / len(tweets),
        per_language=per_language,
        config_fingerprint=config.fingerprint(),
        wall_clock_per_fold=wall_clock,
    )


def _run_fold(
    config: ExperimentConfig,
    fold: int,
    train_ids: list[str],
    test_ids: list[str],
    by_id: dict,
    context: EmbeddingContext | None,
    dictionaries: dict[str, dict[str, str]] | None,
    audit: IdAudit,
) -> dict[str, Polarity]:
    test_tweets = [by_id[rid] for rid in test_ids]
    if config.kind in ("nb", "svm"):
        train_tweets = list(audit.use(by_id[rid] for rid in train_ids))
        scheme = config.scheme
        if config.scope != "all" and scheme == "cumulative_multilingual":
            scheme = "per_language"
        space = build_feature_space(train_tweets, scheme)
        vecs = [vectorize(tw, space) for tw in train_tweets]
        labels = [int(tw.label) for tw in train_tweets]
        if config.kind == "nb":
            model = train_nb(vecs, labels, alpha=config.alpha, dimension=space.dimension)
            return {
                tw.id: predict_nb(model, vectorize(tw, space)) for tw in test_tweets
            }
        model = train_svm_ovo(vecs, labels, dimension=space.dimension, C=config.C)
        return {tw.id: predict_svm(model, vectorize(tw, space)) for tw in test_tweets}

    # neural kinds
    fold_seed = derive_stream(config.seed, "fold", fold)
    if config.refit == "per_fold":
        all_train = list(audit.use(by_id[rid] for rid in train_ids))
        context = _refit_context(config, context, all_train, dictionaries, fold_seed)
    sub_train_ids, dev_ids = split_dev(train_ids, config.dev_fraction, fold_seed)
    train_tweets = list(audit.use(by_id[rid] for rid in sub_train_ids))
    dev_tweets = list(audit.use(by_id[rid] for rid in dev_ids))
    trained = train(
        config.kind, train_tweets, dev_tweets, context, config.train_config(fold_seed)
    )
    preds = predict_batch(trained, test_tweets, context)
    return {tw.id: pred for tw, (pred, _probs) in zip(test_tweets, preds)}


def compare_runs(reports: list[CVReport], baseline: str | None = None) -> str:
    """Aligned text table of runs sorted by name, with deltas vs a baseline.

    The baseline defaults to the first report (after sorting) when there
    is more than one run; a single report renders without a delta column.
    """
    if not reports:
        raise ArgumentError("no reports to compare")
    rows = sorted(reports, key=lambda r: r.name)
    base_row = None
    if len(rows) > 1:
        if baseline is not None:
            matches = [r for r in rows if r.name == baseline]
            if not matches:
                raise ArgumentError(f"baseline {baseline!r} not among report names")
            base_row = matches[0]
        else:
            base_row = rows[0]
    headers = ["name", "kind", "folds", "mean_accuracy"]
    if base_row is not None:
        headers.append("delta")
    table = [headers]
    for r in rows:
        row = [r.name, r.kind, str(r.folds), f"{r.mean_accuracy:.3f}"]
        if base_row is not None:
            if r is base_row:
                row.append("baseline")
            else:
                row.append(f"{r.mean_accuracy - base_row.mean_accuracy:+.3f}")
        table.append(row)
    widths = [max(len(row[i]) for row in table) for i in range(len(headers))]
    lines = [
        "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
        for row in table
    ]
    return "\n".join(lines) + "\n"


def compare_runs_csv(reports: list[CVReport], baseline: str | None = None) -> str:
    """CSV twin of compare_runs."""
    if not reports:
        raise ArgumentError("no reports to compare")
    rows = sorted(reports, key=lambda r: r.name)
    base_row = None
    if len(rows) > 1:
        base_row = rows[0] if baseline is None else next(
            (r for r in rows if r.name == baseline), None
        )
        if base_row is None:
            raise ArgumentError(f"baseline {baseline!r} not among report names")
    out = ["name,kind,folds,mean_accuracy" + (",delta" if base_row is not None else "")]
    for r in rows:
        line = f"{r.name},{r.kind},{r.folds},{r.mean_accuracy:.6f}"
        if base_row is not None:
            line += ",baseline" if r is base_row else f",{r.mean_accuracy - base_row.mean_accuracy:+.6f}"
        out.append(line)
    return "\n".join(out) + "\n"
