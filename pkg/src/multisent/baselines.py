"""Non-neural baselines: binarized n-gram features, Naive Bayes, linear SVM.

Features are unigrams and bigrams with no frequency cutoff, binarized
(each n-gram counts once per tweet). The cumulative multilingual scheme
namespaces every n-gram by its language, so the same surface string in
two languages occupies two columns and the combined dimensionality is
exactly the sum of the per-language ones.

Naive Bayes is multinomial over the binary features with add-alpha
smoothing; a Bernoulli mode (modeling feature absence too) is a flag.

The SVM is a soft-margin linear machine trained in the dual by
coordinate descent with a deterministic sweep order; the bias is an
appended constant feature. Multiclass is one-vs-one with majority
voting, ties resolved to the lowest label code.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Polarity
from .errors import ArgumentError, ConfigurationError, ParseError
from .preprocess import TokenizedTweet

NGRAM_JOINER = "\x1f"
SCHEMES = ("per_language", "cumulative_multilingual")


def ngrams_of(tokens: list[str]) -> list[str]:
    """Distinct unigrams and bigrams, in first-occurrence order."""
    seen: dict[str, None] = {}
    for tok in tokens:
        seen.setdefault(tok, None)
    for a, b in zip(tokens, tokens[1:]):
        seen.setdefault(a + NGRAM_JOINER + b, None)
    return list(seen)


@dataclass
class FeatureSpace:
    """Dense n-gram -> column mapping built from a training split."""

    scheme: str
    index: dict[str, int]

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ArgumentError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        ids = sorted(self.index.values())
        if ids != list(range(len(ids))):
            raise ArgumentError("feature ids must be dense 0..V-1")

    @property
    def dimension(self) -> int:
        return len(self.index)

    def key(self, lang: str, ngram: str) -> str:
        if self.scheme == "cumulative_multilingual":
            return lang + NGRAM_JOINER + ngram
        return ngram


def build_feature_space(tweets: list[TokenizedTweet], scheme: str) -> FeatureSpace:
    """One column per distinct (possibly language-tagged) n-gram.

    Column ids are assigned lexicographically so the space is independent
    of corpus order. The per_language scheme requires a single-language
    corpus; mixed input needs the cumulative scheme.
    """
    if scheme not in SCHEMES:
        raise ArgumentError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    if scheme == "per_language":
        langs = {tw.lang for tw in tweets}
        if len(langs) > 1:
            raise ArgumentError(
                f"per_language scheme cannot mix languages {sorted(langs)}"
            )
    keys: set[str] = set()
    for tw in tweets:
        lang = tw.lang
        for ng in ngrams_of(tw.tokens):
            if scheme == "cumulative_multilingual":
                keys.add(lang + NGRAM_JOINER + ng)
            else:
                keys.add(ng)
    return FeatureSpace(scheme=scheme, index={k: i for i, k in enumerate(sorted(keys))})


def vectorize(tweet: TokenizedTweet, space: FeatureSpace) -> np.ndarray:
    """Active column ids for a tweet, strictly increasing; unknown n-grams drop."""
    ids = {
        space.index[key]
        for ng in ngrams_of(tweet.tokens)
        if (key := space.key(tweet.lang, ng)) in space.index
    }
    return np.array(sorted(ids), dtype=np.int64)


@dataclass
class NBModel:
    """Smoothed class-conditional log-likelihoods over binary features."""

    alpha: float
    bernoulli: bool
    classes: list[int]
    dimension: int
    log_prior: np.ndarray          # (n_classes,)
    log_lik: np.ndarray            # (n_classes, V) log P(feature present | class)
    log_absent: np.ndarray | None  # (n_classes, V) log P(absent | class), bernoulli only


def train_nb(
    vectors: list[np.ndarray],
    labels: list[int],
    alpha: float = 1.0,
    dimension: int | None = None,
    bernoulli: bool = False,
) -> NBModel:
    """Fit counts; alpha > 0 is the add-alpha smoothing strength."""
    if not vectors:
        raise ArgumentError("empty training set")
    if len(vectors) != len(labels):
        raise ArgumentError("vectors and labels differ in length")
    if alpha <= 0:
        raise ArgumentError(f"alpha must be positive, got {alpha}")
    V = dimension
    if V is None:
        V = max((int(v.max()) + 1 for v in vectors if v.size), default=0)
    classes = sorted(set(int(y) for y in labels))
    n_by_class = np.zeros(len(classes))
    present = np.zeros((len(classes), V))
    pos = {c: i for i, c in enumerate(classes)}
    for vec, y in zip(vectors, labels):
        ci = pos[int(y)]
        n_by_class[ci] += 1
        if vec.size:
            present[ci, vec] += 1.0
    log_prior = np.log(n_by_class / n_by_class.sum())
    if bernoulli:
        p = (present + alpha) / (n_by_class[:, None] + 2.0 * alpha)
        log_lik = np.log(p)
        log_absent = np.log(1.0 - p)
    else:
        totals = present.sum(axis=1, keepdims=True)
        log_lik = np.log((present + alpha) / (totals + alpha * V))
        log_absent = None
    return NBModel(
        alpha=alpha,
        bernoulli=bernoulli,
        classes=classes,
        dimension=V,
        log_prior=log_prior,
        log_lik=log_lik,
        log_absent=log_absent,
    )


def nb_log_posterior(model: NBModel, vector: np.ndarray) -> np.ndarray:
    """Unnormalized log posterior per class, in model.classes order."""
    scores = model.log_prior.copy()
    if model.bernoulli:
        scores = scores + model.log_absent.sum(axis=1)
        if vector.size:
            scores = scores + (model.log_lik[:, vector] - model.log_absent[:, vector]).sum(axis=1)
    elif vector.size:
        scores = scores + model.log_lik[:, vector].sum(axis=1)
    return scores


def nb_posterior(model: NBModel, vector: np.ndarray) -> np.ndarray:
    """Normalized class posterior, in model.classes order."""
    scores = nb_log_posterior(model, vector)
    scores = scores - scores.max()
    e = np.exp(scores)
    return e / e.sum()


def predict_nb(model: NBModel, vector: np.ndarray) -> Polarity:
    """Highest-posterior class; exact ties go to the lowest label code."""
    scores = nb_log_posterior(model, vector)
    best = scores.max()
    for code, score in zip(model.classes, scores):
        if score == best:
            return Polarity(code)
    raise ArgumentError("no maximum score")  # unreachable


@dataclass
class BinarySVM:
    """Soft-margin linear classifier for one label pair; bias is w[-1]."""

    pos_code: int
    neg_code: int
    w: np.ndarray                  # (V + 1,)
    C: float
    sweeps: int
    converged: bool
    dual_objective_history: list[float] = field(default_factory=list)

    def decision(self, vector: np.ndarray) -> float:
        s = self.w[-1]
        if vector.size:
            s += float(self.w[vector].sum())
        return float(s)


def train_binary_svm(
    vectors: list[np.ndarray],
    ys: np.ndarray,
    dimension: int,
    pos_code: int,
    neg_code: int,
    C: float = 1.0,
    tol: float = 1e-4,
    max_sweeps: int = 1000,
) -> BinarySVM:
    """Dual coordinate descent on the soft-margin objective.

    Minimizes 0.5 ||w||^2 + C sum_i hinge(1 - y_i w.x_i) through its
    dual; the recorded dual objective sum(alpha) - 0.5 ||w||^2 is
    non-decreasing across sweeps. Examples are visited in a fixed order
    every sweep, so training is deterministic.
    """
    n = len(vectors)
    if n == 0:
        raise ArgumentError("empty training set")
    if C <= 0:
        raise ArgumentError(f"C must be positive, got {C}")
    # Bias handled as a constant appended feature: Q_ii = |x_i| + 1 > 0.
    q_diag = np.array([float(v.size) + 1.0 for v in vectors])
    alpha = np.zeros(n)
    w = np.zeros(dimension + 1)
    history: list[float] = []
    converged = False
    sweeps = 0
    for sweep in range(1, max_sweeps + 1):
        sweeps = sweep
        max_pg = 0.0
        for i in range(n):
            vec = vectors[i]
            y = ys[i]
            wx = w[-1] + (float(w[vec].sum()) if vec.size else 0.0)
            G = y * wx - 1.0
            a = alpha[i]
            if a <= 0.0:
                pg = min(G, 0.0)
            elif a >= C:
                pg = max(G, 0.0)
            else:
                pg = G
            if pg != 0.0:
                max_pg = max(max_pg, abs(pg))
                a_new = min(max(a - G / q_diag[i], 0.0), C)
                delta = (a_new - a) * y
                if delta != 0.0:
                    if vec.size:
                        w[vec] += delta
                    w[-1] += delta
                    alpha[i] = a_new
        history.append(float(alpha.sum() - 0.5 * float(w @ w)))
        if max_pg < tol:
            converged = True
            break
    return BinarySVM(
        pos_code=pos_code,
        neg_code=neg_code,
        w=w,
        C=C,
        sweeps=sweeps,
        converged=converged,
        dual_objective_history=history,
    )


@dataclass
class SVMModel:
    """One-vs-one ensemble over the three polarity classes."""

    dimension: int
    C: float
    machines: dict[tuple[int, int], BinarySVM]


def train_svm_ovo(
    vectors: list[np.ndarray],
    labels: list[int],
    dimension: int,
    C: float = 1.0,
    tol: float = 1e-4,
    max_sweeps: int = 1000,
) -> SVMModel:
    """Train one binary machine per class pair; every class must appear."""
    if not vectors:
        raise ArgumentError("empty training set")
    if len(vectors) != len(labels):
        raise ArgumentError("vectors and labels differ in length")
    present = set(int(y) for y in labels)
    for polarity in Polarity:
        if int(polarity) not in present:
            raise ConfigurationError(f"class {polarity.name} absent from training data")
    machines: dict[tuple[int, int], BinarySVM] = {}
    codes = sorted(int(p) for p in Polarity)
    for ai in range(len(codes)):
        for bi in range(ai + 1, len(codes)):
            a, b = codes[ai], codes[bi]
            sub = [(v, 1.0 if int(y) == a else -1.0)
                   for v, y in zip(vectors, labels) if int(y) in (a, b)]
            svecs = [v for v, _ in sub]
            sys_ = np.array([y for _, y in sub])
            machines[(a, b)] = train_binary_svm(
                svecs, sys_, dimension, a, b, C=C, tol=tol, max_sweeps=max_sweeps
            )
    return SVMModel(dimension=dimension, C=C, machines=machines)


def predict_svm(model: SVMModel, vector: np.ndarray) -> Polarity:
    """Majority vote over the pairwise machines; ties to the lowest code."""
    votes = {int(p): 0 for p in Polarity}
    for (a, b), m in model.machines.items():
        d = m.decision(vector)
        # d >= 0 sides with the pair's lower code (the machine's +1 class)
        votes[a if d >= 0.0 else b] += 1
    best = max(votes.values())
    for code in sorted(votes):
        if votes[code] == best:
            return Polarity(code)
    raise ArgumentError("no votes")  # unreachable


def svm_primal_objective(
    vectors: list[np.ndarray], ys: np.ndarray, w: np.ndarray, C: float
) -> float:
    """0.5 ||w||^2 + C sum hinge; the quantity dual coordinate descent minimizes."""
    total = 0.5 * float(w @ w)
    for vec, y in zip(vectors, ys):
        margin = y * (w[-1] + (float(w[vec].sum()) if vec.size else 0.0))
        total += C * max(0.0, 1.0 - margin)
    return total


def save_feature_space(space: FeatureSpace, path: str | Path) -> None:
    """Text dump: scheme header then "id<TAB>feature" rows."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"multisent-features 1 {space.scheme}\n")
        for key, idx in sorted(space.index.items(), key=lambda kv: kv[1]):
            fh.write(f"{idx}\t{key}\n")


def load_feature_space(path: str | Path) -> FeatureSpace:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("multisent-features 1 "):
        raise ParseError("not a feature-space dump", line=1)
    scheme = lines[0].split(" ", 2)[2]
    index: dict[str, int] = {}
    for i, raw in enumerate(lines[1:], start=2):
        if not raw:
            continue
        idx_s, _, key = raw.partition("\t")
        try:
            index[key] = int(idx_s)
        except ValueError:
            raise ParseError(f"bad feature row {raw!r}", line=i) from None
    return FeatureSpace(scheme=scheme, index=index)
