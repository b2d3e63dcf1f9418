"""Training loop: shuffled mini-batches, Adadelta, dev-set early stopping.

Determinism contract: given (config, data, context) the trained model is
bit-identical across runs. Every random draw comes from a named
substream of the config seed (epoch shuffles, per-batch dropout masks),
iteration order is fixed, and gradient reduction uses numpy's fixed
summation order.

Early stopping: after each epoch the dev accuracy is compared against
the best so far (strictly greater counts as improvement, and the best
parameters are kept); training stops once the number of epochs since
the last improvement reaches the patience, so patience 0 runs exactly
one epoch.

One parameter set serves all languages: batches may mix languages
freely and update the same tensors.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..corpus import Polarity
from ..errors import ArgumentError, ConfigurationError, ParseError
from ..pipeline import EmbeddingContext
from ..preprocess import TokenizedTweet
from ..rng import SplitMix64, derive_stream
from .adadelta import DEFAULT_EPS, DEFAULT_RHO, AdadeltaState, adadelta_step
from .model import NeuralModel, argmax_label, loss_and_gradients, predict_proba_batch
from .params import (
    DEFAULT_FILTERS_PER_WINDOW,
    DEFAULT_WINDOW_SIZES,
    CnnParams,
    LstmParams,
    init_cnn_params,
    init_lstm_params,
)


@dataclass
class TrainConfig:
    """Hyperparameters for either architecture."""

    batch_size: int = 50
    dropout_rate: float = 0.5
    rho: float = DEFAULT_RHO
    eps: float = DEFAULT_EPS
    max_epochs: int = 25
    patience: int = 3
    seed: int = 0
    candidate_activation: str = "tanh"
    cnn_activation: str = "tanh"
    window_sizes: tuple[int, ...] = DEFAULT_WINDOW_SIZES
    filters_per_window: int = DEFAULT_FILTERS_PER_WINDOW
    hidden_dim: int | None = None
    forget_bias: float = 1.0
    fine_tune_embeddings: bool = False

    def __post_init__(self):
        if self.batch_size < 1:
            raise ArgumentError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ArgumentError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if self.max_epochs < 1:
            raise ArgumentError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.patience < 0:
            raise ArgumentError(f"patience must be >= 0, got {self.patience}")


@dataclass
class FineTunedEmbeddings:
    """Training-vocabulary vectors updated alongside the model parameters."""

    index: dict[tuple[str, str], int]
    E: np.ndarray


@dataclass
class TrainedModel:
    """Final parameters plus everything needed to reproduce predictions."""

    kind: str
    params: LstmParams | CnnParams
    max_len: int
    candidate_activation: str
    activation: str
    dropout_rate: float
    fingerprints: dict[str, str]
    history: list[tuple[int, float, float]]  # (epoch, train_loss, dev_accuracy)
    best_epoch: int
    best_dev_accuracy: float
    config: TrainConfig
    fine_tuned: FineTunedEmbeddings | None = None

    def model(self) -> NeuralModel:
        return NeuralModel(
            kind=self.kind,
            params=self.params,
            max_len=self.max_len,
            candidate_activation=self.candidate_activation,
            activation=self.activation,
            dropout_rate=self.dropout_rate,
        )


def _embed_with_fine_tuning(
    tweet: TokenizedTweet, context: EmbeddingContext, ft: FineTunedEmbeddings
) -> np.ndarray:
    static = context.embed(tweet)
    rows = []
    for t, tok in enumerate(tweet.tokens):
        row = ft.index.get((tweet.lang, tok))
        rows.append(ft.E[row] if row is not None else static[t])
    return np.stack(rows)


def train(
    kind: str,
    train_tweets: list[TokenizedTweet],
    dev_tweets: list[TokenizedTweet],
    context: EmbeddingContext,
    config: TrainConfig,
) -> TrainedModel:
    """Fit one classifier over all languages at once; returns the best-dev model."""
    if not train_tweets:
        raise ArgumentError("empty training set")
    if not dev_tweets:
        raise ArgumentError("empty dev set")
    dim = context.dim
    if kind == "lstm":
        hidden = config.hidden_dim if config.hidden_dim is not None else dim
        params = init_lstm_params(dim, hidden, config.seed, config.forget_bias)
    elif kind == "cnn":
        params = init_cnn_params(dim, config.seed, config.window_sizes, config.filters_per_window)
    else:
        raise ArgumentError(f"unknown model kind {kind!r}")
    model = NeuralModel(
        kind=kind,
        params=params,
        max_len=context.max_len,
        candidate_activation=config.candidate_activation,
        activation=config.cnn_activation,
        dropout_rate=config.dropout_rate,
    )

    ft: FineTunedEmbeddings | None = None
    if config.fine_tune_embeddings:
        index: dict[tuple[str, str], int] = {}
        vectors: list[np.ndarray] = []
        for tw in train_tweets:
            emb = context.embed(tw)
            for t, tok in enumerate(tw.tokens):
                key = (tw.lang, tok)
                if key not in index:
                    index[key] = len(vectors)
                    vectors.append(emb[t].copy())
        ft = FineTunedEmbeddings(index=index, E=np.stack(vectors))

    def embed(tweet: TokenizedTweet) -> np.ndarray:
        if ft is not None:
            return _embed_with_fine_tuning(tweet, context, ft)
        return context.embed(tweet)

    # Frozen embeddings never change, so embed each example once.
    if ft is None:
        train_X = [context.embed(tw) for tw in train_tweets]
    train_y = [int(tw.label) for tw in train_tweets]

    tensors = model.params.tensors()
    if ft is not None:
        tensors = dict(tensors)
        tensors["__embeddings__"] = ft.E
    state = AdadeltaState.for_tensors(tensors)

    best_params = model.params.copy()
    best_ft = FineTunedEmbeddings(ft.index, ft.E.copy()) if ft is not None else None
    best_acc = -1.0
    best_epoch = 0
    epochs_since = 0
    history: list[tuple[int, float, float]] = []

    n = len(train_tweets)
    for epoch in range(1, config.max_epochs + 1):
        order = list(range(n))
        SplitMix64(derive_stream(config.seed, "shuffle", epoch)).shuffle(order)
        total_loss = 0.0
        for b_idx, start in enumerate(range(0, n, config.batch_size)):
            chosen = order[start:start + config.batch_size]
            if ft is None:
                batch = [(train_X[i], train_y[i]) for i in chosen]
            else:
                batch = [(embed(train_tweets[i]), train_y[i]) for i in chosen]
            dropout_seed = derive_stream(config.seed, "dropout", epoch, b_idx)
            loss, grads, dX = loss_and_gradients(model, batch, dropout_seed, want_dx=ft is not None)
            total_loss += loss * len(batch)
            step_tensors = model.params.tensors()
            if ft is not None:
                gE = np.zeros_like(ft.E)
                for bpos, i in enumerate(chosen):
                    tw = train_tweets[i]
                    for t, tok in enumerate(tw.tokens):
                        row = ft.index.get((tw.lang, tok))
                        if row is not None:
                            gE[row] += dX[bpos, t]
                step_tensors = dict(step_tensors)
                step_tensors["__embeddings__"] = ft.E
                grads = dict(grads)
                grads["__embeddings__"] = gE
            adadelta_step(step_tensors, grads, state, config.rho, config.eps)
        train_loss = total_loss / n
        dev_acc = _accuracy(model, dev_tweets, embed, config.batch_size)
        history.append((epoch, train_loss, dev_acc))
        if dev_acc > best_acc:
            best_acc = dev_acc
            best_params = model.params.copy()
            if ft is not None:
                best_ft = FineTunedEmbeddings(ft.index, ft.E.copy())
            best_epoch = epoch
            epochs_since = 0
        else:
            epochs_since += 1
        if epochs_since >= config.patience:
            break

    return TrainedModel(
        kind=kind,
        params=best_params,
        max_len=context.max_len,
        candidate_activation=config.candidate_activation,
        activation=config.cnn_activation,
        dropout_rate=config.dropout_rate,
        fingerprints=context.fingerprint(),
        history=history,
        best_epoch=best_epoch,
        best_dev_accuracy=best_acc,
        config=config,
        fine_tuned=best_ft,
    )


def _accuracy(model: NeuralModel, tweets: list[TokenizedTweet], embed, batch_size: int) -> float:
    correct = 0
    for start in range(0, len(tweets), batch_size):
        chunk = tweets[start:start + batch_size]
        probs = predict_proba_batch(model, [embed(tw) for tw in chunk])
        for row, tw in zip(probs, chunk):
            if argmax_label(row) == int(tw.label):
                correct += 1
    return correct / len(tweets)


def predict(
    trained: TrainedModel, tweet: TokenizedTweet, context: EmbeddingContext
) -> tuple[Polarity, np.ndarray]:
    """Classify one tweet; dropout off, ties to the lowest label code."""
    return predict_batch(trained, [tweet], context)[0]


def predict_batch(
    trained: TrainedModel, tweets: list[TokenizedTweet], context: EmbeddingContext
) -> list[tuple[Polarity, np.ndarray]]:
    """Classify tweets after checking the context matches the model."""
    current = context.fingerprint()
    if current != trained.fingerprints:
        changed = sorted(
            k for k in set(current) | set(trained.fingerprints)
            if current.get(k) != trained.fingerprints.get(k)
        )
        raise ConfigurationError(
            f"context does not match the model's training inputs (differs: {changed})"
        )
    model = trained.model()
    out: list[tuple[Polarity, np.ndarray]] = []
    for start in range(0, len(tweets), 256):
        chunk = tweets[start:start + 256]
        if trained.fine_tuned is not None:
            mats = [_embed_with_fine_tuning(tw, context, trained.fine_tuned) for tw in chunk]
        else:
            mats = [context.embed(tw) for tw in chunk]
        probs = predict_proba_batch(model, mats)
        for row, tw in zip(probs, chunk):
            out.append((Polarity(argmax_label(row)), row))
    return out


def save_training_log(trained: TrainedModel, path: str | Path) -> None:
    """Write the per-epoch history as CSV."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "dev_accuracy"])
        for epoch, loss, acc in trained.history:
            writer.writerow([epoch, f"{loss:.17g}", f"{acc:.17g}"])


CHECKPOINT_MAGIC = "multisent-model 1"


def save_checkpoint(trained: TrainedModel, path: str | Path) -> None:
    """Write a model as text: header fields, then row-major tensor blocks."""
    cfg = trained.config
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(CHECKPOINT_MAGIC + "\n")
        fh.write(f"kind {trained.kind}\n")
        fh.write(f"max_len {trained.max_len}\n")
        fh.write(f"candidate_activation {trained.candidate_activation}\n")
        fh.write(f"activation {trained.activation}\n")
        fh.write(f"dropout_rate {trained.dropout_rate:.17g}\n")
        fh.write(f"best_epoch {trained.best_epoch}\n")
        fh.write(f"best_dev_accuracy {trained.best_dev_accuracy:.17g}\n")
        fh.write(f"seed {cfg.seed}\n")
        if trained.kind == "cnn":
            fh.write(f"window_sizes {','.join(str(h) for h in trained.params.window_sizes)}\n")
        for key in sorted(trained.fingerprints):
            fh.write(f"fingerprint {key} {trained.fingerprints[key]}\n")
        for epoch, loss, acc in trained.history:
            fh.write(f"history {epoch} {loss:.17g} {acc:.17g}\n")
        for name, tensor in trained.params.tensors().items():
            shape = " ".join(str(s) for s in tensor.shape)
            fh.write(f"tensor {name} {shape}\n")
            flat = tensor.ravel()
            for start in range(0, flat.size, 8):
                fh.write(" ".join(f"{v:.17g}" for v in flat[start:start + 8]) + "\n")
        if trained.fine_tuned is not None:
            ft = trained.fine_tuned
            fh.write(f"tensor __embeddings__ {ft.E.shape[0]} {ft.E.shape[1]}\n")
            flat = ft.E.ravel()
            for start in range(0, flat.size, 8):
                fh.write(" ".join(f"{v:.17g}" for v in flat[start:start + 8]) + "\n")
            for (lang, tok), row in sorted(ft.index.items(), key=lambda kv: kv[1]):
                fh.write(f"vocab {lang} {tok} {row}\n")
        fh.write("end\n")


def load_checkpoint(path: str | Path) -> TrainedModel:
    """Read a model written by save_checkpoint."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != CHECKPOINT_MAGIC:
        raise ParseError("not a model checkpoint (bad magic line)", line=1)
    fields: dict[str, str] = {}
    fingerprints: dict[str, str] = {}
    history: list[tuple[int, float, float]] = []
    tensors: dict[str, np.ndarray] = {}
    vocab: dict[tuple[str, str], int] = {}
    i = 1
    while i < len(lines):
        line = lines[i]
        if line == "end":
            break
        parts = line.split(" ")
        if parts[0] == "tensor":
            name = parts[1]
            shape = tuple(int(s) for s in parts[2:])
            count = int(np.prod(shape)) if shape else 1
            values: list[float] = []
            i += 1
            while len(values) < count:
                values.extend(float(v) for v in lines[i].split())
                i += 1
            tensors[name] = np.array(values, dtype=np.float64).reshape(shape)
            continue
        if parts[0] == "fingerprint":
            fingerprints[parts[1]] = parts[2] if len(parts) > 2 else ""
        elif parts[0] == "history":
            history.append((int(parts[1]), float(parts[2]), float(parts[3])))
        elif parts[0] == "vocab":
            vocab[(parts[1], parts[2])] = int(parts[3])
        else:
            fields[parts[0]] = " ".join(parts[1:])
        i += 1
    else:
        raise ParseError("missing end marker", line=len(lines))

    kind = fields.get("kind")
    if kind not in ("lstm", "cnn"):
        raise ParseError(f"unknown model kind {kind!r}", line=2)
    E = tensors.pop("__embeddings__", None)
    if kind == "cnn":
        window_sizes = tuple(int(h) for h in fields["window_sizes"].split(","))
        params = CnnParams(
            window_sizes=window_sizes,
            filters={h: tensors[f"filters_{h}"] for h in window_sizes},
            biases={h: tensors[f"bias_{h}"] for h in window_sizes},
            V=tensors["V"],
            b_y=tensors["b_y"],
        )
        config = TrainConfig(
            seed=int(fields.get("seed", "0")),
            dropout_rate=float(fields["dropout_rate"]),
            cnn_activation=fields["activation"],
            window_sizes=window_sizes,
            filters_per_window=params.filters[window_sizes[0]].shape[0],
        )
    else:
        params = LstmParams(**{k: tensors[k] for k in (
            "W_i", "U_i", "b_i", "W_f", "U_f", "b_f",
            "W_o", "U_o", "b_o", "W_c", "U_c", "b_c", "V", "b_y")})
        config = TrainConfig(
            seed=int(fields.get("seed", "0")),
            dropout_rate=float(fields["dropout_rate"]),
            candidate_activation=fields["candidate_activation"],
            hidden_dim=params.hidden_dim,
        )
    ft = None
    if E is not None:
        ft = FineTunedEmbeddings(index=vocab, E=E)
    return TrainedModel(
        kind=kind,
        params=params,
        max_len=int(fields["max_len"]),
        candidate_activation=fields["candidate_activation"],
        activation=fields["activation"],
        dropout_rate=float(fields["dropout_rate"]),
        fingerprints=fingerprints,
        history=history,
        best_epoch=int(fields["best_epoch"]),
        best_dev_accuracy=float(fields["best_dev_accuracy"]),
        config=config,
        fine_tuned=ft,
    )
