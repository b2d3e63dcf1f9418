"""Convolutional classifier over zero-padded tweet matrices.

Every tweet is padded at the back with zero rows to the corpus maximum
length. For a filter of window size h with weights w and bias b,
position i yields feature c_i = act(w . x_{i:i+h-1} + b) for every
window position over the padded matrix, including windows that lie in
the padding (so padded windows yield act(b); per-filter bias therefore
leaks a constant into fully padded regions, which is deliberate and
documented). Max pooling keeps one feature per filter; the pooled
features from all window sizes concatenate into the penultimate vector,
optionally dropout-masked, then a softmax layer maps to class logits.

Backward routes each pooled feature's gradient to its argmax window
(first index on ties, matching numpy argmax).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ArgumentError, ConfigurationError
from .activations import activation_grad_from_output, apply_activation
from .params import CnnParams, zero_like_tensors


@dataclass
class PaddedTweetMatrix:
    """A tweet's embedding rows padded with zeros at the back."""

    matrix: np.ndarray
    true_length: int

    def __post_init__(self):
        if self.matrix.ndim != 2:
            raise ArgumentError(f"matrix must be 2d, got shape {self.matrix.shape}")
        if not 1 <= self.true_length <= self.matrix.shape[0]:
            raise ArgumentError(
                f"true_length {self.true_length} out of range for {self.matrix.shape[0]} rows"
            )
        if self.true_length < self.matrix.shape[0]:
            pad = self.matrix[self.true_length:]
            if np.any(pad != 0.0):
                raise ArgumentError("padding rows must be all-zero")


def pad_matrix(X: np.ndarray, max_len: int) -> PaddedTweetMatrix:
    """Zero-pad an (n, dim) matrix at the back to (max_len, dim)."""
    n, dim = X.shape
    if n == 0:
        raise ArgumentError("cannot pad an empty sequence")
    if n > max_len:
        raise ConfigurationError(f"sequence length {n} exceeds configured maximum {max_len}")
    out = np.zeros((max_len, dim))
    out[:n] = X
    return PaddedTweetMatrix(matrix=out, true_length=n)


@dataclass
class CnnForwardCache:
    windows: dict[int, np.ndarray]     # h -> (B, P_h, h*dim)
    feature_maps: dict[int, np.ndarray]  # h -> (B, P_h, F_h) activated
    argmax: dict[int, np.ndarray]      # h -> (B, F_h)
    penultimate: np.ndarray            # (B, total) after dropout
    pooled: np.ndarray                 # (B, total) before dropout
    dropout_mask: np.ndarray | None
    activation: str


def _im2col(X: np.ndarray, h: int) -> np.ndarray:
    """All length-h windows of each row-matrix in the batch, flattened.

    X is (B, L, dim); result is (B, L-h+1, h*dim). A copy is taken so
    downstream writes never alias the input.
    """
    B, L, dim = X.shape
    P = L - h + 1
    s0, s1, s2 = X.strides
    view = np.lib.stride_tricks.as_strided(X, shape=(B, P, h, dim), strides=(s0, s1, s1, s2))
    return view.reshape(B, P, h * dim).copy()


def cnn_forward_batch(
    X: np.ndarray,
    params: CnnParams,
    activation: str = "tanh",
    dropout_mask: np.ndarray | None = None,
) -> tuple[np.ndarray, CnnForwardCache]:
    """Forward over a padded batch (B, max_len, dim); returns (logits, cache).

    dropout_mask, when given, is a (B, total_filters) matrix multiplied
    into the penultimate layer (inverted dropout: zeros and 1/(1-rate)
    survivors). Prediction passes no mask.
    """
    if X.ndim != 3:
        raise ArgumentError(f"X must be (batch, length, dim), got {X.shape}")
    max_h = max(params.window_sizes)
    if X.shape[1] < max_h:
        raise ConfigurationError(
            f"padded length {X.shape[1]} is below the largest window size {max_h}"
        )
    windows: dict[int, np.ndarray] = {}
    maps: dict[int, np.ndarray] = {}
    argmax: dict[int, np.ndarray] = {}
    pooled_parts = []
    for h in params.window_sizes:
        W = params.filters[h]                      # (F, h, dim)
        F = W.shape[0]
        cols = _im2col(X, h)                       # (B, P, h*dim)
        pre = cols @ W.reshape(F, -1).T + params.biases[h]
        fmap = apply_activation(activation, pre)   # (B, P, F)
        am = np.argmax(fmap, axis=1)               # (B, F), first max on ties
        pooled_parts.append(np.take_along_axis(fmap, am[:, None, :], axis=1)[:, 0, :])
        windows[h] = cols
        maps[h] = fmap
        argmax[h] = am
    pooled = np.concatenate(pooled_parts, axis=1)  # (B, total)
    penult = pooled if dropout_mask is None else pooled * dropout_mask
    logits = penult @ params.V.T + params.b_y
    cache = CnnForwardCache(windows=windows, feature_maps=maps, argmax=argmax,
                            penultimate=penult, pooled=pooled,
                            dropout_mask=dropout_mask, activation=activation)
    return logits, cache


def cnn_forward(
    padded: PaddedTweetMatrix,
    params: CnnParams,
    activation: str = "tanh",
    dropout_mask: np.ndarray | None = None,
) -> np.ndarray:
    """Logits for a single padded tweet."""
    mask = None if dropout_mask is None else dropout_mask[None, :]
    logits, _ = cnn_forward_batch(padded.matrix[None, :, :], params, activation, mask)
    return logits[0]


def cnn_backward_batch(
    dlogits: np.ndarray,
    params: CnnParams,
    cache: CnnForwardCache,
    want_dx: bool = False,
    x_shape: tuple[int, int, int] | None = None,
) -> tuple[dict[str, np.ndarray], np.ndarray | None]:
    """Gradients for all parameters given d loss / d logits.

    The dropout mask is a constant multiplier. Each pooled feature's
    gradient flows only to its argmax window position.
    """
    grads = zero_like_tensors(params.tensors())
    grads["V"] += dlogits.T @ cache.penultimate
    grads["b_y"] += dlogits.sum(axis=0)
    dpenult = dlogits @ params.V                   # (B, total)
    if cache.dropout_mask is not None:
        dpenult = dpenult * cache.dropout_mask
    dX = np.zeros(x_shape) if want_dx else None

    offset = 0
    B = dlogits.shape[0]
    rows = np.arange(B)[:, None]
    for h in params.window_sizes:
        W = params.filters[h]
        F = W.shape[0]
        dpool = dpenult[:, offset:offset + F]      # (B, F)
        offset += F
        fmap = cache.feature_maps[h]
        am = cache.argmax[h]                       # (B, F)
        # activation output and input window at each argmax position
        y_at = np.take_along_axis(fmap, am[:, None, :], axis=1)[:, 0, :]   # (B, F)
        dpre = dpool * activation_grad_from_output(cache.activation, y_at)  # (B, F)
        # gather windows: cols (B, P, h*dim) at am (B, F) -> (B, F, h*dim)
        cols_at = cache.windows[h][rows, am]
        grads[f"filters_{h}"] += np.einsum("bf,bfk->fk", dpre, cols_at).reshape(F, h, -1)
        grads[f"bias_{h}"] += dpre.sum(axis=0)
        if want_dx:
            # scatter each filter's gradient back into its argmax window rows
            contrib = dpre[:, :, None] * W.reshape(F, -1)[None, :, :]      # (B, F, h*dim)
            dim = x_shape[2]
            for b in range(B):
                for f in range(F):
                    start = am[b, f]
                    dX[b, start:start + h, :] += contrib[b, f].reshape(h, dim)
    return grads, dX
