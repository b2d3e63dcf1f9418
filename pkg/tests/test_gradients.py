"""Analytic gradients versus central finite differences.

Every parameter tensor of both architectures is checked entry by entry.
The relu case keeps nonzero filter biases: with zero biases every padded
window sits exactly on the activation kink, where a finite difference
straddles the non-differentiable point and disagrees with any one-sided
subgradient choice by construction.
"""

import numpy as np
import pytest

from multisent.nn import (
    NeuralModel,
    init_cnn_params,
    init_lstm_params,
    loss_and_gradients,
)
from multisent.rng import SplitMix64, derive_stream

from conftest import finite_difference, rel_err

TOL = 1e-4


def make_batch(seed: int, lens: list[int], dim: int) -> list[tuple[np.ndarray, int]]:
    batch = []
    for j, n in enumerate(lens):
        rng = SplitMix64(derive_stream(seed, "gradbatch", j))
        X = rng.uniform_array(n * dim, -1.0, 1.0).reshape(n, dim)
        batch.append((X, j % 3))
    return batch


def check_model(model: NeuralModel, batch, dropout_seed=None):
    loss, grads, _ = loss_and_gradients(model, batch, dropout_seed=dropout_seed)
    assert np.isfinite(loss)
    numeric = finite_difference(
        lambda: loss_and_gradients(model, batch, dropout_seed=dropout_seed)[0],
        model.params.tensors(),
    )
    for name, g in grads.items():
        err = rel_err(g, numeric[name])
        assert err <= TOL, f"{name}: rel err {err:.3e}"


class TestLstmGradients:
    @pytest.mark.parametrize("mode", ["tanh", "sigmoid"])
    def test_all_tensors(self, mode):
        params = init_lstm_params(input_dim=3, hidden_dim=4, seed=2)
        model = NeuralModel(kind="lstm", params=params, max_len=6,
                            candidate_activation=mode, dropout_rate=0.0)
        check_model(model, make_batch(1, [4, 2, 5], 3))

    def test_mixed_lengths_including_one(self):
        params = init_lstm_params(input_dim=3, hidden_dim=3, seed=5)
        model = NeuralModel(kind="lstm", params=params, max_len=6, dropout_rate=0.0)
        check_model(model, make_batch(2, [1, 6, 3], 3))

    def test_with_fixed_dropout_mask(self):
        # The mask is a deterministic function of the seed, so treating it
        # as a constant keeps the loss differentiable in the parameters.
        params = init_lstm_params(input_dim=3, hidden_dim=4, seed=7)
        model = NeuralModel(kind="lstm", params=params, max_len=5, dropout_rate=0.5)
        check_model(model, make_batch(3, [3, 5], 3), dropout_seed=11)

    def test_input_gradients(self):
        params = init_lstm_params(input_dim=3, hidden_dim=4, seed=9)
        model = NeuralModel(kind="lstm", params=params, max_len=5, dropout_rate=0.0)
        batch = make_batch(4, [3, 2], 3)
        _, _, dX = loss_and_gradients(model, batch, want_dx=True)
        assert dX is not None
        for b, (X, _) in enumerate(batch):
            numeric = finite_difference(
                lambda: loss_and_gradients(model, batch)[0], {"x": X})["x"]
            assert rel_err(dX[b, : X.shape[0]], numeric) <= TOL
        # Padding rows carry no gradient.
        assert np.all(dX[1, 2:] == 0.0)


class TestCnnGradients:
    @pytest.mark.parametrize("act", ["tanh", "sigmoid"])
    def test_all_tensors(self, act):
        params = init_cnn_params(input_dim=3, seed=2, window_sizes=(2, 3),
                                 filters_per_window=2)
        model = NeuralModel(kind="cnn", params=params, max_len=6,
                            activation=act, dropout_rate=0.0)
        check_model(model, make_batch(5, [4, 3, 6], 3))

    def test_relu_with_nonzero_biases(self):
        params = init_cnn_params(input_dim=3, seed=3, window_sizes=(2,),
                                 filters_per_window=3)
        # Move every bias off the kink that zero input rows would hit.
        params.biases[2] += np.array([0.31, -0.17, 0.23])
        model = NeuralModel(kind="cnn", params=params, max_len=5,
                            activation="relu", dropout_rate=0.0)
        check_model(model, make_batch(6, [3, 5, 2], 3))

    def test_with_fixed_dropout_mask(self):
        params = init_cnn_params(input_dim=3, seed=4, window_sizes=(2, 3),
                                 filters_per_window=2)
        model = NeuralModel(kind="cnn", params=params, max_len=6, dropout_rate=0.5)
        check_model(model, make_batch(7, [4, 6], 3), dropout_seed=13)

    def test_input_gradients(self):
        params = init_cnn_params(input_dim=3, seed=6, window_sizes=(2,),
                                 filters_per_window=2)
        model = NeuralModel(kind="cnn", params=params, max_len=5, dropout_rate=0.0)
        batch = make_batch(8, [3, 4], 3)
        _, _, dX = loss_and_gradients(model, batch, want_dx=True)
        assert dX is not None
        for b, (X, _) in enumerate(batch):
            numeric = finite_difference(
                lambda: loss_and_gradients(model, batch)[0], {"x": X})["x"]
            assert rel_err(dX[b, : X.shape[0]], numeric) <= TOL

    def test_max_pool_routes_gradient_to_argmax_window(self):
        # With a single example and a single filter, only the winning
        # window's inputs receive gradient through the pooled feature.
        params = init_cnn_params(input_dim=2, seed=8, window_sizes=(2,),
                                 filters_per_window=1)
        model = NeuralModel(kind="cnn", params=params, max_len=4, dropout_rate=0.0)
        rng = SplitMix64(derive_stream(9, "pool"))
        X = rng.uniform_array(8, -1.0, 1.0).reshape(4, 2)
        _, _, dX = loss_and_gradients(model, [(X, 0)], want_dx=True)
        rows_hit = np.unique(np.nonzero(np.any(dX[0] != 0.0, axis=1))[0])
        # A width-2 window touches exactly two consecutive rows.
        assert rows_hit.size == 2
        assert rows_hit[1] == rows_hit[0] + 1
