"""Shared fixtures and builders for the GateLab tests."""

from dataclasses import replace

import numpy as np
import pytest

from cells.network import NetworkConfig, init_params, zero_params
from cells.params import GruParams, LstmParams, NetworkParams


def randomize(layer, seed: int, scale: float = 0.5):
    """Same-shaped layer with every tensor (biases and peepholes included) drawn uniform ±scale."""
    rng = np.random.default_rng(seed)
    return layer.map(lambda a: rng.uniform(-scale, scale, size=a.shape))


def zero_lstm(hidden: int = 1, inp: int = 1) -> LstmParams:
    cfg = NetworkConfig(cell_kind="lstm", input_dim=inp, hidden_dim=hidden, output_dim=1)
    return zero_params(cfg).layers[0]


def zero_gru(hidden: int = 1, inp: int = 1) -> GruParams:
    cfg = NetworkConfig(cell_kind="gru", input_dim=inp, hidden_dim=hidden, output_dim=1)
    return zero_params(cfg).layers[0]


def with_output(params: NetworkParams, W_out: np.ndarray, b_out=None) -> NetworkParams:
    b = np.zeros(W_out.shape[0]) if b_out is None else b_out
    return replace(params, W_out=W_out, b_out=b)


@pytest.fixture
def small_lstm_cfg():
    return NetworkConfig(cell_kind="lstm", layers=2, input_dim=3, hidden_dim=4, output_dim=3, seed=0)


@pytest.fixture
def small_gru_cfg():
    return NetworkConfig(cell_kind="gru", layers=2, input_dim=3, hidden_dim=4, output_dim=3, seed=0)


@pytest.fixture
def seq_3d():
    """Seeded 7-frame, 3-dim input sequence."""
    return np.random.default_rng(11).standard_normal((7, 3))


@pytest.fixture
def trained_like_params(small_lstm_cfg):
    return init_params(small_lstm_cfg)
