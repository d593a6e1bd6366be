"""
Noise-insertion probe.

A segment of i.i.d. Gaussian frames is spliced into a sequence. Clean frame
t is compared with noisy frame t for t < noise_pos and with noisy frame
t + noise_len afterwards, so every clean frame has a partner. The decay
length of a series is the first post-insertion frame from which the series
stays below epsilon for `sustain` consecutive frames; a series without a
full below-epsilon window is censored at the number of post-insertion frames.
"""

from __future__ import annotations
import logging

import numpy as np

from cells.network import NetworkConfig, as_frames, run_forward
from cells.params import NetworkParams
from probes.reports import LayerPerturbation, NoiseSegment, PerturbationReport, ProbeError

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.01
DEFAULT_SUSTAIN = 5


def decay_length(series: np.ndarray, epsilon: float, sustain: int) -> int:
    """First index k with series[k : k+sustain] all below epsilon; len(series) if none.

    Only complete windows count, so a series that dips below epsilon in its
    last few frames is still censored.
    """
    below = series < epsilon
    n = below.shape[0]
    for k in range(n - sustain + 1):
        if np.all(below[k : k + sustain]):
            return k
    return n


def _cell_matrix(tape, layer: int) -> np.ndarray:
    return np.stack([rec.state.c for rec in tape.steps[layer]]).astype(np.float64)


def perturbation_probe(
    params: NetworkParams,
    cfg: NetworkConfig,
    seq: np.ndarray,
    noise_pos: int,
    noise_len: int,
    noise_std: float = 1.0,
    epsilon: float = DEFAULT_EPSILON,
    seed: int = 0,
    sustain: int = DEFAULT_SUSTAIN,
) -> PerturbationReport:
    """
    Compare cell states with and without an inserted noise segment.

    Returns:
        PerturbationReport with one LayerPerturbation per layer; each delta
        matrix is units × clean frames

    Raises:
        ProbeError: If the insertion point or segment is out of range
    """
    frames = as_frames(seq)
    length = frames.shape[0]
    if not (0 <= noise_pos < length):
        raise ProbeError(f"noise_pos must lie in [0, {length - 1}], got {noise_pos}")
    if noise_len < 0:
        raise ProbeError(f"noise_len must be >= 0, got {noise_len}")
    if noise_std < 0 or epsilon <= 0 or sustain < 1:
        raise ProbeError("noise_std must be >= 0, epsilon > 0 and sustain >= 1")

    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, noise_std, size=(noise_len, frames.shape[1]))
    noisy = np.concatenate([frames[:noise_pos], noise, frames[noise_pos:]], axis=0)

    clean_tape = run_forward(cfg, params, frames)
    noisy_tape = run_forward(cfg, params, noisy)

    report = PerturbationReport(
        noise=NoiseSegment(position=noise_pos, length=noise_len, std=noise_std),
        epsilon=epsilon,
        sustain=sustain,
    )
    partner = np.concatenate([np.arange(noise_pos), np.arange(noise_pos, length) + noise_len])
    for layer in range(cfg.layers):
        clean = _cell_matrix(clean_tape, layer)
        shifted = _cell_matrix(noisy_tape, layer)[partner]
        delta = np.abs(clean - shifted).T
        post = delta[:, noise_pos:]
        unit_decay = np.array([decay_length(row, epsilon, sustain) for row in post], dtype=int)
        report.layers.append(
            LayerPerturbation(
                layer=layer,
                delta=delta,
                unit_decay=unit_decay,
                decay_len=decay_length(post.max(axis=0), epsilon, sustain),
            )
        )

    logger.info(
        f"perturbation at {noise_pos} (+{noise_len} frames, std {noise_std}): "
        f"decay lengths {report.decay_lengths()}"
    )
    return report
