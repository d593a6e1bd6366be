"""
Backpropagation through time for the stacked network.

bptt() runs the forward pass on a tape, scores every frame and pushes the
loss gradient back through the output projection, every layer and every
time step.
"""

from __future__ import annotations
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from autodiff.backward import network_backward
from autodiff.losses import LossKind, frame_losses, frame_weights
from cells.network import ForwardTape, NetworkConfig, as_frames, run_forward
from cells.params import GradientSet, NetworkParams

logger = logging.getLogger(__name__)

Tape = ForwardTape


class NonFiniteLossError(RuntimeError):
    """Raised when a frame loss is NaN/Inf; `step` is the first offending frame."""

    def __init__(self, step: int, value: float):
        self.step = step
        self.value = value
        super().__init__(f"non-finite loss {value} at frame {step}")


@dataclass(frozen=True)
class SequenceGradient:
    """Loss and gradients of one sequence."""
    loss: float
    grads: GradientSet
    frames: float  # total frame weight that contributed
    correct: float  # weighted count of argmax hits


def sequence_loss(
    cfg: NetworkConfig,
    params: NetworkParams,
    seq,
    targets,
    loss: LossKind = LossKind.CROSS_ENTROPY,
    weights: Optional[np.ndarray] = None,
):
    """Weighted total loss only (no backward), in the dtype of `params`."""
    labels = np.asarray(targets, dtype=int)
    tape = run_forward(cfg, params, seq)
    if labels.shape[0] != tape.num_frames:
        raise ValueError(f"{labels.shape[0]} targets for {tape.num_frames} frames")
    losses, _ = frame_losses(tape.logits, labels, loss)
    w = frame_weights(labels, weights).astype(tape.logits.dtype)
    return np.sum(losses * w)


def _bptt(cfg, params, seq, targets, loss, weights) -> SequenceGradient:
    frames = as_frames(seq)
    labels = np.asarray(targets, dtype=int)
    if labels.ndim != 1 or labels.shape[0] != frames.shape[0]:
        raise ValueError(f"{labels.shape[0]} targets for {frames.shape[0]} frames")

    tape = run_forward(cfg, params, frames)
    losses, dlogits = frame_losses(tape.logits, labels, loss)
    w = frame_weights(labels, weights)
    weighted = losses * w
    bad = np.flatnonzero(~np.isfinite(weighted))
    if bad.size:
        raise NonFiniteLossError(int(bad[0]), float(weighted[bad[0]]))

    grads = network_backward(params, tape, dlogits * w[:, None], candidate=cfg.lazy_candidate)
    hits = (np.argmax(tape.logits, axis=1) == labels).astype(np.float64)
    return SequenceGradient(
        loss=float(np.sum(weighted)),
        grads=grads,
        frames=float(np.sum(w)),
        correct=float(np.sum(hits * w)),
    )


def bptt(
    cfg: NetworkConfig,
    params: NetworkParams,
    seq,
    targets,
    loss: LossKind = LossKind.CROSS_ENTROPY,
    weights: Optional[np.ndarray] = None,
) -> Tuple[float, GradientSet]:
    """
    Total per-frame loss and its exact gradient w.r.t. every parameter.

    Args:
        seq: frames × input_dim (or a list of vectors)
        targets: class id per frame, IGNORE_LABEL (-1) to skip a frame
        weights: optional per-frame loss weights (0 = no contribution)

    Raises:
        ValueError: If targets and frames differ in length
        NonFiniteLossError: If any frame loss is NaN/Inf
    """
    result = _bptt(cfg, params, seq, targets, loss, weights)
    return result.loss, result.grads


Example = Tuple[np.ndarray, np.ndarray]


def batch_gradients(
    cfg: NetworkConfig,
    params: NetworkParams,
    batch: Sequence[Example],
    loss: LossKind = LossKind.CROSS_ENTROPY,
    workers: int = 1,
) -> SequenceGradient:
    """
    Summed loss and gradients over a batch of (frames, labels).

    Per-sequence work may run on `workers` threads; results are reduced in
    batch order so the sum is identical for any worker count.
    """
    if not batch:
        raise ValueError("empty batch")

    def one(example: Example) -> SequenceGradient:
        frames, labels = example
        return _bptt(cfg, params, frames, labels, loss, None)

    if workers > 1 and len(batch) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, batch))
    else:
        parts = [one(ex) for ex in batch]

    total = parts[0].grads
    for part in parts[1:]:
        total = total.plus(part.grads)
    return SequenceGradient(
        loss=sum(p.loss for p in parts),
        grads=total,
        frames=sum(p.frames for p in parts),
        correct=sum(p.correct for p in parts),
    )
