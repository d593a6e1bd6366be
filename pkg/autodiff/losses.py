"""Frame-level losses on logits.

Labels equal to IGNORE_LABEL (and frames with zero weight) contribute exactly
zero loss and zero gradient.
"""

from __future__ import annotations
from enum import Enum
from typing import Optional, Tuple

import numpy as np

IGNORE_LABEL = -1


class LossKind(str, Enum):
    """Per-frame loss on the logits."""
    CROSS_ENTROPY = "cross_entropy"  # softmax + negative log-likelihood, log-space
    SQUARED_ERROR = "squared_error"  # 0.5 * ||logits - onehot||²


def frame_weights(labels: np.ndarray, weights: Optional[np.ndarray] = None) -> np.ndarray:
    """Effective per-frame weight: 0 for ignored frames, else the given weight (default 1)."""
    w = np.ones(labels.shape[0]) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != labels.shape:
        raise ValueError(f"weights length {w.shape[0]} does not match {labels.shape[0]} labels")
    return np.where(labels == IGNORE_LABEL, 0.0, w)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise log-softmax via the max-shifted log-sum-exp."""
    shift = logits - np.max(logits, axis=-1, keepdims=True)
    return shift - np.log(np.sum(np.exp(shift), axis=-1, keepdims=True))


def frame_losses(
    logits: np.ndarray,
    labels: np.ndarray,
    kind: LossKind = LossKind.CROSS_ENTROPY,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Unweighted per-frame losses and their gradients w.r.t. the logits.

    Ignored frames get loss 0 and gradient 0.

    Returns:
        (losses shape (T,), dlogits shape (T, K))
    """
    T, K = logits.shape
    active = labels != IGNORE_LABEL
    safe = np.where(active, labels, 0).astype(int)
    if np.any(safe < 0) or np.any(safe >= K):
        raise ValueError(f"labels must lie in [0, {K}) or equal {IGNORE_LABEL}")
    onehot = np.zeros_like(logits)
    onehot[np.arange(T), safe] = 1.0

    if LossKind(kind) is LossKind.SQUARED_ERROR:
        diff = logits - onehot
        losses = 0.5 * np.sum(diff * diff, axis=1)
        grads = diff
    else:
        logp = log_softmax(logits)
        losses = -logp[np.arange(T), safe]
        grads = np.exp(logp) - onehot

    mask = active.astype(logits.dtype)
    return losses * mask, grads * mask[:, None]
