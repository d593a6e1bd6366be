"""
Plain SGD trainer with global-norm gradient clipping.

Each update uses the mean per-frame loss of one batch. Sequence order is
reshuffled every epoch from a generator seeded by TrainConfig.seed, and the
network is initialised from NetworkConfig.seed, so a run is a pure function
of its configs.
"""

from __future__ import annotations
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from autodiff.bptt import NonFiniteLossError, batch_gradients
from autodiff.losses import LossKind, frame_losses, frame_weights
from cells.network import NetworkConfig, init_params, run_forward
from cells.params import NetworkParams
from config import settings
from numeric import DimensionError, NonFiniteError
from training.tasks import TaskConfig, ToyDataset

logger = logging.getLogger(__name__)


class DivergenceError(RuntimeError):
    """Raised when training produces a non-finite loss."""

    def __init__(self, epoch: int, step: int, value: float):
        self.epoch = epoch
        self.step = step
        self.value = value
        super().__init__(f"training diverged at epoch {epoch}, step {step} (loss={value})")


class TrainConfig(BaseModel):
    """Optimiser and schedule settings plus the task to train on."""
    model_config = ConfigDict(extra="forbid")

    lr: float = Field(default=0.05, ge=0.0, description="SGD step size")
    clip_norm: float = Field(default=5.0, gt=0.0, description="Global gradient-norm cap")
    epochs: int = Field(default=10, ge=0)
    batch_size: int = Field(default=8, ge=1)
    seed: int = Field(default=0, ge=0, description="Shuffle seed")
    loss: LossKind = Field(default=LossKind.CROSS_ENTROPY)
    task: TaskConfig = Field(default_factory=TaskConfig)


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    loss: float
    frame_acc: float

    def to_row(self) -> dict:
        return {"epoch": self.epoch, "loss": self.loss, "frame_acc": self.frame_acc}


def clip_by_global_norm(grads: NetworkParams, clip_norm: float) -> Tuple[NetworkParams, float]:
    """Rescale so the global norm is at most clip_norm; returns (grads, original norm)."""
    norm = grads.global_norm()
    if norm > clip_norm:
        return grads.scaled(clip_norm / norm), norm
    return grads, norm


def evaluate(
    net: NetworkConfig,
    params: NetworkParams,
    dataset: ToyDataset,
    loss: LossKind = LossKind.CROSS_ENTROPY,
) -> Tuple[float, float]:
    """Mean per-frame loss and frame accuracy over labelled frames."""
    total, hits, frames = 0.0, 0.0, 0.0
    for seq, labels in dataset.sequences:
        tape = run_forward(net, params, seq)
        losses, _ = frame_losses(tape.logits, labels, loss)
        w = frame_weights(labels)
        total += float(np.sum(losses * w))
        hits += float(np.sum((np.argmax(tape.logits, axis=1) == labels) * w))
        frames += float(np.sum(w))
    if frames == 0:
        return 0.0, 0.0
    return total / frames, hits / frames


def train(
    cfg: TrainConfig,
    net: NetworkConfig,
    dataset: Optional[ToyDataset] = None,
    params: Optional[NetworkParams] = None,
    workers: Optional[int] = None,
    on_epoch: Optional[Callable[[EpochMetrics], None]] = None,
) -> Tuple[NetworkParams, List[EpochMetrics]]:
    """
    Train a network with clipped SGD.

    Args:
        cfg: optimiser settings; its task builds the dataset when none is given
        net: network shape and init seed
        dataset: optional prebuilt dataset
        params: optional starting parameters (default: init_params(net))
        workers: threads for per-sequence gradients (default: settings.WORKERS)
        on_epoch: callback receiving each epoch's metrics

    Returns:
        (trained params, per-epoch metrics)

    Raises:
        DivergenceError: On a non-finite batch loss
        DimensionError: If dataset and network shapes disagree
    """
    data = dataset if dataset is not None else cfg.task.build()
    if len(data) == 0:
        raise ValueError("dataset is empty")
    if data.input_dim != net.input_dim or data.num_classes != net.output_dim:
        raise DimensionError(
            f"dataset is {data.input_dim}-dim / {data.num_classes} classes but network expects "
            f"{net.input_dim}-dim / {net.output_dim} outputs"
        )
    workers = workers or settings.WORKERS
    current = params if params is not None else init_params(net)
    rng = np.random.default_rng(cfg.seed)
    history: List[EpochMetrics] = []

    logger.info(
        f"training {net.cell_kind.value} x{net.layers} (residual={net.residual}) on "
        f"{len(data)} {data.task} sequences, lr={cfg.lr}, clip={cfg.clip_norm}"
    )
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(data))
        for step, start in enumerate(range(0, len(order), cfg.batch_size)):
            batch = [data.sequences[k] for k in order[start : start + cfg.batch_size]]
            try:
                result = batch_gradients(net, current, batch, loss=cfg.loss, workers=workers)
            except NonFiniteLossError as e:
                raise DivergenceError(epoch, step, e.value) from e
            if not np.isfinite(result.loss):
                raise DivergenceError(epoch, step, result.loss)
            if result.frames == 0:
                continue
            grads, norm = clip_by_global_norm(result.grads.scaled(1.0 / result.frames), cfg.clip_norm)
            try:
                current = current.plus(grads, scale=-cfg.lr)
            except NonFiniteError as e:
                raise DivergenceError(epoch, step, float("nan")) from e
            logger.debug(f"epoch {epoch} step {step}: loss={result.loss / result.frames:.4f} |g|={norm:.3e}")

        mean_loss, acc = evaluate(net, current, data, cfg.loss)
        if not np.isfinite(mean_loss):
            raise DivergenceError(epoch, -1, mean_loss)
        metrics = EpochMetrics(epoch=epoch, loss=mean_loss, frame_acc=acc)
        history.append(metrics)
        logger.info(f"epoch {epoch}: loss={mean_loss:.4f} frame_acc={acc:.3f}")
        if on_epoch is not None:
            on_epoch(metrics)

    return current, history
