"""GateLab autodiff: BPTT, losses and the finite-difference checker."""

from autodiff.bptt import (
    NonFiniteLossError,
    SequenceGradient,
    Tape,
    batch_gradients,
    bptt,
    sequence_loss,
)
from autodiff.gradcheck import GradCheckReport, grad_check, relative_error
from autodiff.losses import IGNORE_LABEL, LossKind, frame_losses, log_softmax

__all__ = [
    "GradCheckReport",
    "IGNORE_LABEL",
    "LossKind",
    "NonFiniteLossError",
    "SequenceGradient",
    "Tape",
    "batch_gradients",
    "bptt",
    "frame_losses",
    "grad_check",
    "log_softmax",
    "relative_error",
    "sequence_loss",
]
