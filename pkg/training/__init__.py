"""GateLab training: toy tasks and the SGD loop."""

from training.tasks import (
    Segment,
    TaskConfig,
    TaskConfigError,
    TaskKind,
    ToyDataset,
    draw_segments,
    gen_delayed_recall,
    gen_pseudo_phone_task,
    majority_baseline,
    recall_input_dim,
)
from training.trainer import (
    DivergenceError,
    EpochMetrics,
    TrainConfig,
    clip_by_global_norm,
    evaluate,
    train,
)

__all__ = [
    "DivergenceError",
    "EpochMetrics",
    "Segment",
    "TaskConfig",
    "TaskConfigError",
    "TaskKind",
    "ToyDataset",
    "TrainConfig",
    "clip_by_global_norm",
    "draw_segments",
    "evaluate",
    "gen_delayed_recall",
    "gen_pseudo_phone_task",
    "majority_baseline",
    "recall_input_dim",
    "train",
]
