"""
Toy sequence tasks.

phones   pseudo-stationary frame sequences. Piecewise-constant class
          segments (dwell ≤ 50 frames) emitting a fixed unit-norm class mean
          plus Gaussian noise; every frame is labelled with its class.
recall   delayed recall. A one-hot cue at t=0, `delay` distractor frames,
          then one query frame labelled with the cue; all other frames
          carry IGNORE_LABEL.

Generators are pure functions of their arguments.
"""

from __future__ import annotations
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, NamedTuple, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from autodiff.losses import IGNORE_LABEL

MAX_DWELL = 50
MAX_DELAY = 50


class TaskConfigError(ValueError):
    """Raised on invalid task parameters."""

    pass


class TaskKind(str, Enum):
    PHONES = "phones"
    RECALL = "recall"


LabelledSequence = Tuple[np.ndarray, np.ndarray]


class Segment(NamedTuple):
    start: int
    length: int
    label: int


@dataclass
class ToyDataset:
    """Labelled frame sequences (frames T×D float64, labels T int)."""
    sequences: List[LabelledSequence]
    num_classes: int
    input_dim: int
    seed: int
    task: str = TaskKind.PHONES.value
    params: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.sequences)

    def num_frames(self) -> int:
        return sum(int(np.sum(lbl != IGNORE_LABEL)) for _, lbl in self.sequences)

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "num_classes": self.num_classes,
            "input_dim": self.input_dim,
            "seed": self.seed,
            "params": self.params,
            "sequences": [
                {"frames": frames.tolist(), "labels": labels.tolist()}
                for frames, labels in self.sequences
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ToyDataset":
        return cls(
            sequences=[
                (
                    np.asarray(s["frames"], dtype=np.float64).reshape(-1, data["input_dim"]),
                    np.asarray(s["labels"], dtype=int),
                )
                for s in data["sequences"]
            ],
            num_classes=data["num_classes"],
            input_dim=data["input_dim"],
            seed=data["seed"],
            task=data.get("task", TaskKind.PHONES.value),
            params=data.get("params", {}),
        )

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict()), encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ToyDataset":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def equals(self, other: "ToyDataset") -> bool:
        return (
            (self.task, self.num_classes, self.input_dim, self.seed)
            == (other.task, other.num_classes, other.input_dim, other.seed)
            and len(self) == len(other)
            and all(
                np.array_equal(fa, fb) and np.array_equal(la, lb)
                for (fa, la), (fb, lb) in zip(self.sequences, other.sequences)
            )
        )


def draw_segments(
    rng: np.random.Generator,
    seq_len: int,
    num_classes: int,
    min_dwell: int,
    max_dwell: int,
) -> List[Segment]:
    """Cover seq_len frames with segments; each draws its class and dwell independently.

    Neighbouring segments may share a class. The last segment is cut at seq_len.
    """
    segments: List[Segment] = []
    t = 0
    while t < seq_len:
        label = int(rng.integers(num_classes))
        dwell = int(rng.integers(min_dwell, max_dwell + 1))
        segments.append(Segment(start=t, length=min(dwell, seq_len - t), label=label))
        t += dwell
    return segments


def gen_pseudo_phone_task(
    num_seq: int,
    seq_len: int,
    num_classes: int,
    input_dim: int,
    min_dwell: int,
    max_dwell: int,
    noise_std: float,
    seed: int,
) -> ToyDataset:
    """Pseudo-stationary phone-like sequences built from draw_segments."""
    if not (1 <= min_dwell <= max_dwell <= MAX_DWELL):
        raise TaskConfigError(
            f"dwell bounds must satisfy 1 <= min_dwell <= max_dwell <= {MAX_DWELL}, "
            f"got [{min_dwell}, {max_dwell}]"
        )
    if num_seq < 1 or seq_len < 1 or num_classes < 1 or input_dim < 1:
        raise TaskConfigError("num_seq, seq_len, num_classes and input_dim must be positive")
    if noise_std < 0:
        raise TaskConfigError(f"noise_std must be >= 0, got {noise_std}")

    rng = np.random.default_rng(seed)
    means = rng.standard_normal((num_classes, input_dim))
    means /= np.linalg.norm(means, axis=1, keepdims=True)

    sequences = []
    for _ in range(num_seq):
        labels = np.empty(seq_len, dtype=int)
        for seg in draw_segments(rng, seq_len, num_classes, min_dwell, max_dwell):
            labels[seg.start : seg.start + seg.length] = seg.label
        frames = means[labels] + noise_std * rng.standard_normal((seq_len, input_dim))
        sequences.append((frames, labels))

    return ToyDataset(
        sequences=sequences,
        num_classes=num_classes,
        input_dim=input_dim,
        seed=seed,
        task=TaskKind.PHONES.value,
        params={
            "seq_len": seq_len,
            "min_dwell": min_dwell,
            "max_dwell": max_dwell,
            "noise_std": noise_std,
        },
    )


def recall_input_dim(num_symbols: int) -> int:
    """cue one-hot | distractor one-hot | query flag."""
    return 2 * num_symbols + 1


def gen_delayed_recall(num_seq: int, delay: int, num_symbols: int, seed: int) -> ToyDataset:
    """Cue, `delay` distractors, one labelled query frame."""
    if not (0 <= delay <= MAX_DELAY):
        raise TaskConfigError(f"delay must lie in [0, {MAX_DELAY}], got {delay}")
    if num_symbols < 1 or num_seq < 1:
        raise TaskConfigError("num_symbols and num_seq must be positive")

    rng = np.random.default_rng(seed)
    dim = recall_input_dim(num_symbols)
    length = delay + 2
    sequences = []
    for _ in range(num_seq):
        cue = int(rng.integers(num_symbols))
        frames = np.zeros((length, dim))
        frames[0, cue] = 1.0
        for t in range(1, delay + 1):
            frames[t, num_symbols + int(rng.integers(num_symbols))] = 1.0
        frames[-1, 2 * num_symbols] = 1.0
        labels = np.full(length, IGNORE_LABEL, dtype=int)
        labels[-1] = cue
        sequences.append((frames, labels))

    return ToyDataset(
        sequences=sequences,
        num_classes=num_symbols,
        input_dim=dim,
        seed=seed,
        task=TaskKind.RECALL.value,
        params={"delay": delay},
    )


def majority_baseline(dataset: ToyDataset) -> float:
    """Frame accuracy of always predicting the most frequent label."""
    labels = np.concatenate([lbl[lbl != IGNORE_LABEL] for _, lbl in dataset.sequences])
    if labels.size == 0:
        return 0.0
    return float(np.max(np.bincount(labels, minlength=dataset.num_classes)) / labels.size)


class TaskConfig(BaseModel):
    """Which toy task to generate and with which parameters."""
    model_config = ConfigDict(extra="forbid")

    kind: TaskKind = Field(default=TaskKind.PHONES)
    num_seq: int = Field(default=64, ge=1)
    seed: int = Field(default=0, ge=0)
    # phones
    seq_len: int = Field(default=60, ge=1)
    num_classes: int = Field(default=8, ge=1)
    input_dim: int = Field(default=8, ge=1)
    min_dwell: int = Field(default=5, ge=1, le=MAX_DWELL)
    max_dwell: int = Field(default=20, ge=1, le=MAX_DWELL)
    noise_std: float = Field(default=0.3, ge=0.0)
    # recall
    delay: int = Field(default=5, ge=0, le=MAX_DELAY)
    num_symbols: int = Field(default=4, ge=1)

    @property
    def feature_dim(self) -> int:
        if self.kind is TaskKind.RECALL:
            return recall_input_dim(self.num_symbols)
        return self.input_dim

    @property
    def classes(self) -> int:
        return self.num_symbols if self.kind is TaskKind.RECALL else self.num_classes

    def build(self) -> ToyDataset:
        if self.kind is TaskKind.RECALL:
            return gen_delayed_recall(self.num_seq, self.delay, self.num_symbols, self.seed)
        return gen_pseudo_phone_task(
            self.num_seq,
            self.seq_len,
            self.num_classes,
            self.input_dim,
            self.min_dwell,
            self.max_dwell,
            self.noise_std,
            self.seed,
        )
