"""Probe report types."""

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np


class ProbeError(ValueError):
    """Raised when a probe cannot run on the given traces or arguments."""

    pass


@dataclass(frozen=True)
class HistogramReport:
    """Distribution of cell activations for one layer.

    unit_counts has one row per sampled unit; every row sums to the number of
    observed frames. Values outside [lo, hi] were clamped onto the bounds
    before binning.
    """
    layer: int
    kind: str
    units: Tuple[int, ...]
    edges: np.ndarray
    unit_counts: np.ndarray
    bounds: Tuple[float, float]
    observations: int
    near_zero_fraction: float
    near_bound_fraction: float

    @property
    def pooled(self) -> np.ndarray:
        return self.unit_counts.sum(axis=0)


@dataclass(frozen=True)
class TraceProjection:
    """2-D view of one layer's cell trajectory plus its smoothness."""
    layer: int
    method: str
    points: np.ndarray
    smoothness: float
    seq_id: object = 0
    explained_variance: Optional[Tuple[float, float]] = None

    def __len__(self) -> int:
        return int(self.points.shape[0])


@dataclass(frozen=True)
class LayerPerturbation:
    """|Δc| of one layer: units × clean frames, with decay lengths from the insertion point."""
    layer: int
    delta: np.ndarray
    unit_decay: np.ndarray
    decay_len: int

    @property
    def median_unit_decay(self) -> float:
        return float(np.median(self.unit_decay))


@dataclass(frozen=True)
class NoiseSegment:
    position: int
    length: int
    std: float


@dataclass
class PerturbationReport:
    """Clean-vs-noisy cell differences, aligned around an inserted noise segment."""
    noise: NoiseSegment
    epsilon: float
    sustain: int
    layers: List[LayerPerturbation] = field(default_factory=list)

    def decay_lengths(self) -> Dict[int, int]:
        return {lp.layer: lp.decay_len for lp in self.layers}
