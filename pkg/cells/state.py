"""Per-step cell state and gate activations."""

from __future__ import annotations
from dataclasses import dataclass
from enum import Enum

import numpy as np

from numeric import Vector


class CellKind(str, Enum):
    """Recurrent unit types."""
    LSTM = "lstm"            # peephole LSTM, cell updated before the output gate
    GRU = "gru"              # single update gate, cell updated as the final step
    LAZY_LSTM = "lazy_lstm"  # LSTM reordered so the cell is updated last


class LazyCandidate(str, Enum):
    """Which unit output feeds the lazy LSTM candidate."""
    CURRENT = "current"    # m_t, mirrors the GRU ordering
    PREVIOUS = "previous"  # m_{t-1}, as in the plain LSTM


@dataclass(frozen=True)
class CellState:
    """Cell activation c and unit output m at one time step."""
    c: Vector
    m: Vector

    @property
    def dim(self) -> int:
        return int(self.c.shape[0])

    @classmethod
    def zeros(cls, hidden: int, dtype=np.float64) -> "CellState":
        return cls(c=np.zeros(hidden, dtype=dtype), m=np.zeros(hidden, dtype=dtype))


@dataclass(frozen=True)
class GateRecord:
    """Gate activations of one step.

    g_pre holds the candidate pre-activation; the candidate itself is tanh(g_pre).
    For GRU steps f is exactly 1 - i.
    """
    i: Vector
    f: Vector
    o: Vector
    g_pre: Vector

    @property
    def g(self) -> Vector:
        return np.tanh(self.g_pre)
