"""
State traces: the time-indexed record of one layer over one sequence.

A trace holds either every unit of the layer or a fixed subset (`units`),
in which case every stored vector is restricted to those indices.
"""

from __future__ import annotations
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from cells.state import CellState, GateRecord
from numeric import DimensionError, Vector

SeqId = Union[int, str]


@dataclass(frozen=True)
class TraceStep:
    """One recorded frame."""
    t: int
    c: Vector
    m: Vector
    i: Vector
    f: Vector
    o: Vector
    g_pre: Vector

    def same_as(self, other: "TraceStep") -> bool:
        return self.t == other.t and all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("c", "m", "i", "f", "o", "g_pre")
        )


@dataclass
class StateTrace:
    """Per-layer record of cell/output/gate vectors for a whole sequence."""
    layer: int
    seq_id: SeqId = 0
    kind: str = "lstm"
    units: Optional[Tuple[int, ...]] = None
    steps: List[TraceStep] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def width(self) -> int:
        """Number of stored units per vector (0 before the first step)."""
        return int(self.steps[0].c.shape[0]) if self.steps else 0

    def append(self, t: int, state: CellState, gates: GateRecord) -> None:
        """Append a frame; t must continue 0, 1, 2, ..."""
        expected = len(self.steps)
        if t != expected:
            raise ValueError(f"layer {self.layer}: expected t={expected}, got t={t}")
        idx = None if self.units is None else np.asarray(self.units, dtype=int)

        def pick(v: Vector) -> Vector:
            return np.array(v if idx is None else v[idx], dtype=np.float64)

        step = TraceStep(
            t=t,
            c=pick(state.c),
            m=pick(state.m),
            i=pick(gates.i),
            f=pick(gates.f),
            o=pick(gates.o),
            g_pre=pick(gates.g_pre),
        )
        if self.steps and step.c.shape != self.steps[0].c.shape:
            raise DimensionError(
                f"trace width changed from {self.steps[0].c.shape[0]} to {step.c.shape[0]}"
            )
        self.steps.append(step)

    def cells(self) -> np.ndarray:
        """Cell vectors as a frames × units matrix."""
        if not self.steps:
            return np.zeros((0, 0))
        return np.stack([s.c for s in self.steps])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StateTrace):
            return NotImplemented
        return (
            self.layer == other.layer
            and self.seq_id == other.seq_id
            and self.kind == other.kind
            and self.units == other.units
            and len(self.steps) == len(other.steps)
            and all(a.same_as(b) for a, b in zip(self.steps, other.steps))
        )
