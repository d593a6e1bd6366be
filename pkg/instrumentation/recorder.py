"""
StateRecorder: captures per-step internal states during forward passes.

Sampling policy: all units, or `sample_units` indices per layer drawn once
from a seeded generator. The index set is fixed for the recorder's lifetime,
so every sequence recorded through one recorder exposes the same units.

One recorder per worker; recorders are not shared across threads.
"""

from __future__ import annotations
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from cells.state import CellState, GateRecord
from instrumentation.trace import SeqId, StateTrace
from numeric import DimensionError

logger = logging.getLogger(__name__)


class RecordOrderError(ValueError):
    """Raised when a (layer, t) record arrives out of order."""

    pass


class StateRecorder:
    """
    Collects StateTraces for every (sequence, layer).

    Example:
        rec = StateRecorder(sample_units=50, seed=7)
        for seq_id, frames in enumerate(dataset):
            rec.begin_sequence(seq_id)
            stack_forward(cfg, params, frames, recorder=rec)
        layer0 = rec.traces_for_layer(0)
    """

    def __init__(self, sample_units: Optional[int] = None, seed: int = 0):
        if sample_units is not None and sample_units <= 0:
            raise ValueError(f"sample_units must be positive, got {sample_units}")
        self.sample_units = sample_units
        self.seed = int(seed)
        self._units: Dict[int, Optional[Tuple[int, ...]]] = {}
        self._finished: List[StateTrace] = []
        self._current: Dict[int, StateTrace] = {}
        self._seq_id: SeqId = 0

    def begin_sequence(self, seq_id: SeqId) -> None:
        """Close the traces of the running sequence and start a new one."""
        self._flush()
        self._seq_id = seq_id

    def unit_indices(self, layer: int, hidden: int) -> Optional[Tuple[int, ...]]:
        """Sampled unit indices for a layer (None = all units)."""
        if layer not in self._units:
            if self.sample_units is None or self.sample_units >= hidden:
                self._units[layer] = None
            else:
                rng = np.random.default_rng([self.seed, layer])
                picked = np.sort(rng.choice(hidden, size=self.sample_units, replace=False))
                self._units[layer] = tuple(int(u) for u in picked)
                logger.debug(f"layer {layer}: sampled {self.sample_units}/{hidden} units")
        return self._units[layer]

    def record(
        self,
        layer: int,
        t: int,
        state: CellState,
        gates: GateRecord,
        kind: str = "lstm",
    ) -> None:
        """Append one step of one layer; t must run 0, 1, 2, ... per layer."""
        trace = self._current.get(layer)
        if trace is None:
            if t != 0:
                raise RecordOrderError(f"layer {layer}: first record must have t=0, got t={t}")
            trace = StateTrace(
                layer=layer,
                seq_id=self._seq_id,
                kind=str(getattr(kind, "value", kind)),
                units=self.unit_indices(layer, state.dim),
            )
            self._current[layer] = trace
        try:
            trace.append(t, state, gates)
        except DimensionError:
            raise
        except ValueError as e:
            raise RecordOrderError(str(e)) from e

    def _flush(self) -> None:
        for layer in sorted(self._current):
            self._finished.append(self._current[layer])
        self._current = {}

    @property
    def traces(self) -> List[StateTrace]:
        """Every trace recorded so far, finished sequences first."""
        return self._finished + [self._current[k] for k in sorted(self._current)]

    def traces_for_layer(self, layer: int) -> List[StateTrace]:
        return [tr for tr in self.traces if tr.layer == layer]

    def __len__(self) -> int:
        return sum(len(tr) for tr in self.traces)
