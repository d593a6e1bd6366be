"""
Trace JSONL export/import.

One time step per line:
    {"seq": id, "layer": int, "t": int, "c": [...], "m": [...],
     "i": [...], "f": [...], "o": [...], "g_pre": [...], "kind": str, "units": [...] | null}

Floats are written with Python's shortest round-trip repr, so import(export(x)) == x.
"""

from __future__ import annotations
import json
import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from instrumentation.trace import StateTrace, TraceStep

logger = logging.getLogger(__name__)


class TraceIOError(RuntimeError):
    """Raised when a trace cannot be written or read; carries the path."""

    def __init__(self, path: Union[str, Path], cause: str):
        self.path = str(path)
        super().__init__(f"{self.path}: {cause}")


class TraceLine(BaseModel):
    """Schema of one JSONL line."""
    model_config = ConfigDict(extra="forbid")

    seq: Union[int, str]
    layer: int
    t: int
    c: List[float]
    m: List[float]
    i: List[float]
    f: List[float]
    o: List[float]
    g_pre: List[float]
    kind: str = "lstm"
    units: Optional[List[int]] = None


def _line(trace: StateTrace, step: TraceStep) -> str:
    payload = {
        "seq": trace.seq_id,
        "layer": trace.layer,
        "t": step.t,
        "c": step.c.tolist(),
        "m": step.m.tolist(),
        "i": step.i.tolist(),
        "f": step.f.tolist(),
        "o": step.o.tolist(),
        "g_pre": step.g_pre.tolist(),
        "kind": trace.kind,
        "units": list(trace.units) if trace.units is not None else None,
    }
    return json.dumps(payload, separators=(",", ":"))


def export_trace(trace: StateTrace, path: Union[str, Path]) -> Path:
    """Write a trace as JSONL.

    Raises:
        ValueError: If the trace is empty (no file is created)
        TraceIOError: On filesystem failures
    """
    if len(trace) == 0:
        raise ValueError(f"refusing to export empty trace (layer {trace.layer}, seq {trace.seq_id})")
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            for step in trace.steps:
                fh.write(_line(trace, step))
                fh.write("\n")
    except OSError as e:
        raise TraceIOError(path, f"write failed: {e}") from e
    logger.debug(f"exported {len(trace)} steps of layer {trace.layer} to {path}")
    return path


def import_trace(path: Union[str, Path]) -> StateTrace:
    """Read a JSONL trace written by export_trace."""
    path = Path(path)
    try:
        raw_lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise TraceIOError(path, f"read failed: {e}") from e

    lines = []
    for n, raw in enumerate(raw_lines, start=1):
        if not raw.strip():
            continue
        try:
            lines.append((n, TraceLine.model_validate_json(raw)))
        except ValidationError as e:
            raise TraceIOError(path, f"line {n} is not a valid trace record: {e.error_count()} error(s)") from e
    if not lines:
        raise TraceIOError(path, "no trace records")

    first = lines[0][1]
    width = len(first.c)
    if first.units is not None and len(first.units) != width:
        raise TraceIOError(path, f"line {lines[0][0]} lists {len(first.units)} units for {width}-wide vectors")
    trace = StateTrace(
        layer=first.layer,
        seq_id=first.seq,
        kind=first.kind,
        units=tuple(first.units) if first.units is not None else None,
    )
    for n, (line_no, ln) in enumerate(lines):
        if ln.t != n or ln.layer != first.layer or ln.seq != first.seq:
            raise TraceIOError(path, f"line {line_no} breaks the (seq, layer, t) ordering")
        ragged = [key for key in ("c", "m", "i", "f", "o", "g_pre") if len(getattr(ln, key)) != width]
        if ragged:
            raise TraceIOError(path, f"line {line_no}: {', '.join(ragged)} width differs from {width}")
        trace.steps.append(
            TraceStep(
                t=ln.t,
                c=np.asarray(ln.c, dtype=np.float64),
                m=np.asarray(ln.m, dtype=np.float64),
                i=np.asarray(ln.i, dtype=np.float64),
                f=np.asarray(ln.f, dtype=np.float64),
                o=np.asarray(ln.o, dtype=np.float64),
                g_pre=np.asarray(ln.g_pre, dtype=np.float64),
            )
        )
    return trace
