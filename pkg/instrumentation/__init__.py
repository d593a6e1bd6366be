"""GateLab instrumentation: state recording and trace serialization."""

from instrumentation.recorder import RecordOrderError, StateRecorder
from instrumentation.trace import StateTrace, TraceStep
from instrumentation.trace_io import TraceIOError, TraceLine, export_trace, import_trace

__all__ = [
    "RecordOrderError",
    "StateRecorder",
    "StateTrace",
    "TraceIOError",
    "TraceLine",
    "TraceStep",
    "export_trace",
    "import_trace",
]
