"""GateLab cells package.

The stacked network lives in `cells.network`; it is not re-exported here
because it depends on the instrumentation package, which itself imports
`cells.state`.
"""

from cells.params import GradientSet, GruParams, LstmParams, NetworkParams
from cells.state import CellKind, CellState, GateRecord, LazyCandidate
from cells.steps import gru_step, lazy_lstm_step, lstm_step, residual_combine

__all__ = [
    "CellKind",
    "CellState",
    "GateRecord",
    "GradientSet",
    "GruParams",
    "LazyCandidate",
    "LstmParams",
    "NetworkParams",
    "gru_step",
    "lazy_lstm_step",
    "lstm_step",
    "residual_combine",
]
