"""
Single-step transition functions for the gated cells.

Each step is pure: (params, previous state, input) -> (new state, gates).
g and h are both tanh.

LSTM (cell updated before the output gate):
    i = σ(W_ix x + W_im m' + V_ic c' + b_i)
    f = σ(W_fx x + W_fm m' + V_fc c' + b_f)
    c = f ⊙ c' + i ⊙ g(W_cx x + W_cm m' + b_c)
    o = σ(W_ox x + W_om m' + V_oc c + b_o)
    m = o ⊙ h(c)

GRU (cell updated as the final step):
    i = σ(W_ix x + W_ic c' + b_i);  f = 1 - i
    o = σ(W_ox x + W_oc c' + b_o)
    m = o ⊙ c'
    c = f ⊙ c' + i ⊙ g(W_cx x + W_cm m + b_c)

Lazy LSTM (LSTM reordered the GRU way):
    i, f as LSTM;  o = σ(W_ox x + W_om m' + V_oc c' + b_o)
    m = o ⊙ h(c')
    c = f ⊙ c' + i ⊙ g(W_cx x + W_cm m̃ + b_c),  m̃ = m (default) or m'
"""

from __future__ import annotations
from typing import Tuple

from cells.params import GruParams, LstmParams
from cells.state import CellState, GateRecord, LazyCandidate
from numeric import DimensionError, Vector, hadamard, matvec, sigmoid, tanh, vector_add


def _check_state(hidden: int, prev: CellState) -> None:
    if prev.c.shape[0] != hidden or prev.m.shape[0] != hidden:
        raise DimensionError(
            f"state dims (c={prev.c.shape[0]}, m={prev.m.shape[0]}) do not match hidden dim {hidden}"
        )


def lstm_step(p: LstmParams, prev: CellState, x: Vector) -> Tuple[CellState, GateRecord]:
    """Advance a peephole LSTM by one frame."""
    _check_state(p.hidden_dim, prev)
    c_prev, m_prev = prev.c, prev.m

    i = sigmoid(matvec(p.W_ix, x) + matvec(p.W_im, m_prev) + p.V_ic * c_prev + p.b_i)
    f = sigmoid(matvec(p.W_fx, x) + matvec(p.W_fm, m_prev) + p.V_fc * c_prev + p.b_f)
    g_pre = matvec(p.W_cx, x) + matvec(p.W_cm, m_prev) + p.b_c
    c = hadamard(f, c_prev) + hadamard(i, tanh(g_pre))
    o = sigmoid(matvec(p.W_ox, x) + matvec(p.W_om, m_prev) + p.V_oc * c + p.b_o)
    m = hadamard(o, tanh(c))

    return CellState(c=c, m=m), GateRecord(i=i, f=f, o=o, g_pre=g_pre)


def gru_step(p: GruParams, prev: CellState, x: Vector) -> Tuple[CellState, GateRecord]:
    """Advance the single-gate GRU by one frame; output first, cell last."""
    _check_state(p.hidden_dim, prev)
    c_prev = prev.c

    i = sigmoid(matvec(p.W_ix, x) + matvec(p.W_ic, c_prev) + p.b_i)
    f = 1.0 - i
    o = sigmoid(matvec(p.W_ox, x) + matvec(p.W_oc, c_prev) + p.b_o)
    m = hadamard(o, c_prev)
    g_pre = matvec(p.W_cx, x) + matvec(p.W_cm, m) + p.b_c
    c = hadamard(f, c_prev) + hadamard(i, tanh(g_pre))

    return CellState(c=c, m=m), GateRecord(i=i, f=f, o=o, g_pre=g_pre)


def lazy_lstm_step(
    p: LstmParams,
    prev: CellState,
    x: Vector,
    candidate: LazyCandidate = LazyCandidate.CURRENT,
) -> Tuple[CellState, GateRecord]:
    """Advance an LSTM whose cell is updated after the gates and output."""
    _check_state(p.hidden_dim, prev)
    c_prev, m_prev = prev.c, prev.m

    i = sigmoid(matvec(p.W_ix, x) + matvec(p.W_im, m_prev) + p.V_ic * c_prev + p.b_i)
    f = sigmoid(matvec(p.W_fx, x) + matvec(p.W_fm, m_prev) + p.V_fc * c_prev + p.b_f)
    o = sigmoid(matvec(p.W_ox, x) + matvec(p.W_om, m_prev) + p.V_oc * c_prev + p.b_o)
    m = hadamard(o, tanh(c_prev))
    m_src = m if LazyCandidate(candidate) is LazyCandidate.CURRENT else m_prev
    g_pre = matvec(p.W_cx, x) + matvec(p.W_cm, m_src) + p.b_c
    c = hadamard(f, c_prev) + hadamard(i, tanh(g_pre))

    return CellState(c=c, m=m), GateRecord(i=i, f=f, o=o, g_pre=g_pre)


def residual_combine(layer_in: Vector, layer_out: Vector) -> Vector:
    """Shortcut connection: the recurrent path only has to learn the residual."""
    return vector_add(layer_in, layer_out)
