"""
Hand-derived reverse-mode steps, one per cell kind.

Each *_step_backward takes the forward StepRecord of one frame together with
  dm: dL/dm_t (from the layer above and from step t+1)
  dc: dL/dc_t (from step t+1)
accumulates parameter gradients into `grads` (name -> array, same shapes as
the parameters) and returns (dx, dc_prev, dm_prev).
"""

from __future__ import annotations
from typing import Dict, List, Tuple

import numpy as np

from cells.network import ForwardTape, StepRecord
from cells.params import GruParams, LayerParams, LstmParams, NetworkParams
from cells.state import CellKind, LazyCandidate

Grads = Dict[str, np.ndarray]
StepGrads = Tuple[np.ndarray, np.ndarray, np.ndarray]


def lstm_step_backward(p: LstmParams, rec: StepRecord, dm, dc, grads: Grads) -> StepGrads:
    x, c_prev, m_prev, c = rec.x, rec.prev.c, rec.prev.m, rec.state.c
    i, f, o = rec.gates.i, rec.gates.f, rec.gates.o
    g = np.tanh(rec.gates.g_pre)
    hc = np.tanh(c)

    # m = o * h(c);  o peeks at the new cell
    da_o = dm * hc * o * (1.0 - o)
    dc = dc + dm * o * (1.0 - hc * hc) + da_o * p.V_oc

    # c = f * c' + i * g
    da_i = dc * g * i * (1.0 - i)
    da_f = dc * c_prev * f * (1.0 - f)
    da_g = dc * i * (1.0 - g * g)
    dc_prev = dc * f + da_i * p.V_ic + da_f * p.V_fc

    for gate, da in (("i", da_i), ("f", da_f), ("c", da_g), ("o", da_o)):
        grads[f"W_{gate}x"] += np.outer(da, x)
        grads[f"W_{gate}m"] += np.outer(da, m_prev)
        grads[f"b_{gate}"] += da
    grads["V_ic"] += da_i * c_prev
    grads["V_fc"] += da_f * c_prev
    grads["V_oc"] += da_o * c

    dm_prev = p.W_im.T @ da_i + p.W_fm.T @ da_f + p.W_cm.T @ da_g + p.W_om.T @ da_o
    dx = p.W_ix.T @ da_i + p.W_fx.T @ da_f + p.W_cx.T @ da_g + p.W_ox.T @ da_o
    return dx, dc_prev, dm_prev


def lazy_lstm_step_backward(
    p: LstmParams,
    rec: StepRecord,
    dm,
    dc,
    grads: Grads,
    candidate: LazyCandidate = LazyCandidate.CURRENT,
) -> StepGrads:
    x, c_prev, m_prev, m = rec.x, rec.prev.c, rec.prev.m, rec.state.m
    i, f, o = rec.gates.i, rec.gates.f, rec.gates.o
    g = np.tanh(rec.gates.g_pre)
    hp = np.tanh(c_prev)
    use_current = LazyCandidate(candidate) is LazyCandidate.CURRENT
    m_src = m if use_current else m_prev

    # c = f * c' + i * g(W_cx x + W_cm m_src)
    da_i = dc * g * i * (1.0 - i)
    da_f = dc * c_prev * f * (1.0 - f)
    da_g = dc * i * (1.0 - g * g)
    dc_prev = dc * f
    grads["W_cx"] += np.outer(da_g, x)
    grads["W_cm"] += np.outer(da_g, m_src)
    grads["b_c"] += da_g
    d_src = p.W_cm.T @ da_g
    dm_prev = np.zeros_like(m_prev)
    if use_current:
        dm = dm + d_src
    else:
        dm_prev = dm_prev + d_src

    # m = o * h(c'), every gate peeks at the previous cell
    da_o = dm * hp * o * (1.0 - o)
    dc_prev = dc_prev + dm * o * (1.0 - hp * hp)
    dc_prev = dc_prev + da_i * p.V_ic + da_f * p.V_fc + da_o * p.V_oc

    for gate, da in (("i", da_i), ("f", da_f), ("o", da_o)):
        grads[f"W_{gate}x"] += np.outer(da, x)
        grads[f"W_{gate}m"] += np.outer(da, m_prev)
        grads[f"b_{gate}"] += da
        grads[f"V_{gate}c"] += da * c_prev

    dm_prev = dm_prev + p.W_im.T @ da_i + p.W_fm.T @ da_f + p.W_om.T @ da_o
    dx = p.W_ix.T @ da_i + p.W_fx.T @ da_f + p.W_cx.T @ da_g + p.W_ox.T @ da_o
    return dx, dc_prev, dm_prev


def gru_step_backward(p: GruParams, rec: StepRecord, dm, dc, grads: Grads) -> StepGrads:
    x, c_prev, m = rec.x, rec.prev.c, rec.state.m
    i, f, o = rec.gates.i, rec.gates.f, rec.gates.o
    g = np.tanh(rec.gates.g_pre)

    # c = (1 - i) * c' + i * g(W_cx x + W_cm m + b_c)
    da_i = dc * (g - c_prev) * i * (1.0 - i)
    da_g = dc * i * (1.0 - g * g)
    dc_prev = dc * f
    grads["W_cx"] += np.outer(da_g, x)
    grads["W_cm"] += np.outer(da_g, m)
    grads["b_c"] += da_g
    dm = dm + p.W_cm.T @ da_g

    # m = o * c'
    da_o = dm * c_prev * o * (1.0 - o)
    dc_prev = dc_prev + dm * o

    grads["W_ox"] += np.outer(da_o, x)
    grads["W_oc"] += np.outer(da_o, c_prev)
    grads["b_o"] += da_o
    grads["W_ix"] += np.outer(da_i, x)
    grads["W_ic"] += np.outer(da_i, c_prev)
    grads["b_i"] += da_i

    dc_prev = dc_prev + p.W_oc.T @ da_o + p.W_ic.T @ da_i
    dx = p.W_ix.T @ da_i + p.W_ox.T @ da_o + p.W_cx.T @ da_g
    # m_t never feeds step t+1 directly
    dm_prev = np.zeros_like(m)
    return dx, dc_prev, dm_prev


def layer_backward(
    kind: CellKind,
    p: LayerParams,
    records: List[StepRecord],
    d_out: np.ndarray,
    residual: bool,
    candidate: LazyCandidate = LazyCandidate.CURRENT,
) -> Tuple[np.ndarray, Grads]:
    """Backpropagate one layer through time.

    Args:
        d_out: dL/d(layer output), frames × hidden (output includes the shortcut)

    Returns:
        (dL/d(layer input) frames × input_dim, gradient buffers by tensor name)
    """
    grads: Grads = {k: np.zeros_like(v) for k, v in p.tensors().items()}
    hidden = p.hidden_dim
    dm_next = np.zeros(hidden, dtype=d_out.dtype)
    dc_next = np.zeros(hidden, dtype=d_out.dtype)
    d_in = np.zeros((len(records), p.input_dim), dtype=d_out.dtype)

    for t in range(len(records) - 1, -1, -1):
        rec = records[t]
        dm = d_out[t] + dm_next
        if kind is CellKind.GRU:
            dx, dc_prev, dm_prev = gru_step_backward(p, rec, dm, dc_next, grads)
        elif kind is CellKind.LAZY_LSTM:
            dx, dc_prev, dm_prev = lazy_lstm_step_backward(
                p, rec, dm, dc_next, grads, candidate=candidate
            )
        else:
            dx, dc_prev, dm_prev = lstm_step_backward(p, rec, dm, dc_next, grads)
        if residual:
            dx = dx + d_out[t]
        d_in[t] = dx
        dc_next, dm_next = dc_prev, dm_prev

    return d_in, grads


def network_backward(
    params: NetworkParams,
    tape: ForwardTape,
    dlogits: np.ndarray,
    candidate: LazyCandidate = LazyCandidate.CURRENT,
) -> NetworkParams:
    """Gradients of every tensor given dL/dlogits (frames × output_dim)."""
    top = tape.outputs[-1]
    flat: Dict[str, np.ndarray] = {
        "out.W": dlogits.T @ top,
        "out.b": np.sum(dlogits, axis=0),
    }
    d_out = dlogits @ params.W_out

    for layer in range(len(params.layers) - 1, -1, -1):
        d_in, grads = layer_backward(
            tape.kinds[layer],
            params.layers[layer],
            tape.steps[layer],
            d_out,
            tape.residual[layer],
            candidate=candidate,
        )
        for name, arr in grads.items():
            flat[f"layer{layer}.{name}"] = arr
        d_out = d_in

    return params.from_tensors(flat)
