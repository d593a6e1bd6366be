"""
Stacked recurrent network: configuration, initialisation and the forward pass.

Layer l reads the output of layer l-1 (the input frames for l = 0). When
`residual` is on, every layer whose input width equals the hidden width adds
its input to its output; a first layer with input_dim != hidden_dim is never
wrapped. The top layer's output goes through a linear projection to logits.

Initial states are zero at the start of every sequence.
"""

from __future__ import annotations
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from cells.params import GruParams, LayerParams, LstmParams, NetworkParams
from cells.state import CellKind, CellState, GateRecord, LazyCandidate
from cells.steps import gru_step, lazy_lstm_step, lstm_step, residual_combine
from instrumentation.recorder import StateRecorder
from instrumentation.trace import StateTrace
from numeric import DimensionError, Vector, matvec

FORGET_BIAS_INIT = 1.0


class NetworkConfig(BaseModel):
    """Shape and wiring of a stacked network."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    cell_kind: CellKind = Field(default=CellKind.LSTM, description="Recurrent unit type")
    layers: int = Field(default=1, ge=1, le=16, description="Number of recurrent layers")
    input_dim: int = Field(default=8, ge=1)
    hidden_dim: int = Field(default=16, ge=1)
    output_dim: int = Field(default=8, ge=1)
    residual: bool = Field(default=False, description="Identity shortcut around each layer")
    lazy_last_layer_only: bool = Field(
        default=False, description="lstm stacks only: make just the top layer lazy"
    )
    lazy_candidate: LazyCandidate = Field(
        default=LazyCandidate.CURRENT, description="Unit output feeding the lazy candidate"
    )
    seed: int = Field(default=0, ge=0, description="Initialisation seed")

    @model_validator(mode="after")
    def _check_lazy(self) -> "NetworkConfig":
        if self.lazy_last_layer_only and self.cell_kind is not CellKind.LSTM:
            raise ValueError("lazy_last_layer_only applies to lstm stacks only")
        return self


def layer_kinds(cfg: NetworkConfig) -> List[CellKind]:
    """Effective step kind of every layer."""
    kinds = [cfg.cell_kind] * cfg.layers
    if cfg.lazy_last_layer_only:
        kinds[-1] = CellKind.LAZY_LSTM
    return kinds


def layer_input_dims(cfg: NetworkConfig) -> List[int]:
    return [cfg.input_dim] + [cfg.hidden_dim] * (cfg.layers - 1)


def residual_layers(cfg: NetworkConfig) -> List[bool]:
    """Which layers carry a shortcut connection."""
    return [cfg.residual and d == cfg.hidden_dim for d in layer_input_dims(cfg)]


# ============================================================================
# Initialisation
# ============================================================================


def _uniform(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    bound = 1.0 / math.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def _init_layer(kind: CellKind, inp: int, hidden: int, rng: np.random.Generator) -> LayerParams:
    if kind is CellKind.GRU:
        return GruParams(
            W_ix=_uniform(rng, (hidden, inp), inp),
            W_ic=_uniform(rng, (hidden, hidden), hidden),
            W_ox=_uniform(rng, (hidden, inp), inp),
            W_oc=_uniform(rng, (hidden, hidden), hidden),
            W_cx=_uniform(rng, (hidden, inp), inp),
            W_cm=_uniform(rng, (hidden, hidden), hidden),
            b_i=np.zeros(hidden),
            b_o=np.zeros(hidden),
            b_c=np.zeros(hidden),
        )
    return LstmParams(
        W_ix=_uniform(rng, (hidden, inp), inp),
        W_im=_uniform(rng, (hidden, hidden), hidden),
        W_fx=_uniform(rng, (hidden, inp), inp),
        W_fm=_uniform(rng, (hidden, hidden), hidden),
        W_cx=_uniform(rng, (hidden, inp), inp),
        W_cm=_uniform(rng, (hidden, hidden), hidden),
        W_ox=_uniform(rng, (hidden, inp), inp),
        W_om=_uniform(rng, (hidden, hidden), hidden),
        # peephole diagonals use the recurrent fan-in
        V_ic=_uniform(rng, (hidden,), hidden),
        V_fc=_uniform(rng, (hidden,), hidden),
        V_oc=_uniform(rng, (hidden,), hidden),
        b_i=np.zeros(hidden),
        b_f=np.full(hidden, FORGET_BIAS_INIT),
        b_c=np.zeros(hidden),
        b_o=np.zeros(hidden),
    )


def init_params(cfg: NetworkConfig) -> NetworkParams:
    """Seeded uniform ±1/sqrt(fan_in) initialisation; biases zero except LSTM forget bias."""
    rng = np.random.default_rng(cfg.seed)
    layers = tuple(
        _init_layer(kind, inp, cfg.hidden_dim, rng)
        for kind, inp in zip(layer_kinds(cfg), layer_input_dims(cfg))
    )
    return NetworkParams(
        layers=layers,
        W_out=_uniform(rng, (cfg.output_dim, cfg.hidden_dim), cfg.hidden_dim),
        b_out=np.zeros(cfg.output_dim),
    )


def zero_params(cfg: NetworkConfig) -> NetworkParams:
    """Every tensor zero, forget bias included."""
    return init_params(cfg).zeros_like()


# ============================================================================
# Forward pass
# ============================================================================


@dataclass(frozen=True)
class StepRecord:
    """Forward intermediates of one (layer, t) kept for the backward pass."""
    x: Vector
    prev: CellState
    state: CellState
    gates: GateRecord


@dataclass
class ForwardTape:
    """Everything the backward pass needs: one StepRecord per (layer, t)."""
    kinds: List[CellKind]
    residual: List[bool]
    steps: List[List[StepRecord]] = field(default_factory=list)
    outputs: List[np.ndarray] = field(default_factory=list)
    logits: Optional[np.ndarray] = None

    @property
    def num_frames(self) -> int:
        return len(self.steps[0]) if self.steps else 0

    def traces(self, seq_id=0) -> List[StateTrace]:
        """Full-capture traces rebuilt from the tape."""
        out = []
        for layer, records in enumerate(self.steps):
            tr = StateTrace(layer=layer, seq_id=seq_id, kind=self.kinds[layer].value)
            for t, rec in enumerate(records):
                tr.append(t, rec.state, rec.gates)
            out.append(tr)
        return out


def as_frames(seq: Union[np.ndarray, Sequence[Vector]], dtype=None) -> np.ndarray:
    """Normalise a sequence to a frames × dim array."""
    if isinstance(seq, np.ndarray):
        frames = seq
    else:
        if len(seq) == 0:
            raise ValueError("empty sequence")
        frames = np.stack([np.asarray(v) for v in seq])
    if frames.ndim != 2:
        raise DimensionError(f"sequence must be frames × dim, got shape {frames.shape}")
    if frames.shape[0] == 0:
        raise ValueError("empty sequence")
    if dtype is not None:
        frames = frames.astype(dtype)
    elif not np.issubdtype(frames.dtype, np.floating):
        frames = frames.astype(np.float64)
    return frames


def _check_layer_params(kinds: List[CellKind], params: NetworkParams, cfg: NetworkConfig) -> None:
    for layer, (kind, p) in enumerate(zip(kinds, params.layers)):
        expected = GruParams if kind is CellKind.GRU else LstmParams
        if not isinstance(p, expected):
            raise DimensionError(
                f"layer {layer} is a {kind.value} layer but holds {type(p).__name__}, expected {expected.__name__}"
            )
        if p.hidden_dim != cfg.hidden_dim:
            raise DimensionError(f"layer {layer} has hidden dim {p.hidden_dim}, config expects {cfg.hidden_dim}")


def _step(kind: CellKind, p: LayerParams, prev: CellState, x: Vector, cfg: NetworkConfig):
    if kind is CellKind.GRU:
        return gru_step(p, prev, x)
    if kind is CellKind.LAZY_LSTM:
        return lazy_lstm_step(p, prev, x, candidate=cfg.lazy_candidate)
    return lstm_step(p, prev, x)


def run_forward(
    cfg: NetworkConfig,
    params: NetworkParams,
    seq: Union[np.ndarray, Sequence[Vector]],
    recorder: Optional[StateRecorder] = None,
) -> ForwardTape:
    """Run the stack over a sequence and keep every intermediate."""
    if len(params.layers) != cfg.layers:
        raise DimensionError(f"config has {cfg.layers} layers, params have {len(params.layers)}")
    frames = as_frames(seq, dtype=params.W_out.dtype)
    if frames.shape[1] != cfg.input_dim:
        raise DimensionError(
            f"frames have dim {frames.shape[1]}, network expects input_dim {cfg.input_dim}"
        )

    kinds = layer_kinds(cfg)
    _check_layer_params(kinds, params, cfg)
    shortcuts = residual_layers(cfg)
    tape = ForwardTape(kinds=kinds, residual=shortcuts)

    layer_in = frames
    for layer, (kind, p, shortcut) in enumerate(zip(kinds, params.layers, shortcuts)):
        state = CellState.zeros(p.hidden_dim, dtype=frames.dtype)
        records: List[StepRecord] = []
        out = np.empty((frames.shape[0], p.hidden_dim), dtype=frames.dtype)
        for t, x in enumerate(layer_in):
            new_state, gates = _step(kind, p, state, x, cfg)
            records.append(StepRecord(x=x, prev=state, state=new_state, gates=gates))
            if recorder is not None:
                recorder.record(layer, t, new_state, gates, kind=kind.value)
            out[t] = residual_combine(x, new_state.m) if shortcut else new_state.m
            state = new_state
        tape.steps.append(records)
        tape.outputs.append(out)
        layer_in = out

    tape.logits = np.stack([matvec(params.W_out, h) + params.b_out for h in layer_in])
    return tape


def stack_forward(
    cfg: NetworkConfig,
    params: NetworkParams,
    seq: Union[np.ndarray, Sequence[Vector]],
    recorder: Optional[StateRecorder] = None,
) -> Tuple[np.ndarray, List[StateTrace]]:
    """
    Run the stacked network over one sequence.

    Returns:
        (logits as frames × output_dim, one full-capture StateTrace per layer)

    Raises:
        DimensionError: On any shape mismatch
        ValueError: On an empty sequence
    """
    tape = run_forward(cfg, params, seq, recorder=recorder)
    return tape.logits, tape.traces()
