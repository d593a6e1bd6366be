"""Parameter sets for LSTM and GRU layers plus the network-level bundle.

All tensors are numpy arrays named after the weight symbols of the cell
equations (W_* dense, V_* diagonal peepholes stored as vectors, b_* biases).
"""

from __future__ import annotations
from dataclasses import dataclass, fields, replace
from typing import Callable, Dict, Iterator, Tuple, Union

import numpy as np

from numeric import DimensionError, Matrix, NonFiniteError, Vector


def _check_finite(name: str, arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"Parameter {name} contains non-finite entries")


class _TensorBundle:
    """Shared helpers for frozen dataclasses whose fields are all arrays."""

    def tensors(self) -> Dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def names(self) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(self))

    def map(self, fn: Callable[[np.ndarray], np.ndarray]):
        return replace(self, **{k: fn(v) for k, v in self.tensors().items()})

    def zeros_like(self):
        return self.map(np.zeros_like)

    def astype(self, dtype):
        return self.map(lambda a: a.astype(dtype))


@dataclass(frozen=True)
class LstmParams(_TensorBundle):
    """Peephole LSTM weights (hidden × input for *x, hidden × hidden for *m)."""
    W_ix: Matrix
    W_im: Matrix
    W_fx: Matrix
    W_fm: Matrix
    W_cx: Matrix
    W_cm: Matrix
    W_ox: Matrix
    W_om: Matrix
    V_ic: Vector
    V_fc: Vector
    V_oc: Vector
    b_i: Vector
    b_f: Vector
    b_c: Vector
    b_o: Vector

    def __post_init__(self):
        hidden, inp = self.W_ix.shape
        for name, arr in self.tensors().items():
            if name.endswith("x"):
                expected: Tuple[int, ...] = (hidden, inp)
            elif name.startswith("W_"):
                expected = (hidden, hidden)
            else:
                expected = (hidden,)
            if arr.shape != expected:
                raise DimensionError(f"LstmParams.{name} has shape {arr.shape}, expected {expected}")
            _check_finite(name, arr)

    @property
    def hidden_dim(self) -> int:
        return int(self.W_ix.shape[0])

    @property
    def input_dim(self) -> int:
        return int(self.W_ix.shape[1])


@dataclass(frozen=True)
class GruParams(_TensorBundle):
    """GRU weights; W_ic and W_oc read the previous cell, W_cm the new output."""
    W_ix: Matrix
    W_ic: Matrix
    W_ox: Matrix
    W_oc: Matrix
    W_cx: Matrix
    W_cm: Matrix
    b_i: Vector
    b_o: Vector
    b_c: Vector

    def __post_init__(self):
        hidden, inp = self.W_ix.shape
        for name, arr in self.tensors().items():
            if name.endswith("x"):
                expected: Tuple[int, ...] = (hidden, inp)
            elif name.startswith("W_"):
                expected = (hidden, hidden)
            else:
                expected = (hidden,)
            if arr.shape != expected:
                raise DimensionError(f"GruParams.{name} has shape {arr.shape}, expected {expected}")
            _check_finite(name, arr)

    @property
    def hidden_dim(self) -> int:
        return int(self.W_ix.shape[0])

    @property
    def input_dim(self) -> int:
        return int(self.W_ix.shape[1])


LayerParams = Union[LstmParams, GruParams]

LSTM_TENSORS = tuple(f.name for f in fields(LstmParams))
GRU_TENSORS = tuple(f.name for f in fields(GruParams))


@dataclass(frozen=True)
class NetworkParams:
    """Every trainable tensor of a stacked network.

    The same structure doubles as a gradient set: one buffer per parameter
    tensor, identical shapes.
    """
    layers: Tuple[LayerParams, ...]
    W_out: Matrix
    b_out: Vector

    def __post_init__(self):
        if not self.layers:
            raise DimensionError("NetworkParams needs at least one layer")
        hidden = self.layers[-1].hidden_dim
        if self.W_out.shape[1] != hidden or self.W_out.shape[0] != self.b_out.shape[0]:
            raise DimensionError(
                f"output projection {self.W_out.shape} / bias {self.b_out.shape} "
                f"does not match hidden dim {hidden}"
            )
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if nxt.input_dim != prev.hidden_dim:
                raise DimensionError(
                    f"layer input dim {nxt.input_dim} does not match previous hidden dim {prev.hidden_dim}"
                )

    def tensors(self) -> Dict[str, np.ndarray]:
        """Flat name → tensor view, in a fixed order."""
        out: Dict[str, np.ndarray] = {}
        for idx, layer in enumerate(self.layers):
            for name, arr in layer.tensors().items():
                out[f"layer{idx}.{name}"] = arr
        out["out.W"] = self.W_out
        out["out.b"] = self.b_out
        return out

    def __iter__(self) -> Iterator[Tuple[str, np.ndarray]]:
        return iter(self.tensors().items())

    def from_tensors(self, flat: Dict[str, np.ndarray]) -> "NetworkParams":
        """Rebuild a bundle with this one's structure from a flat mapping."""
        layers = []
        for idx, layer in enumerate(self.layers):
            layers.append(replace(layer, **{n: flat[f"layer{idx}.{n}"] for n in layer.names()}))
        return NetworkParams(layers=tuple(layers), W_out=flat["out.W"], b_out=flat["out.b"])

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "NetworkParams":
        return self.from_tensors({k: fn(v) for k, v in self.tensors().items()})

    def zeros_like(self) -> "NetworkParams":
        return self.map(np.zeros_like)

    def astype(self, dtype) -> "NetworkParams":
        return self.map(lambda a: a.astype(dtype))

    def scaled(self, k: float) -> "NetworkParams":
        return self.map(lambda a: a * k)

    def plus(self, other: "NetworkParams", scale: float = 1.0) -> "NetworkParams":
        """self + scale * other."""
        theirs = other.tensors()
        return self.from_tensors({k: v + scale * theirs[k] for k, v in self.tensors().items()})

    def global_norm(self) -> float:
        return float(np.sqrt(sum(float(np.sum(a * a)) for a in self.tensors().values())))

    def num_scalars(self) -> int:
        return sum(a.size for a in self.tensors().values())

    def equals(self, other: "NetworkParams") -> bool:
        """Exact (bitwise) equality of every tensor."""
        mine, theirs = self.tensors(), other.tensors()
        return mine.keys() == theirs.keys() and all(
            mine[k].shape == theirs[k].shape and np.array_equal(mine[k], theirs[k]) for k in mine
        )


GradientSet = NetworkParams
