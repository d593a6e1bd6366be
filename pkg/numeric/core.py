"""GateLab Numeric Core

Dense vector/matrix primitives every cell computation is built on.

Vectors are 1-D numpy arrays, matrices are 2-D row-major arrays. Float64 is the
default dtype; primitives keep whatever floating dtype they are handed so the
gradient checker can run its oracle in extended precision.

No primitive mutates its inputs.
"""

from __future__ import annotations
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import numpy.typing as npt

Vector = npt.NDArray[np.floating]
Matrix = npt.NDArray[np.floating]


class DimensionError(ValueError):
    """Raised when operand shapes do not line up."""

    pass


class NonFiniteError(ValueError):
    """Raised when a value contains NaN or Inf."""

    pass


def _float_array(data, dtype=None) -> np.ndarray:
    arr = np.asarray(data)
    if dtype is not None:
        return arr.astype(dtype, copy=True)
    if not np.issubdtype(arr.dtype, np.floating):
        return arr.astype(np.float64)
    return arr.copy()


def as_vector(data: Iterable[float] | np.ndarray, dtype=None) -> Vector:
    """Build a validated vector.

    Args:
        data: Sequence of reals
        dtype: Optional floating dtype (default: keep float input, else float64)

    Returns:
        Fresh 1-D array

    Raises:
        DimensionError: If data is not one-dimensional or is empty
        NonFiniteError: If any entry is NaN/Inf
    """
    arr = _float_array(data, dtype)
    if arr.ndim != 1 or arr.shape[0] == 0:
        raise DimensionError(f"Vector must be 1-D and non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("Vector contains non-finite entries")
    return arr


def as_matrix(data, dtype=None) -> Matrix:
    """Build a validated row-major matrix (rows × cols, both positive)."""
    arr = _float_array(data, dtype)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DimensionError(f"Matrix must be 2-D with positive dims, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("Matrix contains non-finite entries")
    return arr


def matvec(m: Matrix, v: Vector) -> Vector:
    """Matrix-vector product: result[i] = Σ_j m[i,j]·v[j]."""
    if m.ndim != 2 or v.ndim != 1:
        raise DimensionError(f"matvec expects 2-D × 1-D, got {m.shape} × {v.shape}")
    if m.shape[1] != v.shape[0]:
        raise DimensionError(
            f"matvec dimension mismatch: matrix has {m.shape[1]} cols, vector has dim {v.shape[0]}"
        )
    return m @ v


def hadamard(a: Vector, b: Vector) -> Vector:
    """Elementwise product a ⊙ b."""
    if a.shape != b.shape:
        raise DimensionError(f"hadamard dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a * b


def vector_add(a: Vector, b: Vector) -> Vector:
    """Elementwise sum a + b."""
    if a.shape != b.shape:
        raise DimensionError(f"add dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a + b


def sigmoid(v: Vector) -> Vector:
    """Logistic sigmoid, strictly inside (0, 1) for every finite input.

    Each sign branch only exponentiates a non-positive number, so nothing
    overflows. Values that round to 0 or 1 are pulled back to the nearest
    representable interior point of the input dtype.
    """
    e = np.exp(-np.abs(v))
    out = np.where(v >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    info = np.finfo(out.dtype)
    return np.clip(out, info.tiny, 1.0 - info.epsneg)


def tanh(v: Vector) -> Vector:
    """Hyperbolic tangent (odd, saturates smoothly)."""
    return np.tanh(v)


@dataclass(frozen=True)
class DiagMatrix:
    """Diagonal matrix stored as its diagonal (peephole weights)."""

    diag: Vector

    @property
    def dim(self) -> int:
        return int(self.diag.shape[0])

    def apply(self, v: Vector) -> Vector:
        if v.shape[0] != self.dim:
            raise DimensionError(
                f"diagonal apply mismatch: diagonal has dim {self.dim}, vector has dim {v.shape[0]}"
            )
        return self.diag * v

    def to_dense(self) -> Matrix:
        return np.diag(self.diag)


def identity(n: int) -> Matrix:
    return np.eye(n, dtype=np.float64)
