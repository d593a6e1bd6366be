"""GateLab numeric primitives package."""

from numeric.core import (
    DiagMatrix,
    DimensionError,
    Matrix,
    NonFiniteError,
    Vector,
    as_matrix,
    as_vector,
    hadamard,
    identity,
    matvec,
    sigmoid,
    tanh,
    vector_add,
)

__all__ = [
    "DiagMatrix",
    "DimensionError",
    "Matrix",
    "NonFiniteError",
    "Vector",
    "as_matrix",
    "as_vector",
    "hadamard",
    "identity",
    "matvec",
    "sigmoid",
    "tanh",
    "vector_add",
]
