"""
Model files: JSON, format_version 1.

    {
      "format_version": 1,
      "network":  NetworkConfig fields,
      "tensors":  {"layer0.W_ix": {"shape": [H, D], "data": [...]}, ..., "out.W": ..., "out.b": ...},
      "metadata": {"seed": int, "config_digest": sha256 hex, ...}
    }

Arrays are stored row-major. Floats are written with Python's shortest
round-tripping repr, so save → load reproduces every parameter bit.
"""

from __future__ import annotations
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from cells.network import NetworkConfig, zero_params
from cells.params import NetworkParams
from numeric import DimensionError, NonFiniteError
from utils.hashing import config_digest

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


class ModelFileError(ValueError):
    """Base class for model file problems; carries the offending path."""

    def __init__(self, path: Union[str, Path], cause: str):
        self.path = str(path)
        self.cause = cause
        super().__init__(f"{path}: {cause}")


class ModelVersionError(ModelFileError):
    """Unsupported format_version."""

    pass


class ModelSchemaError(ModelFileError):
    """Malformed, truncated or schema-violating file."""

    pass


class ModelDimensionError(ModelFileError):
    """Declared shapes disagree with the network config or the stored data."""

    pass


class TensorBlob(BaseModel):
    model_config = ConfigDict(extra="forbid")

    shape: List[int] = Field(min_length=1, max_length=2)
    data: List[float]


class ModelFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    format_version: int
    network: NetworkConfig
    tensors: Dict[str, TensorBlob]
    metadata: Dict[str, Any] = Field(default_factory=dict)


def save_model(
    params: NetworkParams,
    cfg: NetworkConfig,
    path: Union[str, Path],
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    Write a model file.

    Metadata always records the network seed and the network config digest;
    extra keys are merged in.
    """
    path = Path(path)
    if params.W_out.dtype != np.float64:
        params = params.astype(np.float64)
    meta: Dict[str, Any] = {"seed": cfg.seed, "config_digest": config_digest(cfg)}
    meta.update(metadata or {})
    doc = {
        "format_version": FORMAT_VERSION,
        "network": cfg.model_dump(mode="json"),
        "tensors": {
            name: {"shape": list(arr.shape), "data": arr.ravel().tolist()}
            for name, arr in params.tensors().items()
        },
        "metadata": meta,
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, allow_nan=False), encoding="utf-8")
    logger.info(f"saved {cfg.cell_kind.value} x{cfg.layers} model ({params.num_scalars()} scalars) to {path}")
    return path


def _read_document(path: Path) -> dict:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ModelFileError(path, f"cannot read model file: {e}") from e
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelSchemaError(path, f"not valid JSON (truncated?): {e.msg} at char {e.pos}") from e
    if not isinstance(raw, dict):
        raise ModelSchemaError(path, "top level must be a JSON object")
    if "format_version" not in raw:
        raise ModelSchemaError(path, "missing format_version")
    if raw["format_version"] != FORMAT_VERSION:
        raise ModelVersionError(
            path, f"unsupported format_version {raw['format_version']!r} (expected {FORMAT_VERSION})"
        )
    return raw


def load_model(path: Union[str, Path]) -> Tuple[NetworkParams, NetworkConfig]:
    """
    Read a model file.

    Returns:
        (params as float64, network config)

    Raises:
        ModelVersionError: Wrong format_version
        ModelSchemaError: Bad JSON, missing/unknown fields or non-finite values
        ModelDimensionError: Shapes that do not fit the declared network
    """
    path = Path(path)
    raw = _read_document(path)
    try:
        doc = ModelFile.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"])
        raise ModelSchemaError(path, f"schema violation at {where}: {first['msg']}") from e

    cfg = doc.network
    template = zero_params(cfg).tensors()
    missing = sorted(set(template) - set(doc.tensors))
    unknown = sorted(set(doc.tensors) - set(template))
    if missing or unknown:
        raise ModelSchemaError(path, f"tensor names do not match network (missing {missing}, unknown {unknown})")

    flat: Dict[str, np.ndarray] = {}
    for name, expected in template.items():
        blob = doc.tensors[name]
        shape = tuple(blob.shape)
        if shape != expected.shape:
            raise ModelDimensionError(path, f"{name}: declared shape {shape}, network needs {expected.shape}")
        if len(blob.data) != int(np.prod(shape)):
            raise ModelDimensionError(
                path, f"{name}: {len(blob.data)} values for declared shape {shape}"
            )
        flat[name] = np.asarray(blob.data, dtype=np.float64).reshape(shape)

    try:
        params = zero_params(cfg).from_tensors(flat)
    except DimensionError as e:
        raise ModelDimensionError(path, str(e)) from e
    except NonFiniteError as e:
        raise ModelSchemaError(path, str(e)) from e

    digest = doc.metadata.get("config_digest")
    if digest is not None and digest != config_digest(cfg):
        logger.warning(f"{path}: config digest mismatch (file was edited after saving?)")
    logger.debug(f"loaded {cfg.cell_kind.value} x{cfg.layers} model from {path}")
    return params, cfg


def read_metadata(path: Union[str, Path]) -> Dict[str, Any]:
    """Metadata block of a model file (version-checked, not fully validated)."""
    raw = _read_document(Path(path))
    meta = raw.get("metadata", {})
    if not isinstance(meta, dict):
        raise ModelSchemaError(path, "metadata must be an object")
    return meta
