"""Hashing helpers for provenance digests."""

from __future__ import annotations
import hashlib
import json
from typing import Any, Mapping, Union

from pydantic import BaseModel


def sha256_hex(data: bytes) -> str:
    """Compute SHA256 hex digest.

    Args:
        data: Input bytes

    Returns:
        64-character hex string
    """
    return hashlib.sha256(data).hexdigest()


def sha256_hex_text(text: str) -> str:
    return sha256_hex(text.encode("utf-8"))


def canonical_json(obj: Union[BaseModel, Mapping[str, Any]]) -> str:
    """Key-sorted, whitespace-free JSON; pydantic models are dumped in JSON mode first."""
    if isinstance(obj, BaseModel):
        obj = obj.model_dump(mode="json")
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_digest(config: Union[BaseModel, Mapping[str, Any]]) -> str:
    """sha256 of the canonical JSON form of a config."""
    return sha256_hex_text(canonical_json(config))
