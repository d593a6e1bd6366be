"""GateLab utilities package."""

from utils.hashing import canonical_json, config_digest, sha256_hex, sha256_hex_text

__all__ = ["canonical_json", "config_digest", "sha256_hex", "sha256_hex_text"]
