"""Stable configuration digests for run manifests and worker caches"""

import hashlib
import json
from typing import Any


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)


def config_digest(obj: Any) -> str:
    """sha256 over canonical JSON; independent of key order and platform"""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()
