"""Canonical JSON conventions shared by every file format.

All artifacts serialize with sorted keys, 2-space indentation, ``\\n`` line
ends, and a trailing newline. Floats are rendered by ``repr``, which emits the
shortest decimal that round-trips to the same binary64 value, so canonical
bytes are stable across platforms.
"""

from __future__ import annotations

import hashlib
import json


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def content_hash(obj) -> str:
    """sha256 hex digest of the canonical serialization of ``obj``."""
    return hashlib.sha256(dumps_canonical(obj).encode("utf-8")).hexdigest()
