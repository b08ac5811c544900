"""Deterministic seed derivation for fan-out across jobs."""

from __future__ import annotations

import hashlib


def stable_seed(*parts) -> int:
    """Map a tuple of labels to a 64-bit seed, stably across runs.

    Uses sha256 of the joined string forms, so the result does not
    depend on process hash randomization or platform word size.
    """
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")
