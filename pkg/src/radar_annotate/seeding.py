"""Deterministic seed derivation.

All randomness in the toolkit flows from one root seed, split per
(stage, frame, instance, ...) by hashing, so partial re-runs reproduce
the full run bit for bit.
"""

import hashlib


def derive_seed(root_seed: int, *parts) -> int:
    """Stable 63-bit seed from a root seed and any hashable labels."""
    h = hashlib.sha256()
    h.update(str(int(root_seed)).encode())
    for part in parts:
        h.update(b"\x1f")
        if isinstance(part, bytes):
            h.update(part)
        else:
            h.update(str(part).encode())
    return int.from_bytes(h.digest()[:8], "little") & 0x7FFFFFFFFFFFFFFF
