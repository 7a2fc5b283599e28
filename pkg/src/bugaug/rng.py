"""Keyed random-stream derivation.

Every randomized step draws from a stream derived from the master seed plus a
structural key (stage name, bug id, ordinal, attempt, ...), so results do not
depend on iteration or scheduling order.
"""

from __future__ import annotations

import hashlib
import random


def derive_seed(master_seed: int, *key: object) -> int:
    """Map (master seed, key parts) to a stable 64-bit stream seed."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(master_seed).encode("utf-8"))
    for part in key:
        h.update(b"\x1f")
        h.update(str(part).encode("utf-8"))
    return int.from_bytes(h.digest(), "big")


def derive_rng(master_seed: int, *key: object) -> random.Random:
    return random.Random(derive_seed(master_seed, *key))
