"""Derived seeds: a pure function of (master seed, stage name, replica index)."""

from __future__ import annotations

import hashlib

SEED_BITS = 63


def derive_seed(master: int, stage: str, index: int = 0) -> int:
    """Non-negative 63-bit seed for one stage and replica.

    Stages and replicas get statistically unrelated streams, and the value
    does not depend on the order in which replicas are scheduled.
    """
    if int(master) < 0 or int(index) < 0:
        raise ValueError("master seed and index must be non-negative")
    h = hashlib.blake2b(digest_size=8, person=b"sfperc-seed")
    h.update(f"{int(master)}\x1f{stage}\x1f{int(index)}".encode())
    return int.from_bytes(h.digest(), "little") >> (64 - SEED_BITS)
