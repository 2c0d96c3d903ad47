"""Deterministic seed derivation and per-user uniform draws.

All randomness in the package flows from explicit 64-bit seeds.  Seeds for
sub-streams (per trial, per tweet, per purpose) are derived by hashing the
parent seed together with string/int labels, so runs are reproducible and
streams are independent without any global state.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def derive_seed(*parts: int | str) -> int:
    """Stable 64-bit seed derived from a sequence of labels.

    Uses blake2b over the repr of the parts; stable across processes and
    platform word sizes (unlike Python's built-in hash).
    """
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        h.update(repr(p).encode("utf-8"))
        h.update(b"\x00")
    return int.from_bytes(h.digest(), "little")


def uniform_for_users(key: int, users: np.ndarray) -> np.ndarray:
    """One fixed U(0,1) draw per user id under a given stream key.

    The draw for a user depends only on (key, user), never on when it is
    requested, which makes retweet decisions monotone-coupled across RT
    rates: raising the rate can only add retweeters, never remove them.

    Implemented as a vectorized splitmix64 finalizer over key ^ user.
    """
    x = np.asarray(users, dtype=np.uint64) + np.uint64(key & 0xFFFFFFFFFFFFFFFF)
    with np.errstate(over="ignore"):
        x = (x + np.uint64(0x9E3779B97F4A7C15)) & _MASK64
        x = ((x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & _MASK64
        x = ((x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & _MASK64
        x = x ^ (x >> np.uint64(31))
    # 53-bit mantissa -> uniform in [0, 1)
    return (x >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
