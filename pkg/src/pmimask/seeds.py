"""Deterministic per-document RNG derivation.

Parallel runs must reproduce the serial run byte for byte, so nothing may
draw from a shared generator.  Every randomized operation seeds its own
generator from a stable hash of (global seed, stream tag, ..., doc id).
blake2b keeps the mix platform- and process-independent; Python's built-in
hash() is salted per process and unusable here.

Stream tags keep the independent draws of one document (candidate
sampling, corruption, each baseline) from colliding.
"""

import hashlib
import struct

import numpy as np

STREAM_CANDIDATES = 0
STREAM_CORRUPTION = 1
STREAM_APPROX = 2
STREAM_RANDOM = 3
STREAM_SPAN = 4
STREAM_PMI_SPAN = 5


def derive_seed(*parts: int) -> int:
    """Collapse integer components into a stable 63-bit seed."""
    packed = struct.pack(f"<{len(parts)}q", *parts)
    digest = hashlib.blake2b(packed, digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


def derive_rng(*parts: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))
