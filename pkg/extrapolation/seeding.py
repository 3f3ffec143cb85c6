"""
Seed derivation for BoundZNE

Every fit and every synthetic curve gets its own RNG stream keyed by a
64-bit FNV-1a hash of (ids, seed), so any subset of a run regenerates
identically regardless of scheduling.
"""

import numpy as np

FNV_OFFSET_BASIS = 0xcbf29ce484222325
FNV_PRIME = 0x100000001b3
MASK_64 = 0xFFFFFFFFFFFFFFFF


def fnv1a_64(data):
    """64-bit FNV-1a hash of a bytes object"""
    value = FNV_OFFSET_BASIS
    for byte in data:
        value ^= byte
        value = (value * FNV_PRIME) & MASK_64
    return value


def derive_seed(seed, *ids):
    """
    Stream seed for a set of ids under a master seed.

    The hashed message is the ids joined by '|' followed by '|' and the
    decimal master seed, UTF-8 encoded.
    """
    message = '|'.join([str(i) for i in ids] + [str(int(seed) & MASK_64)])
    return fnv1a_64(message.encode('utf-8'))


def make_rng(seed):
    """Counter-based (Philox) generator for a 64-bit seed"""
    return np.random.Generator(np.random.Philox(int(seed) & MASK_64))
