"""Small shared helpers: seed derivation, stable hashing, numerics."""

from __future__ import annotations

import hashlib
import json
import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 step: scrambles a 64-bit value into a 64-bit value.

    Used to derive independent sub-seeds, e.g. splitmix64(seed ^ repeat).
    """
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def mix(seed: int, *parts: int | str) -> int:
    """Fold parts into a base seed, one splitmix64 step per part.

    Strings are folded via crc32 so the result is stable across processes
    (unlike the builtin hash). mix(seed, r) == splitmix64(seed ^ r).
    """
    out = seed & _MASK64
    for part in parts:
        if isinstance(part, str):
            part = zlib.crc32(part.encode("utf-8"))
        out = splitmix64(out ^ (int(part) & _MASK64))
    return out


def rng_for(seed: int, *parts: int | str) -> np.random.Generator:
    """A PCG64 generator on its own stream derived from seed and parts."""
    state = mix(seed, *parts) if parts else seed & _MASK64
    return np.random.Generator(np.random.PCG64(state))


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def canonical_json(obj) -> str:
    """Deterministic JSON text: sorted keys, no whitespace padding."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
