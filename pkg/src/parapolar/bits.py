"""Conversions between python-int bitsets, index arrays and boolean masks."""

from __future__ import annotations

import numpy as np


def from_indices(indices) -> int:
    b = 0
    for i in indices:
        b |= 1 << int(i)
    return b


def to_indices(b: int) -> list[int]:
    out = []
    while b:
        low = b & -b
        out.append(low.bit_length() - 1)
        b ^= low
    return out


def popcount(b: int) -> int:
    return b.bit_count()


def lowest(b: int) -> int:
    return (b & -b).bit_length() - 1


def to_mask(b: int, n: int) -> np.ndarray:
    if b == 0:
        return np.zeros(n, dtype=bool)
    raw = np.frombuffer(b.to_bytes((n + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n].astype(bool)


def from_mask(mask: np.ndarray) -> int:
    packed = np.packbits(np.asarray(mask, dtype=bool), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def mask_key(mask: np.ndarray) -> bytes:
    return np.packbits(np.asarray(mask, dtype=bool)).tobytes()
