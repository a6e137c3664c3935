"""FNV-1a 64-bit hashing, used for feature hashing and cache keys."""

from __future__ import annotations

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK = (1 << 64) - 1


def fnv1a64(data: bytes | str) -> int:
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = FNV64_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV64_PRIME) & _MASK
    return h


def fnv1a64_hex(data: bytes | str) -> str:
    return f"{fnv1a64(data):016x}"
