"""Deterministic 64-bit hashing shared by the mock provider, the bucket embedder,
and input fingerprints. FNV-1a keeps results bit-identical across platforms."""

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a_64(data: bytes | str) -> int:
    if isinstance(data, str):
        data = data.encode("utf-8")
    value = FNV64_OFFSET
    for byte in data:
        value ^= byte
        value = (value * FNV64_PRIME) & _MASK64
    return value


def hex64(value: int) -> str:
    """Zero-padded lowercase hex of a 64-bit value."""
    return f"{value & _MASK64:016x}"
