"""Seed splitting: child seed = first 8 bytes (big endian) of blake2b over "master:counter"."""
import hashlib


def derive_seed(master: int, *counters) -> int:
    text = ":".join(str(x) for x in (master, *counters)).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "big")
