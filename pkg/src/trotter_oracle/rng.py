"""Deterministic sub-stream seeding keyed by (master seed, label)."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RngSeed:
    master_seed: int
    stream_label: str = ""

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")

    def child(self, *parts: object) -> RngSeed:
        label = "/".join([self.stream_label, *map(str, parts)]) if self.stream_label else "/".join(map(str, parts))
        return RngSeed(self.master_seed, label)

    def derived_seed(self) -> int:
        """64-bit seed for this stream, stable across platforms and Python versions."""
        digest = hashlib.sha256(f"{self.master_seed}:{self.stream_label}".encode()).digest()
        return int.from_bytes(digest[:8], "little")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.derived_seed()))


def as_seed(seed: RngSeed | int, label: str = "") -> RngSeed:
    if isinstance(seed, RngSeed):
        return seed
    return RngSeed(int(seed), label)
