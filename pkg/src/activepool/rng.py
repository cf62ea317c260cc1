"""Deterministic, named random streams.

Every stochastic operation in the engine draws from an RngStream identified
by a (seed, substream) pair. The substream label is hashed into the seed
material, so streams for different strategies/rounds/iterations are
independent and reproducible regardless of execution order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible source of randomness.

    Identical (seed, substream) pairs produce identical draw sequences on
    every platform. ``generator()`` returns a fresh generator each call, so
    repeated calls replay the same sequence.
    """

    seed: int
    substream: str = ""

    def child(self, label: str) -> "RngStream":
        """Derive a sub-stream, e.g. per strategy or per iteration."""
        sub = f"{self.substream}/{label}" if self.substream else label
        return RngStream(self.seed, sub)

    def generator(self) -> np.random.Generator:
        digest = hashlib.sha256(self.substream.encode("utf-8")).digest()
        words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
        return np.random.default_rng(np.random.SeedSequence([self.seed & _MASK64, *words]))
