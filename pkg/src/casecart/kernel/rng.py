"""Seeded, named random-number streams.

Every stochastic input of the model draws from its own stream, identified by
a label such as ``"duration/ENT"``.  Streams are derived from a master seed and
the label only, so changing an inventory level or a delivery policy never
shifts the draws seen by an unrelated process (common random numbers).
"""
from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _label_words(stream_id: str) -> list[int]:
    digest = hashlib.sha256(stream_id.encode("utf-8")).digest()
    return [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]


class RngStream:
    """A reproducible random stream keyed by ``(master_seed, stream_id)``.

    Only the sampling primitives the distribution classes need are exposed.
    ``draws`` counts calls, one per variate handed out.
    """

    __slots__ = ("master_seed", "stream_id", "_gen", "draws")

    def __init__(self, master_seed: int, stream_id: str):
        self.master_seed = int(master_seed) & _MASK64
        self.stream_id = str(stream_id)
        seq = np.random.SeedSequence(
            [self.master_seed & 0xFFFFFFFF, self.master_seed >> 32, *_label_words(self.stream_id)]
        )
        self._gen = np.random.Generator(np.random.PCG64(seq))
        self.draws = 0

    def __repr__(self) -> str:
        return f"RngStream(seed={self.master_seed}, id={self.stream_id!r}, draws={self.draws})"

    def random(self) -> float:
        self.draws += 1
        return float(self._gen.random())

    def uniform(self, low: float, high: float) -> float:
        self.draws += 1
        return float(self._gen.uniform(low, high))

    def exponential(self, mean: float) -> float:
        self.draws += 1
        return float(self._gen.exponential(mean))

    def gamma(self, shape: float, scale: float) -> float:
        self.draws += 1
        return float(self._gen.gamma(shape, scale))

    def beta(self, a: float, b: float) -> float:
        self.draws += 1
        return float(self._gen.beta(a, b))

    def lognormal(self, mu: float, sigma: float) -> float:
        self.draws += 1
        return float(self._gen.lognormal(mu, sigma))

    def triangular(self, left: float, mode: float, right: float) -> float:
        self.draws += 1
        return float(self._gen.triangular(left, mode, right))

    def poisson(self, lam: float) -> int:
        self.draws += 1
        return int(self._gen.poisson(lam))

    def integers(self, low: int, high: int) -> int:
        """Uniform integer on ``[low, high)``."""
        self.draws += 1
        return int(self._gen.integers(low, high))


def make_stream(master_seed: int, stream_id: str) -> RngStream:
    return RngStream(master_seed, stream_id)
