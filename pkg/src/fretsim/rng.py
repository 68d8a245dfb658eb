"""Deterministic random streams and Box-Muller Gaussian sampling.

Every stochastic component draws from a stream addressed by
``(master_seed, stream_id)``. The pair fully determines the sample
sequence, so ensembles are reproducible no matter how realizations are
scheduled across workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SeededRng:
    """Address of one random stream.

    Stream splitting: the PCG64 bit generator is seeded with
    ``SeedSequence(entropy=(master_seed, stream_id))``, which hashes the
    pair into independent streams. Identical pairs give bit-identical
    sample sequences.
    """

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=(self.master_seed, self.stream_id))
        return np.random.Generator(np.random.PCG64(seq))


def sample_standard_gaussian_pair(gen: np.random.Generator) -> tuple[float, float]:
    """Draw two independent N(0, 1) deviates with the Box-Muller transform.

    The radial uniform is taken on (0, 1] so the logarithm never sees
    zero (``Generator.random`` returns [0, 1), hence ``1 - u``).
    """
    u1 = 1.0 - gen.random()
    u2 = gen.random()
    r = math.sqrt(-2.0 * math.log(u1))
    return r * math.cos(TWO_PI * u2), r * math.sin(TWO_PI * u2)


def standard_normals(gen: np.random.Generator, n: int) -> np.ndarray:
    """Vectorized Box-Muller: ``n`` standard-normal deviates.

    Pairs are emitted in (cos, sin) order; for odd ``n`` the trailing
    sin deviate of the last pair is discarded.
    """
    if n <= 0:
        return np.empty(0)
    m = (n + 1) // 2
    u1 = 1.0 - gen.random(m)
    u2 = gen.random(m)
    r = np.sqrt(-2.0 * np.log(u1))
    out = np.empty(2 * m)
    out[0::2] = r * np.cos(TWO_PI * u2)
    out[1::2] = r * np.sin(TWO_PI * u2)
    return out[:n]
