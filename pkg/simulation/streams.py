# depth_ruin/simulation/streams.py
"""
Reproducible random streams for block-parallel Monte Carlo.

Paths are grouped in fixed-size blocks; block k of stream s always draws from
Philox keyed by SeedSequence([seed, s, k]), so an estimate depends only on
(seed, block_size, inputs) and never on how many workers ran the blocks.
"""

import numpy as np


def block_generator(seed: int, block_index: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream, block_index])))


class BlockDraws:
    """Uniform and normal draws for the live paths of one block.

    Every call draws one value per path of the block and hands back those of
    the paths fixed by select(idx), so the numbers path i sees at a given call
    do not depend on which other paths are still live. With antithetic
    pairing, path i and path i + size/2 see u and 1 - u (or z and -z).
    """

    def __init__(self, rng: np.random.Generator, size: int, antithetic: bool = False):
        self.rng = rng
        self.size = size
        self.antithetic = antithetic
        self.half = size // 2
        self.select(np.arange(size))

    def select(self, idx: np.ndarray) -> None:
        self.idx = idx

    def uniform(self) -> np.ndarray:
        if not self.antithetic:
            return self.rng.random(self.size)[self.idx]
        u = self.rng.random(self.size - self.half)
        return np.concatenate([u[:self.half], 1.0 - u])[self.idx]

    def normal(self) -> np.ndarray:
        if not self.antithetic:
            return self.rng.standard_normal(self.size)[self.idx]
        z = self.rng.standard_normal(self.size - self.half)
        return np.concatenate([z[:self.half], -z])[self.idx]


def poisson_from_uniform(u: np.ndarray, mean: float, max_count: int = 64) -> np.ndarray:
    """Inverse-CDF Poisson(mean) counts from uniforms."""
    counts = np.zeros(u.shape, dtype=np.int64)
    if mean <= 0:
        return counts
    p = np.exp(-mean)
    cdf = p
    for k in range(1, max_count + 1):
        above = u > cdf
        if not above.any():
            break
        counts[above] = k
        p *= mean / k
        cdf += p
    return counts


def claims_from_uniform(u_component: np.ndarray, u_size: np.ndarray,
                        weights: np.ndarray, rates: np.ndarray) -> np.ndarray:
    """Hyperexponential claim sizes by inverse transform."""
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    component = np.searchsorted(cumulative, u_component, side="right").clip(max=len(rates) - 1)
    return -np.log1p(-u_size) / rates[component]
