"""Monte Carlo estimates of the comparison-count moments.

First-element-pivot quicksort with a stable partition compares each key
once with every ancestor in the binary search tree obtained by inserting
the keys in array order.  The comparison count is therefore the internal
path length of that tree, which :func:`batch_comparison_counts` evaluates
for a whole batch of permutations at once with numpy (doubly linked list
over key values, peeled in reverse insertion order to find each key's
parent).  It agrees exactly with :func:`qsmoments.exact.quicksort_count`.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exact import DEFAULT_MODEL, PivotCostModel
from .series import falling_factorial

RNG_ID = "numpy.Philox4x64-10/SeedSequence.spawn"
MAX_ORDER = 4
BATCH = 8192


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def shard_rngs(seed: int, shards: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.Philox(ss)) for ss in np.random.SeedSequence(seed).spawn(shards)]


def random_permutation(n: int, rng: np.random.Generator) -> list[int]:
    """Uniform permutation of ``1..n`` (numpy's Fisher-Yates shuffle)."""
    if n < 1:
        raise ValueError("n must be positive")
    return (rng.permutation(n) + 1).tolist()


def batch_comparison_counts(
    perms: np.ndarray, model: PivotCostModel = DEFAULT_MODEL
) -> np.ndarray:
    """Comparison counts for each row of ``perms`` (rows are permutations of ``1..n``)."""
    perms = np.asarray(perms, dtype=np.int64)
    trials, n = perms.shape
    rows = np.arange(trials)
    sentinel_hi = n + 1
    prev = np.tile(np.arange(-1, n + 1, dtype=np.int64), (trials, 1))
    nxt = np.tile(np.arange(1, n + 3, dtype=np.int64), (trials, 1))
    pred = np.empty_like(perms)
    succ = np.empty_like(perms)
    # nearest smaller / larger key inserted earlier
    for t in range(n - 1, -1, -1):
        x = perms[:, t]
        p = prev[rows, x]
        q = nxt[rows, x]
        pred[:, t] = p
        succ[:, t] = q
        nxt[rows, p] = q
        prev[rows, q] = p

    depth = np.full((trials, n + 2), -1, dtype=np.int64)
    internal = np.zeros((trials, n + 2), dtype=bool)
    total = np.zeros(trials, dtype=np.int64)
    for t in range(n):
        x = perms[:, t]
        dp = depth[rows, pred[:, t]]
        dq = depth[rows, succ[:, t]]
        d = np.maximum(dp, dq) + 1
        depth[rows, x] = d
        total += d
        # the deeper neighbour is the parent; sentinels have depth -1
        parent = np.where(dp >= dq, pred[:, t], succ[:, t])
        internal[rows, parent] = True
    if model is PivotCostModel.N_PLUS_1:
        stages = internal[:, 1:sentinel_hi].sum(axis=1)
        total += 2 * stages
    return total


@dataclass
class SimConfig:
    n: int
    trials: int
    seed: int
    model: PivotCostModel = DEFAULT_MODEL
    shards: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.shards < 1:
            raise ValueError("shards must be >= 1")


@dataclass
class SimResult:
    config: SimConfig
    histogram: dict[int, int] = field(repr=False)
    # sum over trials of (k)_s and (k)_s^2, s = 0..MAX_ORDER, exact integers
    power_sums: list[int] = field(repr=False)
    square_sums: list[int] = field(repr=False)

    @property
    def trials(self) -> int:
        return self.config.trials

    def beta_hat(self, s: int) -> float:
        return float(Fraction(self.power_sums[s], self.trials))

    def _sample_variance(self, s: int) -> Fraction:
        t = self.trials
        if t < 2:
            return Fraction(0)
        ssum = self.power_sums[s]
        return Fraction(t * self.square_sums[s] - ssum * ssum, t * (t - 1))

    def beta_stderr(self, s: int) -> float:
        return math.sqrt(self._sample_variance(s) / self.trials)

    @property
    def mean(self) -> float:
        return self.beta_hat(1)

    @property
    def variance(self) -> float:
        return float(self._sample_variance(1))

    @property
    def stderr(self) -> float:
        return self.beta_stderr(1)

    @property
    def min_count(self) -> int:
        return min(self.histogram)

    @property
    def max_count(self) -> int:
        return max(self.histogram)

    def to_dict(self) -> dict:
        cfg = self.config
        return {
            "n": cfg.n,
            "trials": cfg.trials,
            "seed": cfg.seed,
            "rng_id": RNG_ID,
            "shards": cfg.shards,
            "model": cfg.model.value,
            "mean": self.mean,
            "variance": self.variance,
            "stderr": self.stderr,
            "beta_hat": [self.beta_hat(s) for s in range(1, MAX_ORDER + 1)],
            "beta_stderr": [self.beta_stderr(s) for s in range(1, MAX_ORDER + 1)],
        }


def _shard_sizes(trials: int, shards: int) -> list[int]:
    base, extra = divmod(trials, shards)
    return [base + (i < extra) for i in range(shards)]


def simulate(config: SimConfig) -> SimResult:
    """Run ``config.trials`` random sorts; deterministic in the whole config."""
    tally: Counter = Counter()
    identity = np.arange(1, config.n + 1, dtype=np.int64)
    for rng, size in zip(shard_rngs(config.seed, config.shards), _shard_sizes(config.trials, config.shards)):
        done = 0
        while done < size:
            batch = min(BATCH, size - done)
            perms = rng.permuted(np.tile(identity, (batch, 1)), axis=1)
            counts = batch_comparison_counts(perms, config.model)
            values, freq = np.unique(counts, return_counts=True)
            tally.update(dict(zip(values.tolist(), freq.tolist())))
            done += batch

    hist = dict(sorted(tally.items()))
    power = [0] * (MAX_ORDER + 1)
    square = [0] * (MAX_ORDER + 1)
    for k, c in hist.items():
        for s in range(MAX_ORDER + 1):
            ff = falling_factorial(k, s)
            power[s] += c * ff
            square[s] += c * ff * ff
    return SimResult(config, hist, power, square)
