"""Weighted random trees and the constants of their embedded CMJ process.

The tree grows by picking a vertex with probability proportional to its
weight, adding a random number of children (weight 1 each) and bumping the
picked vertex's weight by one.  Sampling uses an urn holding one ticket per
unit of weight, so a uniform ticket is a weight-proportional vertex and each
step is O(1 + children).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

E2 = math.e ** 2


def as_rng(seed) -> tuple[np.random.Generator, int | None]:
    """Accept an int seed or a ready Generator; return it with the seed if known."""
    if isinstance(seed, np.random.Generator):
        return seed, None
    return np.random.default_rng(seed), (None if seed is None else int(seed))


class WeightedTree:
    """Rooted forest with integer vertex weights.

    ``attach(v, k)`` performs one growth step at ``v``: ``k`` new children of
    weight 1, and ``weight[v] += 1``.
    """

    def __init__(self, num_roots: int = 1):
        if num_roots < 1:
            raise ValueError("need at least one root")
        self.parent: list[int] = [-1] * num_roots
        self.weight: list[int] = [1] * num_roots
        self.depth: list[int] = [0] * num_roots
        self.num_roots = num_roots
        self.total_weight = num_roots
        self.height = 0
        self.steps = 0

    def __len__(self) -> int:
        return len(self.parent)

    @property
    def roots(self) -> range:
        return range(self.num_roots)

    def attach(self, v: int, children: int) -> range:
        if children < 0:
            raise ValueError("negative offspring")
        first = len(self.parent)
        d = self.depth[v] + 1
        self.parent.extend([v] * children)
        self.weight.extend([1] * children)
        self.depth.extend([d] * children)
        self.weight[v] += 1
        self.total_weight += children + 1
        self.steps += 1
        if children and d > self.height:
            self.height = d
        return range(first, first + children)

    def level_weights(self) -> list[int]:
        levels = [0] * (self.height + 1)
        for d, w in zip(self.depth, self.weight):
            levels[d] += w
        return levels

    def check(self) -> None:
        """Consistency of cached totals with the stored weights."""
        assert sum(self.weight) == self.total_weight
        assert max(self.depth) == self.height
        assert all(w >= 1 for w in self.weight)


@dataclass(frozen=True)
class OffspringDistribution:
    """Law of the number of children added per step (word length minus one)."""

    support: tuple[int, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if not self.support or len(self.support) != len(self.weights):
            raise ValueError("support and weights must be non-empty and aligned")
        if any(s < 0 for s in self.support) or any(w <= 0 for w in self.weights):
            raise ValueError("support must be non-negative and weights positive")
        total = sum(self.weights)
        object.__setattr__(self, "weights", tuple(w / total for w in self.weights))

    @classmethod
    def point(cls, value: int) -> "OffspringDistribution":
        return cls((value,), (1.0,))

    @classmethod
    def from_lengths(cls, lengths: Sequence[int], weights: Sequence[float] | None = None):
        """Offspring law induced by drawing words of the given lengths."""
        if weights is None:
            weights = [1.0] * len(lengths)
        acc: dict[int, float] = {}
        for n, w in zip(lengths, weights):
            acc[n - 1] = acc.get(n - 1, 0.0) + w
        keys = sorted(acc)
        return cls(tuple(keys), tuple(acc[k] for k in keys))

    @classmethod
    def parse(cls, text: str) -> "OffspringDistribution":
        """``"0:0.5,2:0.5"`` style; a bare ``"1"`` is a point mass."""
        items = [s for s in text.split(",") if s.strip()]
        support, weights = [], []
        for item in items:
            v, _, w = item.partition(":")
            support.append(int(v))
            weights.append(float(w) if w else 1.0)
        return cls(tuple(support), tuple(weights))

    @property
    def mean(self) -> float:
        return float(sum(s * w for s, w in zip(self.support, self.weights)))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        idx = rng.choice(len(self.support), size=size, p=self.weights)
        return np.asarray(self.support, dtype=np.int64)[idx]


def grow_forest(m: OffspringDistribution, n: int, rng, num_roots: int = 1) -> WeightedTree:
    """``n`` growth steps from ``num_roots`` weight-1 roots."""
    if n < 0:
        raise ValueError("n must be non-negative")
    rng, _ = as_rng(rng)
    tree = WeightedTree(num_roots)
    if n == 0:
        return tree
    nu = m.sample(rng, n)
    # the total weight before step i is fixed by the offspring draws
    totals = num_roots + np.arange(n) + np.concatenate(([0], np.cumsum(nu)[:-1]))
    tickets = rng.integers(0, totals)
    urn = list(range(num_roots))
    attach = tree.attach
    for k, t in zip(nu.tolist(), tickets.tolist()):
        v = urn[t]
        kids = attach(v, k)
        urn.append(v)
        urn.extend(kids)
    return tree


def grow_tree(m: OffspringDistribution, n: int, rng) -> WeightedTree:
    return grow_forest(m, n, rng, 1)


def grow_msp_pair(m_i: OffspringDistribution, m_h: OffspringDistribution, q: float, n: int,
                  rng) -> tuple[WeightedTree, WeightedTree]:
    """Trees for the appending subgroup generator and its comparison process.

    In the first tree a subgroup step (probability ``q``) attaches its children
    to the root; in the second every step picks its vertex by weight.  The two
    trees use independent randomness.
    """
    if not 0 <= q <= 1:
        raise ValueError("q must lie in [0, 1]")
    rng, _ = as_rng(rng)
    trees = []
    for root_bias in (True, False):
        tree = WeightedTree(1)
        urn = [0]
        coins = rng.random(n) < q
        nu_h = m_h.sample(rng, n)
        nu_i = m_i.sample(rng, n)
        picks = rng.random(n)
        for i in range(n):
            k = int(nu_h[i] if coins[i] else nu_i[i])
            v = 0 if (root_bias and coins[i]) else urn[int(picks[i] * len(urn))]
            kids = tree.attach(v, k)
            urn.append(v)
            urn.extend(kids)
        trees.append(tree)
    return trees[0], trees[1]


# -- closed forms ------------------------------------------------------------

def laplace_m(theta: float, em: float) -> float:
    """Laplace transform of the reproduction intensity, valid for theta > 1."""
    if theta <= 1:
        raise ValueError("laplace_m is defined for theta > 1")
    return em / (theta - 1)


def laplace_m_monte_carlo(theta: float, m: OffspringDistribution, samples: int, rng,
                          terms: int = 2000, chunk: int = 5000) -> float:
    """Estimate ``E[sum_i nu_i exp(-theta S_i)]`` by simulating the birth clock.

    ``S_i`` is a sum of independent exponentials with rates ``1..i``.  The
    series is cut after ``terms`` births.
    """
    rng, _ = as_rng(rng)
    rates = np.arange(1, terms + 1, dtype=float)
    total = 0.0
    done = 0
    while done < samples:
        b = min(chunk, samples - done)
        gaps = rng.exponential(1.0 / rates, size=(b, terms))
        times = np.cumsum(gaps, axis=1)
        nu = m.sample(rng, b * terms).reshape(b, terms)
        total += float(np.sum(nu * np.exp(-theta * times)))
        done += b
    return total / samples


def gamma_of(em: float, tol: float = 1e-12) -> float:
    """Unique positive root of ``a * exp(a + 1) = 1 / em``."""
    if em <= 0:
        raise ValueError("mean offspring must be positive")
    target = 1.0 / em

    def f(a):
        return a * math.exp(a + 1) - target

    lo, hi = 1e-12, 1.0
    while f(hi) < 0:
        lo, hi = hi, 2 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    # Newton polish: the bisection tolerance is absolute, the residual check is relative
    a = 0.5 * (lo + hi)
    for _ in range(5):
        step = f(a) / ((a + 1) * math.exp(a + 1))
        a -= step
        if abs(step) <= 1e-16 * a:
            break
    return a


@dataclass(frozen=True)
class CmjConstants:
    em: float
    alpha: float
    gamma: float
    height_constant: float


def constants_of(em: float) -> CmjConstants:
    gamma = gamma_of(em)
    alpha = em + 1
    c = 1.0 / (alpha * gamma)
    if not c < E2:
        raise ArithmeticError(f"height constant {c} is not below e^2")
    return CmjConstants(em, alpha, gamma, c)


@dataclass(frozen=True)
class HeightSummary:
    n: int
    mean: float
    stddev: float
    heights: tuple[int, ...] = field(repr=False)

    @property
    def ratios(self) -> tuple[float, ...]:
        return tuple(h / math.log(self.n) for h in self.heights)


def estimate_height_ratio(m: OffspringDistribution, n: int, trials: int, rng) -> HeightSummary:
    """Monte-Carlo mean and spread of ``height / ln n`` over independent trees."""
    if n < 2 or trials < 1:
        raise ValueError("need n >= 2 and trials >= 1")
    rng, _ = as_rng(rng)
    heights = tuple(grow_tree(m, n, rng).height for _ in range(trials))
    ratios = np.array(heights, dtype=float) / math.log(n)
    sd = float(ratios.std(ddof=1)) if trials > 1 else 0.0
    return HeightSummary(n, float(ratios.mean()), sd, heights)


def empirical_height_cdf(heights: Sequence[int], x: float) -> float:
    if len(heights) == 0:
        raise ValueError("empty sample")
    return sum(1 for h in heights if h <= x) / len(heights)
