"""Random instance generators with branching-tree instrumentation.

Each generator grows the word by insertions without cancellation and keeps,
for every position of the current (unreduced) word, the tree vertex owning
it.  Inserting ``u`` at position ``p`` bumps the owner of ``p`` and gives it
``|u| - 1`` new children, one per interior position of ``u``.  A vertex owns as
many positions as its weight, so uniform positions are weight-proportional
vertices.  The tree height bounds the depth of the instance's diagram.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .branching import WeightedTree, as_rng
from .freegroup import (
    EMPTY,
    Presentation,
    Word,
    as_word,
    cyclically_reduce,
    invert,
    reduce,
)


@dataclass(frozen=True)
class InsertionDistribution:
    """A finite distribution over words (elementary identities or subgroup words)."""

    items: tuple[Word, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if not self.items or len(self.items) != len(self.weights):
            raise ValueError("need a non-empty support with one weight per item")
        if any(len(u) == 0 for u in self.items):
            raise ValueError("the empty word cannot be inserted")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")
        total = float(sum(self.weights))
        object.__setattr__(self, "weights", tuple(w / total for w in self.weights))

    @classmethod
    def uniform(cls, items: Sequence[Sequence[int]]) -> "InsertionDistribution":
        items = tuple(tuple(u) for u in items)
        return cls(items, (1.0,) * len(items))

    @classmethod
    def identities(cls, p: Presentation, weights: Sequence[float] | None = None):
        """Distribution on the elementary identities, uniform unless weighted."""
        if weights is None:
            return cls.uniform(p.identities)
        return cls(p.identities, tuple(weights))

    @classmethod
    def subgroup(cls, subgroup: Sequence[Sequence[int]], weights: Sequence[float] | None = None):
        """Distribution on ``H`` together with inverses; empty and repeated words dropped."""
        items: list[Word] = []
        for h in subgroup:
            for u in (tuple(h), invert(h)):
                if u and u not in items:
                    items.append(u)
        if weights is None:
            return cls.uniform(items)
        return cls(tuple(items), tuple(weights))

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(len(u) for u in self.items)

    @property
    def mean_length(self) -> float:
        return float(sum(len(u) * w for u, w in zip(self.items, self.weights)))

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(len(self.items), size=size, p=self.weights)


@dataclass(frozen=True)
class InstanceTrace:
    steps: int
    tree_height: int
    intermediate_lengths: tuple[int, ...]
    rng_seed: int | None = None
    total_weight: int = 1
    tree: WeightedTree | None = field(default=None, repr=False, compare=False)


@dataclass
class _Growth:
    """Word plus position owners, grown by insertions."""

    word: list[int]
    owners: list[int]
    tree: WeightedTree
    lengths: list[int] = field(default_factory=list)

    @classmethod
    def start(cls, w: Sequence[int]) -> "_Growth":
        tree = WeightedTree(len(w) + 1)
        return cls(list(w), list(range(len(w) + 1)), tree)

    def insert(self, p: int, u: Sequence[int]) -> None:
        owner = self.owners[p]
        kids = self.tree.attach(owner, len(u) - 1)
        self.word[p:p] = u
        self.owners[p:p] = [owner, *kids]
        self.lengths.append(len(self.word))

    def trace(self, seed: int | None) -> InstanceTrace:
        return InstanceTrace(self.tree.steps, self.tree.height, tuple(self.lengths), seed,
                             self.tree.total_weight, self.tree)


def random_i_transform(w: Sequence[int], d: InsertionDistribution, rng) -> tuple[Word, int, Word]:
    """Insert a random item of ``d`` at a uniform position of ``w`` (no cancellation)."""
    rng, _ = as_rng(rng)
    u = d.items[int(d.draw(rng, 1)[0])]
    p = int(rng.integers(0, len(w) + 1))
    w = tuple(w)
    return w[:p] + u + w[p:], p, u


def _equal_word_growth(w: Sequence[int], n: int, d_i: InsertionDistribution,
                       rng: np.random.Generator) -> _Growth:
    g = _Growth.start(w)
    if n <= 0:
        return g
    picks = d_i.draw(rng, n)
    lens = np.asarray(d_i.lengths, dtype=np.int64)[picks]
    before = len(w) + np.concatenate(([0], np.cumsum(lens)[:-1]))
    positions = rng.integers(0, before + 1)
    items = d_i.items
    for k, p in zip(picks.tolist(), positions.tolist()):
        g.insert(p, items[k])
    return g


def random_equal_word(p: Presentation, w, n: int, d_i: InsertionDistribution | None = None,
                      rng=None) -> tuple[Word, InstanceTrace]:
    """Apply ``n`` random insertions to ``w`` and return the reduced result.

    ``w`` need not be reduced.  The trace carries the forest over the
    ``|w| + 1`` initial positions (a single tree when ``w`` is empty).
    """
    w = as_word(w, p.alphabet)
    d_i = d_i or InsertionDistribution.identities(p)
    rng, seed = as_rng(rng)
    g = _equal_word_growth(w, n, d_i, rng)
    return reduce(g.word), g.trace(seed)


def random_conjugate(p: Presentation, w, n: int, d_i: InsertionDistribution | None = None,
                     rng=None) -> tuple[Word, InstanceTrace]:
    """Random conjugate of ``w`` via a random rewrite of all but its last letter."""
    w = cyclically_reduce(as_word(w, p.alphabet))
    if not w:
        raise ValueError("random_conjugate needs a word that is not conjugate to 1 in F(X)")
    d_i = d_i or InsertionDistribution.identities(p)
    rng, seed = as_rng(rng)
    w0, x = w[:-1], w[-1]
    g = _equal_word_growth(w0, n, d_i, rng)
    t = cyclically_reduce(reduce(g.word) + (x,))
    if not t:
        return EMPTY, g.trace(seed)
    k = int(rng.integers(0, len(t)))
    return t[k:] + t[:k], g.trace(seed)


def random_subgroup_word(p: Presentation, subgroup, k: int, n: int,
                         d_i: InsertionDistribution | None = None,
                         d_h: InsertionDistribution | None = None,
                         rng=None) -> tuple[Word, InstanceTrace]:
    """Product of ``k`` random subgroup words, then ``n`` random insertions."""
    hs = [as_word(h, p.alphabet) for h in subgroup]
    if k > 0 and d_h is None and not hs:
        raise ValueError("a non-empty subgroup is needed when k > 0")
    rng, seed = as_rng(rng)
    v: list[int] = []
    if k > 0:
        d_h = d_h or InsertionDistribution.subgroup(hs)
        for idx in d_h.draw(rng, k).tolist():
            v.extend(d_h.items[idx])
    d_i = d_i or InsertionDistribution.identities(p)
    g = _equal_word_growth(v, n, d_i, rng)
    return reduce(g.word), g.trace(seed)


def random_subgroup_word2(p: Presentation, subgroup, n: int, q: float,
                          d_i: InsertionDistribution | None = None,
                          d_h: InsertionDistribution | None = None,
                          rng=None) -> tuple[Word, InstanceTrace]:
    """Interleave appending subgroup words (probability ``q``) with random insertions.

    Appending at the end is an insertion at the last position, which is
    always owned by the root, so subgroup steps hang their children there.
    With ``q == 0`` no coins are drawn and the output coincides with
    :func:`random_equal_word` on the empty word for the same seed.  ``q == 1``
    is accepted as the degenerate all-append case.
    """
    if not 0 <= q <= 1:
        raise ValueError("q must lie in [0, 1]")
    hs = [as_word(h, p.alphabet) for h in subgroup]
    if q > 0 and d_h is None and not hs:
        raise ValueError("a non-empty subgroup is needed when q > 0")
    d_i = d_i or InsertionDistribution.identities(p)
    rng, seed = as_rng(rng)
    if q == 0:
        g = _equal_word_growth(EMPTY, n, d_i, rng)
        return reduce(g.word), g.trace(seed)
    d_h = d_h or InsertionDistribution.subgroup(hs)
    g = _Growth.start(EMPTY)
    coins = rng.random(n) < q
    pick_i = d_i.draw(rng, n)
    pick_h = d_h.draw(rng, n)
    spots = rng.random(n)
    for i in range(n):
        if coins[i]:
            u = d_h.items[pick_h[i]]
            pos = len(g.word)
            assert g.owners[pos] == 0
        else:
            u = d_i.items[pick_i[i]]
            pos = int(spots[i] * (len(g.word) + 1))
        g.insert(pos, u)
    return reduce(g.word), g.trace(seed)
