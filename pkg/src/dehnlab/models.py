"""Decidable models of groups, used to validate keys and to cross-check solvers.

``AbelianModel`` decides equality in the abelianization of a presentation,
which is exact when the group itself is abelian.  ``PermutationModel`` maps
generators to permutations and is exact when that representation is
faithful; the caller vouches for faithfulness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .freegroup import Presentation, as_word, exponent_vector


def _hermite_rows(vectors: Sequence[Sequence[int]], dim: int) -> list[list[int]]:
    """Row-echelon basis of the integer lattice spanned by ``vectors``."""
    rows = [list(v) for v in vectors if any(v)]
    basis: list[list[int]] = []
    for col in range(dim):
        # Euclid on column ``col`` until a single row keeps a nonzero entry
        while True:
            live = [r for r in rows if r[col] != 0]
            if len(live) <= 1:
                break
            pivot = min(live, key=lambda r: abs(r[col]))
            for i, r in enumerate(rows):
                if r is not pivot and r[col] != 0:
                    q = r[col] // pivot[col]
                    rows[i] = [a - q * b for a, b in zip(r, pivot)]
            rows = [r for r in rows if any(r)]
        if live:
            pivot = live[0]
            rows = [r for r in rows if r is not pivot]
            basis.append(pivot if pivot[col] > 0 else [-a for a in pivot])
    return basis


def _first_nonzero(v: Sequence[int]) -> int:
    return next(i for i, a in enumerate(v) if a)


@dataclass(frozen=True)
class AbelianModel:
    """Equality test in ``Z^k`` modulo the relator exponent lattice."""

    num_generators: int
    basis: tuple[tuple[int, ...], ...]
    alphabet: str = ""

    @classmethod
    def from_presentation(cls, p: Presentation) -> "AbelianModel":
        vecs = [exponent_vector(r, p.num_generators) for r in p.defining]
        basis = _hermite_rows(vecs, p.num_generators)
        return cls(p.num_generators, tuple(tuple(b) for b in basis), p.alphabet)

    def in_lattice(self, v: Sequence[int]) -> bool:
        v = list(v)
        for b in self.basis:
            c = _first_nonzero(b)
            if v[c] % b[c]:
                return False
            q = v[c] // b[c]
            v = [x - q * y for x, y in zip(v, b)]
        return not any(v)

    def is_trivial(self, w) -> bool:
        return self.in_lattice(exponent_vector(as_word(w, self.alphabet or None), self.num_generators))

    def equal(self, w1, w2) -> bool:
        a = exponent_vector(as_word(w1, self.alphabet or None), self.num_generators)
        b = exponent_vector(as_word(w2, self.alphabet or None), self.num_generators)
        return self.in_lattice([x - y for x, y in zip(a, b)])

    # conjugacy coincides with equality in an abelian group
    conjugate = equal

    def in_subgroup(self, subgroup: Sequence, w) -> bool:
        """Membership of ``w`` in the image of the subgroup generated by ``subgroup``."""
        k = self.num_generators
        vecs = [exponent_vector(as_word(h, self.alphabet or None), k) for h in subgroup]
        ext = AbelianModel(k, tuple(tuple(b) for b in _hermite_rows(list(self.basis) + vecs, k)))
        return ext.is_trivial(as_word(w, self.alphabet or None))


@dataclass(frozen=True)
class PermutationModel:
    """Generators acting on ``range(degree)``; each image is a tuple ``i -> perm[i]``."""

    images: tuple[tuple[int, ...], ...]
    alphabet: str = ""

    def __post_init__(self):
        degree = len(self.images[0]) if self.images else 0
        for perm in self.images:
            if sorted(perm) != list(range(degree)):
                raise ValueError(f"{perm} is not a permutation of range({degree})")

    @property
    def degree(self) -> int:
        return len(self.images[0])

    def evaluate(self, w) -> tuple[int, ...]:
        w = as_word(w, self.alphabet or None)
        inverses = []
        for perm in self.images:
            inv = [0] * len(perm)
            for i, j in enumerate(perm):
                inv[j] = i
            inverses.append(tuple(inv))
        state = list(range(self.degree))
        # right action: apply letters left to right
        for x in w:
            perm = self.images[x - 1] if x > 0 else inverses[-x - 1]
            state = [perm[s] for s in state]
        return tuple(state)

    def is_trivial(self, w) -> bool:
        return self.evaluate(w) == tuple(range(self.degree))

    def equal(self, w1, w2) -> bool:
        return self.evaluate(w1) == self.evaluate(w2)

    def conjugate(self, w1, w2) -> bool:
        """Brute-force conjugacy in the finite image group."""
        a, b = self.evaluate(w1), self.evaluate(w2)
        for g in self.elements():
            inv = [0] * len(g)
            for i, j in enumerate(g):
                inv[j] = i
            # g^-1 a g under the right action
            if tuple(g[a[inv[i]]] for i in range(self.degree)) == b:
                return True
        return False

    def elements(self) -> list[tuple[int, ...]]:
        ident = tuple(range(self.degree))
        seen = {ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for s in frontier:
                for perm in self.images:
                    t = tuple(perm[i] for i in s)
                    if t not in seen:
                        seen.add(t)
                        nxt.append(t)
            frontier = nxt
        return sorted(seen)

    def satisfies(self, p: Presentation) -> bool:
        return all(self.is_trivial(r) for r in p.defining)


def model_for(p: Presentation, images: Sequence[Sequence[int]] | None = None):
    """A permutation model when images are given (checked against ``p``), else abelian."""
    if images is None:
        return AbelianModel.from_presentation(p)
    m = PermutationModel(tuple(tuple(x) for x in images), p.alphabet)
    if not m.satisfies(p):
        raise ValueError("permutation images do not satisfy the relators")
    return m

