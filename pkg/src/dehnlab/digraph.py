"""Finite labeled X-digraphs: word graphs, Stallings folding and R-completion.

Two representations live here.  :class:`LabeledGraph` is the immutable value
type (explicit vertex count and edge list, possibly unfolded).  :class:`FoldedTable`
is the mutable engine behind folding: a partial transition table over signed
letters with a union-find for vertex identifications, in the style of a coset
table.  Solvers run on the table and export snapshots as ``LabeledGraph``.

Edge ``(s, t, g)`` reads generator ``g`` from ``s`` to ``t`` and its inverse
from ``t`` to ``s``.  Table columns are ``2*g`` (forward) and ``2*g + 1``
(backward), so ``col ^ 1`` is the inverse letter.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .freegroup import Presentation, Word, as_word, format_word

Edge = tuple[int, int, int]


def column(x: int) -> int:
    return 2 * (x - 1) if x > 0 else 2 * (-x - 1) + 1


def _column_letter(c: int) -> int:
    g = c >> 1
    return -(g + 1) if c & 1 else g + 1


@dataclass(frozen=True)
class LabeledGraph:
    num_vertices: int
    edges: tuple[Edge, ...]
    base_out: int = 0
    base_in: int | None = None
    # winding of each edge around the start cycle (conjugacy witnesses only)
    voltages: tuple[int, ...] | None = None
    modulus: int = 0

    def __post_init__(self):
        n = self.num_vertices
        if n < 1:
            raise ValueError("a labeled graph needs at least one vertex")
        if self.voltages is not None and len(self.voltages) != len(self.edges):
            raise ValueError("one voltage per edge is required")
        for v in (self.base_out, self.base_in):
            if v is not None and not 0 <= v < n:
                raise ValueError(f"base vertex {v} out of range")
        for s, t, g in self.edges:
            if not (0 <= s < n and 0 <= t < n) or g < 0:
                raise ValueError(f"bad edge {(s, t, g)}")

    @property
    def vertices(self) -> range:
        return range(self.num_vertices)

    @property
    def num_generators(self) -> int:
        return 1 + max((g for _, _, g in self.edges), default=-1)

    @cached_property
    def _adjacency(self) -> dict[int, dict[int, list[int]]]:
        adj: dict[int, dict[int, list[int]]] = {}
        for s, t, g in self.edges:
            adj.setdefault(s, {}).setdefault(g + 1, []).append(t)
            adj.setdefault(t, {}).setdefault(-(g + 1), []).append(s)
        return adj

    def neighbors(self, v: int, x: int) -> list[int]:
        """Targets of edges reading letter ``x`` from ``v``."""
        return self._adjacency.get(v, {}).get(x, [])

    def is_folded(self) -> bool:
        for by_letter in self._adjacency.values():
            for targets in by_letter.values():
                if len(targets) > 1:
                    return False
        return True


def graph_of_word(w: Sequence[int] | str) -> LabeledGraph:
    """The path graph reading ``w`` from ``base_out`` to ``base_in``."""
    w = as_word(w)
    edges = []
    for i, x in enumerate(w):
        edges.append((i, i + 1, x - 1) if x > 0 else (i + 1, i, -x - 1))
    return LabeledGraph(len(w) + 1, tuple(edges), 0, len(w))


def _add_loop(edges: list, start: int, h: Word, next_id: int) -> int:
    """Append a closed path reading ``h`` at ``start``; return the next free id."""
    prev = start
    for i, x in enumerate(h):
        if i == len(h) - 1:
            nxt = start
        else:
            nxt = next_id
            next_id += 1
        edges.append((prev, nxt, x - 1) if x > 0 else (nxt, prev, -x - 1))
        prev = nxt
    return next_id


def wedge_graph(w: Sequence[int] | str, subgroup: Iterable[Sequence[int] | str]) -> LabeledGraph:
    """``graph_of_word(w)`` with a loop reading each subgroup generator at the base."""
    base = graph_of_word(w)
    edges = list(base.edges)
    next_id = base.num_vertices
    for h in subgroup:
        next_id = _add_loop(edges, 0, as_word(h), next_id)
    return LabeledGraph(next_id, tuple(edges), 0, base.base_in)


def cycle_graph(w: Sequence[int] | str) -> LabeledGraph:
    """A closed path reading ``w`` at vertex 0 (both base vertices at 0)."""
    w = as_word(w)
    edges: list = []
    n = _add_loop(edges, 0, w, 1)
    return LabeledGraph(n, tuple(edges), 0, 0)


class FoldedTable:
    """Mutable folded graph: transition table plus union-find.

    Every operation keeps the table folded, so each vertex has at most one
    edge per signed letter.  Stored targets may be stale (pointing at merged
    vertices); always read through :meth:`find`.

    ``sat[v]`` marks vertices that already carry a closed loop for every
    relator of the last completion; they stay saturated under growth and
    merging, so later rounds skip them.
    """

    def __init__(self, num_generators: int):
        self.m = 2 * num_generators
        self.table: list[int] = []
        self.parent: list[int] = []
        self.sat: list[bool] = []
        self._sat_for: tuple | None = None
        self.live = 0
        self.base_out = 0
        self.base_in: int | None = None

    # -- construction --------------------------------------------------

    @classmethod
    def from_graph(cls, g: LabeledGraph, num_generators: int | None = None) -> "FoldedTable":
        k = max(g.num_generators, num_generators or 0)
        t = cls(k)
        t.add_vertices(g.num_vertices)
        for s, d, gen in g.edges:
            t.join(s, 2 * gen, d)
        t.base_out = g.base_out
        t.base_in = g.base_in
        return t

    def add_vertices(self, count: int) -> int:
        first = len(self.parent)
        self.parent.extend(range(first, first + count))
        self.sat.extend([False] * count)
        self.table.extend([-1] * (self.m * count))
        self.live += count
        return first

    def find(self, v: int) -> int:
        parent = self.parent
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    def target(self, v: int, c: int) -> int:
        """Vertex reached from ``v`` along column ``c``, or -1."""
        t = self.table[self.find(v) * self.m + c]
        return self.find(t) if t >= 0 else -1

    def join(self, u: int, c: int, v: int) -> None:
        """Add an edge ``u -> v`` in column ``c`` and fold."""
        m, table = self.m, self.table
        u, v = self.find(u), self.find(v)
        x = table[u * m + c]
        if x >= 0:
            self.merge(x, v)
            return
        y = table[v * m + (c ^ 1)]
        if y >= 0:
            self.merge(y, u)
            return
        table[u * m + c] = v
        table[v * m + (c ^ 1)] = u

    def merge(self, a: int, b: int) -> None:
        """Identify two vertices and propagate the resulting folds."""
        m, table, parent, find = self.m, self.table, self.parent, self.find
        pending = [(a, b)]
        while pending:
            a, b = pending.pop()
            a, b = find(a), find(b)
            if a == b:
                continue
            if b < a:
                a, b = b, a
            parent[b] = a
            if self.sat[b]:
                self.sat[a] = True
            self.live -= 1
            rb, ra = b * m, a * m
            for c in range(m):
                y = table[rb + c]
                if y < 0:
                    continue
                y = find(y)
                x = table[ra + c]
                if x < 0:
                    table[ra + c] = y
                else:
                    x = find(x)
                    if x != y:
                        pending.append((x, y))

    # -- reading -------------------------------------------------------

    def trace(self, start: int, w: Sequence[int]) -> int:
        """End vertex of reading ``w`` from ``start``, or -1 if it falls off."""
        m, table, find = self.m, self.table, self.find
        v = find(start)
        for x in w:
            c = 2 * (x - 1) if x > 0 else 2 * (-x - 1) + 1
            t = table[v * m + c]
            if t < 0:
                return -1
            v = find(t)
        return v

    def vertices(self) -> list[int]:
        return [v for v in range(len(self.parent)) if self.parent[v] == v]

    def find_loop(self, w: Sequence[int]) -> int:
        """Some vertex at which ``w`` reads a closed path, or -1."""
        if not w:
            return self.find(self.base_out)
        cols = [column(x) for x in w]
        m, table, parent = self.m, self.table, self.parent
        for v in range(len(parent)):
            if parent[v] != v:
                continue
            u = v
            for c in cols:
                t = table[u * m + c]
                if t < 0:
                    u = -1
                    break
                u = self.find(t)
            if u == v:
                return v
        return -1

    def accepted(self) -> bool:
        return self.base_in is not None and self.find(self.base_out) == self.find(self.base_in)

    # -- completion ----------------------------------------------------

    def complete_and_fold(self, relators: Sequence[Word], stop_when_accepted: bool = False) -> None:
        """Attach a loop for every relator at every current vertex, folding as we go.

        Equivalent to folding the full completion, because folding is confluent
        and each attachment is folded immediately.  Loops at newly created
        vertices are not attached within the same call.  A loop for ``r`` and one
        for ``r^-1`` at the same vertex fold together, so pass one word of each
        inverse pair.
        """
        m, table, parent = self.m, self.table, self.parent
        find = self.find
        cols_list = [[column(x) for x in r] for r in relators]
        sat = self._saturation(relators)
        n0 = len(parent)
        for v0 in range(n0):
            if parent[v0] != v0 or sat[v0]:
                continue
            for cols in cols_list:
                v = find(v0)
                k = len(cols)
                # forward scan
                f, i = v, 0
                while i < k:
                    t = table[f * m + cols[i]]
                    if t < 0:
                        break
                    f = find(t)
                    i += 1
                if i == k:
                    if f != v:
                        self.merge(f, v)
                    continue
                # backward scan
                b, j = v, k
                while j > i:
                    t = table[b * m + (cols[j - 1] ^ 1)]
                    if t < 0:
                        break
                    b = find(t)
                    j -= 1
                if j == i:
                    if f != b:
                        self.merge(f, b)
                    continue
                # fill the gap f --cols[i:j]--> b with fresh vertices
                prev = f
                for idx in range(i, j - 1):
                    nv = len(parent)
                    parent.append(nv)
                    sat.append(False)
                    table.extend([-1] * m)
                    self.live += 1
                    c = cols[idx]
                    table[prev * m + c] = nv
                    table[nv * m + (c ^ 1)] = prev
                    prev = nv
                # the closing edge can clash with the opening one when f == b
                self.join(prev, cols[j - 1], b)
            sat[find(v0)] = True
            if stop_when_accepted and self.accepted():
                return

    def _saturation(self, relators: Sequence[Word]) -> list[bool]:
        key = tuple(tuple(r) for r in relators)
        if key != self._sat_for:
            self.sat = [False] * len(self.parent)
            self._sat_for = key
        return self.sat

    # -- export --------------------------------------------------------

    def compact(self) -> list[int]:
        """Renumber live vertices in BFS order from ``base_out``; return the old ids."""
        m, table = self.m, self.table
        order = self._bfs_order()
        new_id = {v: i for i, v in enumerate(order)}
        new_table = [-1] * (m * len(order))
        for v in order:
            row = new_id[v] * m
            for c in range(m):
                t = table[v * m + c]
                if t >= 0:
                    new_table[row + c] = new_id[self.find(t)]
        bo = new_id[self.find(self.base_out)]
        bi = new_id[self.find(self.base_in)] if self.base_in is not None else None
        self.table = new_table
        self.parent = list(range(len(order)))
        self.sat = [self.sat[v] for v in order]
        self.live = len(order)
        self.base_out, self.base_in = bo, bi
        return order

    def _bfs_order(self) -> list[int]:
        m, table = self.m, self.table
        seen = set()
        order = []
        starts = [self.find(self.base_out)] + self.vertices()
        for s in starts:
            if s in seen:
                continue
            seen.add(s)
            queue = deque([s])
            while queue:
                v = queue.popleft()
                order.append(v)
                for c in range(m):
                    t = table[v * m + c]
                    if t >= 0:
                        t = self.find(t)
                        if t not in seen:
                            seen.add(t)
                            queue.append(t)
        return order

    def snapshot(self) -> LabeledGraph:
        """Canonical ``LabeledGraph`` of the current folded graph."""
        order = self._bfs_order()
        new_id = {v: i for i, v in enumerate(order)}
        m, table = self.m, self.table
        edges = []
        for v in order:
            for c in range(0, m, 2):
                t = table[v * m + c]
                if t >= 0:
                    edges.append((new_id[v], new_id[self.find(t)], c >> 1))
        bi = new_id[self.find(self.base_in)] if self.base_in is not None else None
        return LabeledGraph(len(order), tuple(edges), 0, bi)

    def size(self) -> int:
        return self.live


class VoltageTable:
    """Folded graph over the infinite cyclic cover of a cycle.

    Each edge carries an integer voltage: ``(v, i) -> (t, i + a)`` on sheets
    ``i`` of the cover.  The start cycle reads ``u`` with total voltage 1, so a
    closed path of voltage ``k`` reads a conjugate of ``u^k``.  Relator loops
    have voltage 0.  If folding closes a path of nonzero voltage ``d`` at one
    vertex, then ``u^d = 1`` in the group and voltages are only meaningful
    modulo ``gcd`` of all such ``d`` (kept in ``modulus``; 0 means exact).

    The union-find stores ``pot[v]``: sheet ``i`` of ``v`` is sheet
    ``i + pot[v]`` of its parent.
    """

    def __init__(self, num_generators: int):
        self.m = 2 * num_generators
        self.table: list[int] = []
        self.volt: list[int] = []
        self.parent: list[int] = []
        self.pot: list[int] = []
        self.sat: list[bool] = []
        self._sat_for: tuple | None = None
        self.modulus = 0
        self.live = 0
        self.base_out = 0

    @classmethod
    def cycle(cls, u: Sequence[int], num_generators: int) -> "VoltageTable":
        """The folded cycle reading ``u`` at vertex 0, closing edge of voltage 1."""
        t = cls(num_generators)
        k = len(u)
        if k == 0:
            raise ValueError("the start cycle needs a non-empty word")
        t._add(k)
        for i, x in enumerate(u):
            t.join(i, column(x), (i + 1) % k, 1 if i == k - 1 else 0)
        return t

    def _add(self, count: int) -> None:
        first = len(self.parent)
        self.parent.extend(range(first, first + count))
        self.pot.extend([0] * count)
        self.sat.extend([False] * count)
        self.table.extend([-1] * (self.m * count))
        self.volt.extend([0] * (self.m * count))
        self.live += count

    def _norm(self, a: int) -> int:
        return a % self.modulus if self.modulus else a

    def find(self, v: int) -> int:
        parent, pot = self.parent, self.pot
        path = []
        while parent[v] != v:
            path.append(v)
            v = parent[v]
        root = v
        for u in reversed(path):
            p = parent[u]
            if p != root:
                pot[u] += pot[p]
                parent[u] = root
        return root

    def offset(self, v: int) -> tuple[int, int]:
        r = self.find(v)
        return r, (0 if r == v else self.pot[v])

    def join(self, u: int, c: int, v: int, a: int = 0) -> None:
        """Add ``(u, i) -> (v, i + a)`` in column ``c`` and fold."""
        m = self.m
        ru, ou = self.offset(u)
        rv, ov = self.offset(v)
        a = a - ou + ov
        x = self.table[ru * m + c]
        if x >= 0:
            self.merge(x, rv, a - self.volt[ru * m + c])
            return
        y = self.table[rv * m + (c ^ 1)]
        if y >= 0:
            self.merge(y, ru, -a - self.volt[rv * m + (c ^ 1)])
            return
        self.table[ru * m + c], self.volt[ru * m + c] = rv, a
        self.table[rv * m + (c ^ 1)], self.volt[rv * m + (c ^ 1)] = ru, -a

    def merge(self, a: int, b: int, d: int) -> None:
        """Identify ``(a, i)`` with ``(b, i + d)`` and propagate folds."""
        m, table, volt = self.m, self.table, self.volt
        pending = [(a, b, d)]
        while pending:
            a, b, d = pending.pop()
            ra, oa = self.offset(a)
            rb, ob = self.offset(b)
            d = d + ob - oa  # now (ra, j) == (rb, j + d)
            if ra == rb:
                if self._norm(d):
                    self.modulus = math.gcd(self.modulus, abs(d))
                continue
            if rb < ra:
                ra, rb, d = rb, ra, -d
            self.parent[rb] = ra
            self.pot[rb] = -d
            if self.sat[rb]:
                self.sat[ra] = True
            self.live -= 1
            for c in range(m):
                y = table[rb * m + c]
                if y < 0:
                    continue
                beta = volt[rb * m + c] + d
                x = table[ra * m + c]
                if x < 0:
                    table[ra * m + c], volt[ra * m + c] = y, beta
                else:
                    pending.append((x, y, beta - volt[ra * m + c]))

    def step(self, v: int, c: int) -> tuple[int, int]:
        """Root reached from root ``v`` along column ``c`` and the voltage, or (-1, 0)."""
        t = self.table[v * self.m + c]
        if t < 0:
            return -1, 0
        r, o = self.offset(t)
        return r, self.volt[v * self.m + c] + o

    def vertices(self) -> list[int]:
        return [v for v in range(len(self.parent)) if self.parent[v] == v]

    def find_loop(self, w: Sequence[int], winding: int = 1) -> int:
        """Some vertex where ``w`` reads a closed path of the given voltage, or -1."""
        cols = [column(x) for x in w]
        for v in self.vertices():
            u, total = v, 0
            for c in cols:
                u, a = self.step(u, c)
                if u < 0:
                    break
                total += a
            if u == v and self._norm(total - winding) == 0:
                return v
        return -1

    def complete_and_fold(self, relators: Sequence[Word], stop_when_accepted: bool = False) -> None:
        """Attach a voltage-0 loop for every relator at every current vertex, folding as we go."""
        m = self.m
        cols_list = [[column(x) for x in r] for r in relators]
        key = tuple(tuple(r) for r in relators)
        if key != self._sat_for:
            self.sat = [False] * len(self.parent)
            self._sat_for = key
        n0 = len(self.parent)
        for v0 in range(n0):
            if self.parent[v0] != v0 or self.sat[v0]:
                continue
            for cols in cols_list:
                v = self.find(v0)
                k = len(cols)
                f, vf, i = v, 0, 0
                while i < k:
                    t, a = self.step(f, cols[i])
                    if t < 0:
                        break
                    f, vf, i = t, vf + a, i + 1
                if i == k:
                    self.merge(f, v, -vf)
                    continue
                b, vb, j = v, 0, k
                while j > i:
                    t, a = self.step(b, cols[j - 1] ^ 1)
                    if t < 0:
                        break
                    b, vb, j = t, vb + a, j - 1
                if j == i:
                    self.merge(f, b, vb - vf)
                    continue
                prev = f
                for idx in range(i, j - 1):
                    nv = len(self.parent)
                    self._add(1)
                    c = cols[idx]
                    self.table[prev * m + c], self.volt[prev * m + c] = nv, 0
                    self.table[nv * m + (c ^ 1)], self.volt[nv * m + (c ^ 1)] = prev, 0
                    prev = nv
                # the closing edge can clash with the opening one when f == b
                self.join(prev, cols[j - 1], b, vb - vf)
            self.sat[self.find(v0)] = True

    def _bfs_order(self) -> list[int]:
        seen = set()
        order = []
        for s in [self.find(self.base_out)] + self.vertices():
            if s in seen:
                continue
            seen.add(s)
            queue = deque([s])
            while queue:
                v = queue.popleft()
                order.append(v)
                for c in range(self.m):
                    t, _ = self.step(v, c)
                    if t >= 0 and t not in seen:
                        seen.add(t)
                        queue.append(t)
        return order

    def compact(self) -> list[int]:
        """Renumber live vertices in BFS order and flatten voltages onto the roots."""
        m = self.m
        order = self._bfs_order()
        new_id = {v: i for i, v in enumerate(order)}
        table = [-1] * (m * len(order))
        volt = [0] * (m * len(order))
        for v in order:
            row = new_id[v] * m
            for c in range(m):
                t, a = self.step(v, c)
                if t >= 0:
                    table[row + c], volt[row + c] = new_id[t], self._norm(a)
        self.base_out = new_id[self.find(self.base_out)]
        self.table, self.volt = table, volt
        self.parent = list(range(len(order)))
        self.pot = [0] * len(order)
        self.sat = [self.sat[v] for v in order]
        self.live = len(order)
        return order

    def snapshot(self) -> LabeledGraph:
        order = self._bfs_order()
        new_id = {v: i for i, v in enumerate(order)}
        edges, volts = [], []
        for v in order:
            for c in range(0, self.m, 2):
                t, a = self.step(v, c)
                if t >= 0:
                    edges.append((new_id[v], new_id[t], c >> 1))
                    volts.append(self._norm(a))
        bo = new_id[self.find(self.base_out)]
        return LabeledGraph(len(order), tuple(edges), bo, bo, tuple(volts), self.modulus)

    def size(self) -> int:
        return self.live


def fold(g: LabeledGraph) -> LabeledGraph:
    """Stallings folding; the result is numbered canonically by BFS from ``base_out``."""
    return FoldedTable.from_graph(g).snapshot()


def complete(g: LabeledGraph, p: Presentation) -> LabeledGraph:
    """Attach, at every vertex, a loop labeled by each symmetrized relator (no folding)."""
    edges = list(g.edges)
    next_id = g.num_vertices
    for v in range(g.num_vertices):
        for r in p.relators:
            next_id = _add_loop(edges, v, r, next_id)
    return LabeledGraph(next_id, tuple(edges), g.base_out, g.base_in)


def trace(g: LabeledGraph, start: int, w: Sequence[int] | str) -> int | None:
    """End vertex of reading ``w`` from ``start`` in a folded graph, or ``None``."""
    if not g.is_folded():
        raise ValueError("trace needs a folded graph")
    v = start
    for x in as_word(w):
        targets = g.neighbors(v, x)
        if not targets:
            return None
        v = targets[0]
    return v


def trace_winding(g: LabeledGraph, start: int, w: Sequence[int] | str) -> tuple[int, int] | None:
    """Like :func:`trace`, also summing edge voltages (reduced by ``g.modulus``)."""
    if not g.is_folded():
        raise ValueError("trace needs a folded graph")
    volts = g.voltages or (0,) * len(g.edges)
    step: dict[tuple[int, int], tuple[int, int]] = {}
    for (s, t, gen), a in zip(g.edges, volts):
        step[(s, gen + 1)] = (t, a)
        step[(t, -(gen + 1))] = (s, -a)
    v, total = start, 0
    for x in as_word(w):
        nxt = step.get((v, x))
        if nxt is None:
            return None
        v, a = nxt
        total += a
    return v, (total % g.modulus if g.modulus else total)


def isomorphic(g: LabeledGraph, h: LabeledGraph) -> bool:
    """Based isomorphism test for folded graphs via canonical BFS numbering."""
    return fold(g) == fold(h)


# -- debug format ------------------------------------------------------------

def dump_graph(g: LabeledGraph, alphabet: str | None = None) -> str:
    lines = [f"v {v}" for v in g.vertices]
    for i, (s, t, gen) in enumerate(g.edges):
        line = f"e {s} {t} {format_word((gen + 1,), alphabet)}"
        if g.voltages is not None:
            line += f" {g.voltages[i]}"
        lines.append(line)
    lines.append(f"base_out {g.base_out}")
    if g.base_in is not None:
        lines.append(f"base_in {g.base_in}")
    if g.voltages is not None:
        lines.append(f"modulus {g.modulus}")
    return "\n".join(lines) + "\n"


def parse_graph(text: str, alphabet: str | None = None) -> LabeledGraph:
    ids: list[int] = []
    edges = []
    volts: list[int] = []
    base_out, base_in, modulus = 0, None, None
    for raw in text.splitlines():
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "v":
            ids.append(int(parts[1]))
        elif parts[0] == "e":
            (x,) = as_word(parts[3], alphabet)
            s, t = int(parts[1]), int(parts[2])
            a = int(parts[4]) if len(parts) > 4 else 0
            edges.append((s, t, x - 1) if x > 0 else (t, s, -x - 1))
            volts.append(a if x > 0 else -a)
        elif parts[0] == "base_out":
            base_out = int(parts[1])
        elif parts[0] == "base_in":
            base_in = int(parts[1])
        elif parts[0] == "modulus":
            modulus = int(parts[1])
        else:
            raise ValueError(f"unknown graph line {raw!r}")
    if sorted(ids) != list(range(len(ids))):
        raise ValueError("vertex ids must be 0..n-1")
    if modulus is None:
        return LabeledGraph(len(ids), tuple(edges), base_out, base_in)
    return LabeledGraph(len(ids), tuple(edges), base_out, base_in, tuple(volts), modulus)
