"""Completion/folding solvers for the word, equivalence, membership and
conjugacy search problems, and the lockstep word-choice attack.

Every solver starts from a folded graph and repeats ``fold(complete(.))``.  The
iteration count at acceptance is an upper bound certificate for the
corresponding diagram depth.  Exhaustion says nothing about the instance.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Sequence

from .digraph import FoldedTable, LabeledGraph, VoltageTable, graph_of_word, trace, trace_winding, wedge_graph
from .freegroup import Presentation, Word, as_word, concat, cyclically_reduce, invert, reduce, word_key

log = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 20


class Status(enum.Enum):
    ACCEPTED = "accepted"
    EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class SolveOutcome:
    status: Status
    iterations: int
    witness: LabeledGraph | None = None
    witness_locus: tuple[int, int] | None = None
    graph_size: int = 0
    note: str | None = None

    @property
    def accepted(self) -> bool:
        return self.status is Status.ACCEPTED


def half_relators(p: Presentation) -> list[Word]:
    """One word from each ``{r, r^-1}`` pair of the symmetrized relators."""
    return [r for r in p.relators if word_key(r) <= word_key(invert(r))]


class _Completion:
    """Incremental ``Gamma_i = S(C(Gamma_{i-1}))`` driver used by all solvers.

    With ``loop_word`` set the table is a :class:`VoltageTable` and acceptance
    means ``loop_word`` reads a closed path winding once around the start cycle.
    """

    def __init__(self, p: Presentation, start: LabeledGraph | VoltageTable, loop_word: Word | None = None):
        self.p = p
        self.relators = half_relators(p)
        if isinstance(start, VoltageTable):
            self.table = start
        else:
            self.table = FoldedTable.from_graph(start, p.num_generators)
        self.table.compact()
        self.loop_word = loop_word
        self.iterations = 0
        self.locus: int = -1
        self.done = self._check()

    def _check(self) -> bool:
        if self.loop_word is None:
            return self.table.accepted()
        self.locus = self.table.find_loop(self.loop_word)
        return self.locus >= 0

    def advance(self) -> bool:
        """Run one completion round; return whether the instance is now accepted."""
        if self.done:
            return True
        self.iterations += 1
        self.table.complete_and_fold(self.relators, stop_when_accepted=self.loop_word is None)
        # reclaim merged-away rows once they outnumber the live ones
        if len(self.table.parent) > 2 * self.table.live:
            self.table.compact()
        self.done = self._check()
        return self.done

    def outcome(self) -> SolveOutcome:
        if not self.done:
            return SolveOutcome(Status.EXHAUSTED, self.iterations, graph_size=self.table.size())
        witness = self.table.snapshot()
        locus = None
        if self.loop_word is not None:
            # snapshot renumbers vertices; re-locate the loop in the exported graph
            locus = (_find_loop_in(witness, self.loop_word), 0)
        return SolveOutcome(Status.ACCEPTED, self.iterations, witness, locus, witness.num_vertices)


def _winds_once(g: LabeledGraph, v: int, w: Word) -> bool:
    hit = trace_winding(g, v, w)
    if hit is None or hit[0] != v:
        return False
    return (hit[1] - 1) % g.modulus == 0 if g.modulus else hit[1] == 1


def _find_loop_in(g: LabeledGraph, w: Word) -> int:
    for v in g.vertices:
        if _winds_once(g, v, w):
            return v
    raise AssertionError("loop vanished on export")


def _run(driver: _Completion, max_iter: int) -> SolveOutcome:
    if max_iter < 0:
        raise ValueError("max_iter must be non-negative")
    while not driver.done and driver.iterations < max_iter:
        driver.advance()
    return driver.outcome()


def solve_wsp(p: Presentation, w: Sequence[int] | str, max_iter: int = DEFAULT_MAX_ITER) -> SolveOutcome:
    """Search for a proof that ``w`` is trivial in the group."""
    w = as_word(w, p.alphabet)
    return _run(_Completion(p, graph_of_word(w)), max_iter)


def solve_esp(p: Presentation, w1, w2, max_iter: int = DEFAULT_MAX_ITER) -> SolveOutcome:
    w1, w2 = as_word(w1, p.alphabet), as_word(w2, p.alphabet)
    return solve_wsp(p, reduce(concat(w1, invert(w2))), max_iter)


def solve_msp(p: Presentation, subgroup: Sequence, w, max_iter: int = DEFAULT_MAX_ITER) -> SolveOutcome:
    """Search for a proof that ``w`` lies in the subgroup generated by ``subgroup``."""
    w = as_word(w, p.alphabet)
    hs = [as_word(h, p.alphabet) for h in subgroup]
    return _run(_Completion(p, wedge_graph(w, hs)), max_iter)


def _csp_driver(p: Presentation, w1, w2) -> tuple[_Completion | None, Word, Word]:
    u1 = cyclically_reduce(as_word(w1, p.alphabet))
    u2 = cyclically_reduce(as_word(w2, p.alphabet))
    if not u1 or not u2:
        return None, u1, u2
    return _Completion(p, VoltageTable.cycle(u1, p.num_generators), loop_word=u2), u1, u2


def solve_csp(p: Presentation, w1, w2, max_iter: int = DEFAULT_MAX_ITER) -> SolveOutcome:
    """Search for a proof that ``w1`` and ``w2`` are conjugate.

    The start graph is the cycle reading the cyclic reduction of ``w1``.  After
    each round the solver accepts if the cyclic reduction of ``w2`` reads a
    closed path winding exactly once around that cycle; the locus
    ``(vertex, shift)`` is the witness.  Without the winding condition every
    power of ``w1`` would be accepted.  In a folded graph, if some cyclic shift
    of ``w2`` is such a loop then ``w2`` itself is one at a vertex on it, so the
    reported shift is always 0.
    """
    driver, u1, u2 = _csp_driver(p, w1, w2)
    if driver is None:
        other = u2 if not u1 else u1
        out = solve_wsp(p, other, max_iter)
        return SolveOutcome(out.status, out.iterations, out.witness,
                            (out.witness.base_out, 0) if out.accepted else None,
                            out.graph_size, note="degenerate: one side is trivial")
    return _run(driver, max_iter)


def check_witness(outcome: SolveOutcome, word: Sequence[int], conjugacy: bool = False) -> bool:
    """Re-trace the instance word in the witness graph of an accepted outcome."""
    g = outcome.witness
    if not outcome.accepted or g is None:
        return False
    if conjugacy:
        v, shift = outcome.witness_locus
        u = cyclically_reduce(word)
        u = u[shift:] + u[:shift]
        if g.voltages is None:
            return trace(g, v, u) == v
        return _winds_once(g, v, u)
    end = trace(g, g.base_out, word)
    return end is not None and end == g.base_in


def word_choice_attack(p: Presentation, w0, w1, w, step_budget: int = DEFAULT_MAX_ITER,
                       conjugacy: bool = False) -> int | None:
    """Decide which of ``w0``, ``w1`` equals (or is conjugate to) ``w``.

    Runs two solvers in lockstep, one round each per step, and returns the
    index of the first to accept, or ``None`` if neither accepts within
    ``step_budget`` rounds.
    """
    result, _ = lockstep(p, w0, w1, w, step_budget, conjugacy)
    return result


def lockstep(p: Presentation, w0, w1, w, step_budget: int = DEFAULT_MAX_ITER,
             conjugacy: bool = False) -> tuple[int | None, int]:
    """As :func:`word_choice_attack`, also returning the number of rounds used."""
    w0, w1, w = (as_word(x, p.alphabet) for x in (w0, w1, w))
    drivers = []
    for target in (w0, w1):
        if conjugacy:
            d, u1, u2 = _csp_driver(p, target, w)
            if d is None:
                d = _Completion(p, graph_of_word(u1 or u2))
        else:
            d = _Completion(p, graph_of_word(reduce(concat(w, invert(target)))))
        drivers.append(d)
    rounds = 0
    while True:
        hits = [d.done for d in drivers]
        if hits[0] and hits[1]:
            log.warning("both branches accepted in round %d; answering 0", rounds)
            return 0, rounds
        if hits[0] or hits[1]:
            return (0 if hits[0] else 1), rounds
        if rounds >= step_budget:
            return None, rounds
        rounds += 1
        for d in drivers:
            d.advance()
