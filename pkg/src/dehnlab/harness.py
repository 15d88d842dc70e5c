"""Experiment orchestration: generate instances, solve them, and emit CSV.

Every trial gets its own seed, derived from ``(master seed, problem, n, trial)``
through ``numpy.random.SeedSequence``, so any single row can be regenerated
from the seed column alone.  Rows are sorted by ``(n, trial)`` before being
written, so the worker count never changes the output.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .branching import E2, OffspringDistribution, estimate_height_ratio
from .challengers import (
    random_conjugate,
    random_equal_word,
    random_subgroup_word,
    random_subgroup_word2,
)
from .freegroup import (
    Presentation,
    PresentationFile,
    Word,
    build_presentation,
    concat,
    cyclically_reduce,
    invert,
    load_presentation_file,
    reduce,
)
from .pkc import KeyPair, PublicKey, attack_rounds, demo_keypair, encrypt_traced
from .solvers import SolveOutcome, check_witness, solve_csp, solve_esp, solve_msp, solve_wsp

log = logging.getLogger(__name__)

PROBLEMS = ("WSP", "ESP", "CSP", "MSP1", "MSP2", "CMJ", "PKC")
HEADER = ("problem", "n", "trial", "seed", "word_len", "tree_height", "iterations",
          "graph_size", "time_ms", "bound", "within_bound")
CMJ_HEADER = ("EM", "n", "trial", "height", "ratio")

DEFAULT_PRESENTATION = ("ab", ["abAB"])
DEFAULT_WORD = "ab"
DEFAULT_SUBGROUP = ("ab",)


class DepthChainViolation(AssertionError):
    """A solver needed more rounds than the instance's tree height allows."""


def envelope(n: int) -> int:
    """The iteration envelope ``ceil(e^2 ln max(n, 2))``."""
    return math.ceil(E2 * math.log(max(n, 2)))


def trial_seed(master: int, problem: str, n: int, trial: int) -> int:
    ss = np.random.SeedSequence([master, PROBLEMS.index(problem), n, trial])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    ns: tuple[int, ...]
    trials: int = 1
    seed: int = 0
    presentation_path: str | None = None
    word: str | None = None
    subgroup: tuple[str, ...] | None = None
    q: float = 0.5
    k: int = 3
    max_iter: int | None = None
    offspring: str = "1"
    timing: bool = False
    keep_witnesses: bool = False

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}; expected one of {PROBLEMS}")
        if not self.ns:
            raise ValueError("the n schedule is empty")
        if any(n < 0 for n in self.ns):
            raise ValueError("n must be non-negative")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.problem == "MSP2" and not 0 <= self.q < 1:
            raise ValueError("q must lie in [0, 1) for MSP2")
        if self.k < 0:
            raise ValueError("k must be non-negative")
        if self.problem == "CMJ" and min(self.ns) < 2:
            raise ValueError("CMJ needs n >= 2")
        if self.max_iter is not None and self.max_iter < 0:
            raise ValueError("max_iter must be non-negative")

    def iteration_cap(self, n: int) -> int:
        return self.max_iter if self.max_iter is not None else envelope(n) + 2


@dataclass(frozen=True)
class Row:
    problem: str
    n: int
    trial: int
    seed: int
    word_len: int
    tree_height: int
    iterations: int
    graph_size: int
    time_ms: float | None
    bound: int
    within_bound: bool
    accepted: bool = field(default=True, compare=False)

    def cells(self) -> list[str]:
        t = "" if self.time_ms is None else f"{self.time_ms:.3f}"
        return [self.problem, str(self.n), str(self.trial), str(self.seed), str(self.word_len),
                str(self.tree_height), str(self.iterations), str(self.graph_size), t,
                str(self.bound), "true" if self.within_bound else "false"]


@dataclass(frozen=True)
class WitnessRecord:
    problem: str
    n: int
    trial: int
    word: Word
    outcome: SolveOutcome
    conjugacy: bool = False


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list = field(default_factory=list)
    witnesses: list[WitnessRecord] = field(default_factory=list)

    @property
    def header(self) -> tuple[str, ...]:
        return CMJ_HEADER if self.config.problem == "CMJ" else HEADER

    def to_csv(self) -> str:
        buf = io.StringIO()
        write_csv(self, buf)
        return buf.getvalue()

    def success_fractions(self) -> dict[int, float]:
        return success_fractions(self.rows)


# -- context shared by all trials --------------------------------------------

@dataclass(frozen=True)
class _Context:
    config: ExperimentConfig
    presentation: Presentation
    word: Word
    subgroup: tuple[Word, ...]
    key: KeyPair | None


def _load_context(cfg: ExperimentConfig) -> _Context:
    pf: PresentationFile | None = None
    if cfg.presentation_path:
        try:
            pf = load_presentation_file(cfg.presentation_path)
        except OSError as exc:
            raise ValueError(f"cannot read presentation file: {exc}") from exc
        p = pf.presentation
    else:
        p = build_presentation(len(DEFAULT_PRESENTATION[0]), DEFAULT_PRESENTATION[1])

    key = None
    if cfg.problem == "PKC":
        if pf is not None and pf.w0 is not None and pf.w1 is not None:
            key = KeyPair(PublicKey(p, pf.w0, pf.w1), pf.private)
        elif pf is None:
            key = demo_keypair()
        else:
            raise ValueError("PKC needs w0 and w1 lines in the presentation file")

    # base words and subgroups are only parsed for the problems that use them
    word: Word = ()
    if cfg.problem in ("ESP", "CSP"):
        word = p.parse(cfg.word if cfg.word is not None else DEFAULT_WORD)
        p.check_word(word)
    if cfg.problem == "CSP" and not cyclically_reduce(word):
        raise ValueError("CSP needs a base word that is not conjugate to 1 in F(X)")

    subgroup: tuple[Word, ...] = ()
    if cfg.problem in ("MSP1", "MSP2"):
        if cfg.subgroup is not None:
            subgroup = tuple(p.parse(h) for h in cfg.subgroup)
        elif pf is not None and pf.subgroup:
            subgroup = pf.subgroup
        else:
            subgroup = tuple(p.parse(h) for h in DEFAULT_SUBGROUP)
        for h in subgroup:
            p.check_word(h)
        if not any(subgroup):
            raise ValueError("MSP needs a non-empty subgroup")
    return _Context(cfg, p, word, subgroup, key)


# -- one trial ---------------------------------------------------------------

def _check_depth_chain(problem: str, n: int, trial: int, accepted: bool, iterations: int,
                       cap: int, height: int) -> None:
    if accepted and iterations > height:
        raise DepthChainViolation(
            f"{problem} n={n} trial={trial}: {iterations} iterations > tree height {height}")
    if not accepted and cap >= height:
        raise DepthChainViolation(
            f"{problem} n={n} trial={trial}: not accepted within {cap} >= tree height {height}")


def _run_trial(ctx: _Context, n: int, trial: int) -> tuple[Row, WitnessRecord | None]:
    cfg = ctx.config
    problem = cfg.problem
    p = ctx.presentation
    seed = trial_seed(cfg.seed, problem, n, trial)
    rng = np.random.default_rng(seed)
    cap = cfg.iteration_cap(n)
    bound = envelope(n)
    record = None

    t0 = time.perf_counter()
    if problem == "PKC":
        bit = int(rng.integers(0, 2))
        c, tr = encrypt_traced(ctx.key.public, bit, n, rng)
        result, rounds = attack_rounds(ctx.key.public, c, cap)
        if result is not None and result != bit:
            raise AssertionError(f"attack decoded {result} for bit {bit} (n={n}, trial={trial})")
        accepted, iterations, size, out_word = result is not None, rounds, 0, c
    else:
        if problem == "WSP":
            out_word, tr = random_equal_word(p, (), n, rng=rng)
            outcome = solve_wsp(p, out_word, cap)
            check, conj = out_word, False
        elif problem == "ESP":
            out_word, tr = random_equal_word(p, ctx.word, n, rng=rng)
            outcome = solve_esp(p, ctx.word, out_word, cap)
            check, conj = reduce(concat(ctx.word, invert(out_word))), False
        elif problem == "CSP":
            out_word, tr = random_conjugate(p, ctx.word, n, rng=rng)
            outcome = solve_csp(p, ctx.word, out_word, cap)
            u2 = cyclically_reduce(out_word)
            check, conj = (u2, True) if u2 else (cyclically_reduce(ctx.word), True)
        elif problem == "MSP1":
            out_word, tr = random_subgroup_word(p, ctx.subgroup, cfg.k, n, rng=rng)
            outcome = solve_msp(p, ctx.subgroup, out_word, cap)
            check, conj = out_word, False
        elif problem == "MSP2":
            out_word, tr = random_subgroup_word2(p, ctx.subgroup, n, cfg.q, rng=rng)
            outcome = solve_msp(p, ctx.subgroup, out_word, cap)
            check, conj = out_word, False
        else:
            raise ValueError(f"no trial runner for {problem}")
        accepted, iterations, size = outcome.accepted, outcome.iterations, outcome.graph_size
        if cfg.keep_witnesses and accepted:
            record = WitnessRecord(problem, n, trial, check, outcome, conj)
    elapsed = (time.perf_counter() - t0) * 1000.0

    _check_depth_chain(problem, n, trial, accepted, iterations, cap, tr.tree_height)
    row = Row(problem, n, trial, seed, len(out_word), tr.tree_height, iterations, size,
              elapsed if cfg.timing else None, bound, accepted and iterations <= bound, accepted)
    return row, record


def _run_task(args) -> tuple[Row, WitnessRecord | None]:
    ctx, n, trial = args
    return _run_trial(ctx, n, trial)


def worker_count(tasks: int) -> int:
    cap = os.environ.get("DEHNLAB_WORKERS")
    workers = os.cpu_count() or 1
    if cap:
        workers = min(workers, max(1, int(cap)))
    return max(1, min(workers, tasks))


# -- experiments --------------------------------------------------------------

def _run_cmj(cfg: ExperimentConfig) -> ExperimentResult:
    m = OffspringDistribution.parse(cfg.offspring)
    result = ExperimentResult(cfg)
    em = f"{m.mean:g}"
    for n in sorted(set(cfg.ns)):
        seed = trial_seed(cfg.seed, "CMJ", n, 0)
        summary = estimate_height_ratio(m, n, cfg.trials, seed)
        for trial, (h, ratio) in enumerate(zip(summary.heights, summary.ratios)):
            result.rows.append((em, str(n), str(trial), str(h), f"{ratio:.6f}"))
        mean_h = sum(summary.heights) / len(summary.heights)
        result.rows.append((em, str(n), "mean", f"{mean_h:.4f}", f"{summary.mean:.6f}"))
    return result


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run every ``(n, trial)`` of the schedule; raises on any depth-chain violation."""
    if cfg.problem == "CMJ":
        return _run_cmj(cfg)
    ctx = _load_context(cfg)
    tasks = [(ctx, n, t) for n in sorted(set(cfg.ns)) for t in range(cfg.trials)]
    workers = worker_count(len(tasks))
    if workers == 1:
        outputs = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    outputs.sort(key=lambda o: (o[0].n, o[0].trial))
    result = ExperimentResult(cfg)
    for row, record in outputs:
        result.rows.append(row)
        if record is not None:
            result.witnesses.append(record)
    return result


def success_fractions(rows: Iterable[Row]) -> dict[int, float]:
    """Per ``n``, the fraction of rows solved within the envelope."""
    hit: dict[int, int] = {}
    total: dict[int, int] = {}
    for r in rows:
        total[r.n] = total.get(r.n, 0) + 1
        hit[r.n] = hit.get(r.n, 0) + int(r.within_bound)
    return {n: hit[n] / total[n] for n in sorted(total)}


def write_csv(result: ExperimentResult, out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(result.header)
    for row in result.rows:
        writer.writerow(row.cells() if isinstance(row, Row) else row)


# -- witness verification ----------------------------------------------------

@dataclass(frozen=True)
class WitnessReport:
    checked: int
    failures: tuple[tuple[str, int, int], ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_witnesses(records: Sequence[WitnessRecord]) -> WitnessReport:
    """Re-trace every retained witness; each failure is reported by ``(problem, n, trial)``."""
    failures = []
    for rec in records:
        if not check_witness(rec.outcome, rec.word, conjugacy=rec.conjugacy):
            failures.append((rec.problem, rec.n, rec.trial))
    return WitnessReport(len(records), tuple(failures))
