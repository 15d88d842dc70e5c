"""Command-line entry point: ``dehnlab <reduce|gen|solve|experiment|cmj|pkc>``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import harness
from .branching import OffspringDistribution, constants_of
from .challengers import random_conjugate, random_equal_word, random_subgroup_word, random_subgroup_word2
from .digraph import dump_graph
from .freegroup import (
    PresentationError,
    PresentationFile,
    build_presentation,
    cyclically_reduce,
    format_word,
    load_presentation_file,
    parse_word,
    reduce,
)
from .pkc import (
    InvalidKeyError,
    attack,
    attack_conj,
    decrypt,
    decrypt_conj,
    demo_keypair,
    encrypt,
    encrypt_conj,
    parse_key,
    serialize_key,
)
from .solvers import DEFAULT_MAX_ITER, solve_csp, solve_esp, solve_msp, solve_wsp

log = logging.getLogger("dehnlab")


def _ns(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(float(x)) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad n schedule {text!r}") from None


def _load(path: str | None) -> PresentationFile:
    if path is None:
        return PresentationFile(build_presentation(2, ["abAB"]))
    return load_presentation_file(path)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- subcommands ---------------------------------------------------------------

def cmd_reduce(args) -> int:
    w = parse_word(args.word)
    r = cyclically_reduce(w) if args.cyclic else reduce(w)
    print(format_word(r))
    return 0


def cmd_gen(args) -> int:
    pf = _load(args.presentation)
    p = pf.presentation
    subgroup = [p.parse(h) for h in args.sub] if args.sub else list(pf.subgroup)
    lines = []
    for n in args.n:
        for t in range(args.trials):
            seed = harness.trial_seed(args.seed, args.problem, n, t)
            if args.problem == "WSP":
                w, tr = random_equal_word(p, (), n, rng=seed)
            elif args.problem == "ESP":
                w, tr = random_equal_word(p, p.parse(args.word), n, rng=seed)
            elif args.problem == "CSP":
                w, tr = random_conjugate(p, p.parse(args.word), n, rng=seed)
            elif args.problem == "MSP1":
                w, tr = random_subgroup_word(p, subgroup, args.k, n, rng=seed)
            else:
                w, tr = random_subgroup_word2(p, subgroup, n, args.q, rng=seed)
            lines.append(f"{n} {seed} {p.format(w)}")
            lines.append(f"trace {tr.tree_height} {len(w)}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_solve(args) -> int:
    pf = _load(args.presentation)
    p = pf.presentation
    subgroup = [p.parse(h) for h in args.sub] if args.sub else list(pf.subgroup)
    w = p.parse(args.word)
    if args.problem == "WSP":
        out = solve_wsp(p, w, args.max_iter)
    elif args.problem == "ESP":
        out = solve_esp(p, w, p.parse(args.word2 or "1"), args.max_iter)
    elif args.problem == "CSP":
        out = solve_csp(p, w, p.parse(args.word2 or "1"), args.max_iter)
    else:
        out = solve_msp(p, subgroup, w, args.max_iter)
    print(f"{out.status.value} iterations={out.iterations} graph_size={out.graph_size}"
          + (f" locus={out.witness_locus[0]},{out.witness_locus[1]}" if out.witness_locus else "")
          + (f" ({out.note})" if out.note else ""))
    if args.dump_graph and out.witness is not None:
        sys.stdout.write(dump_graph(out.witness))
    return 0 if out.accepted else 1


def _config(args, problem: str) -> harness.ExperimentConfig:
    return harness.ExperimentConfig(
        problem=problem,
        ns=args.n,
        trials=args.trials,
        seed=args.seed,
        presentation_path=getattr(args, "presentation", None),
        word=getattr(args, "word", None),
        subgroup=tuple(args.sub) if getattr(args, "sub", None) else None,
        q=getattr(args, "q", 0.5),
        k=getattr(args, "k", 3),
        max_iter=getattr(args, "max_iter", None),
        offspring=getattr(args, "offspring", "1"),
        timing=getattr(args, "timing", False),
        keep_witnesses=getattr(args, "verify", False),
    )


def _run_and_write(cfg: harness.ExperimentConfig, out: str | None) -> harness.ExperimentResult:
    result = harness.run_experiment(cfg)
    _emit(result.to_csv(), out)
    return result


def cmd_experiment(args) -> int:
    result = _run_and_write(_config(args, args.problem), args.out)
    if args.problem != "CMJ":
        for n, frac in result.success_fractions().items():
            print(f"n={n} solved within {harness.envelope(n)} iterations: {frac:.3f}", file=sys.stderr)
    if args.verify:
        report = harness.verify_witnesses(result.witnesses)
        print(f"witnesses checked: {report.checked}, failures: {len(report.failures)}", file=sys.stderr)
        if not report.ok:
            return 1
    return 0


def cmd_cmj(args) -> int:
    _run_and_write(_config(args, "CMJ"), args.out)
    m = OffspringDistribution.parse(args.offspring)
    if m.mean > 0:
        c = constants_of(m.mean)
        print(f"EM={c.em:g} alpha={c.alpha:g} gamma={c.gamma:.9f} height_constant={c.height_constant:.6f}",
              file=sys.stderr)
    return 0


def cmd_pkc(args) -> int:
    if args.action == "keygen":
        if not args.demo:
            raise InvalidKeyError("only the bundled demo key can be generated (use --demo)")
        _emit(serialize_key(demo_keypair()), args.out)
        return 0
    if not args.key:
        raise InvalidKeyError("--key FILE is required")
    with open(args.key, encoding="utf-8") as fh:
        key = parse_key(fh.read())
    pub = key.public
    p = pub.presentation
    if args.action == "encrypt":
        enc = encrypt_conj if args.conj else encrypt
        c = enc(pub, args.bit, args.n[0], rng=args.seed)
        _emit(p.format(c) + "\n", args.out)
        return 0
    c = p.parse(args.cipher)
    budget = args.max_iter if args.max_iter is not None else DEFAULT_MAX_ITER
    if args.action == "decrypt":
        if not key.private:
            raise InvalidKeyError("decrypt needs priv lines in the key file")
        bit = (decrypt_conj if args.conj else decrypt)(key, c, budget)
    else:
        bit = (attack_conj if args.conj else attack)(pub, c, budget)
    print("undecided" if bit is None else bit)
    return 0 if bit is not None else 2


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dehnlab", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, problems=None):
        sp.add_argument("--presentation", metavar="FILE", help="presentation text file (default <a,b | abAB>)")
        sp.add_argument("--n", type=_ns, default=(100,), help="step count(s), comma separated")
        sp.add_argument("--trials", type=int, default=1)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", metavar="FILE")
        if problems:
            sp.add_argument("--problem", choices=problems, default=problems[0])

    sp = sub.add_parser("reduce", help="freely (or cyclically) reduce a word")
    sp.add_argument("word")
    sp.add_argument("--cyclic", action="store_true")
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("gen", help="generate random instances with their tree heights")
    common(sp, ["WSP", "ESP", "CSP", "MSP1", "MSP2"])
    sp.add_argument("--word", default=harness.DEFAULT_WORD, help="base word for ESP/CSP")
    sp.add_argument("--sub", action="append", help="subgroup generator (repeatable)")
    sp.add_argument("--q", type=float, default=0.5)
    sp.add_argument("--k", type=int, default=3)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("solve", help="run one solver on one instance")
    sp.add_argument("--presentation", metavar="FILE")
    sp.add_argument("--problem", choices=["WSP", "ESP", "CSP", "MSP"], default="WSP")
    sp.add_argument("--word", required=True)
    sp.add_argument("--word2", help="second word for ESP/CSP")
    sp.add_argument("--sub", action="append", help="subgroup generator (repeatable)")
    sp.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    sp.add_argument("--dump-graph", action="store_true", help="print the witness graph")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("experiment", help="challenger/solver experiment to CSV")
    common(sp, ["WSP", "ESP", "CSP", "MSP1", "MSP2", "PKC", "CMJ"])
    sp.add_argument("--word", default=None, help="base word for ESP/CSP")
    sp.add_argument("--sub", action="append", help="subgroup generator (repeatable)")
    sp.add_argument("--q", type=float, default=0.5)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--max-iter", type=int, default=None,
                    help="iteration cap (default: the envelope plus 2)")
    sp.add_argument("--offspring", default="1", help="offspring law for CMJ, e.g. 0:0.5,2:0.5")
    sp.add_argument("--timing", action="store_true", help="fill the time_ms column")
    sp.add_argument("--verify", action="store_true", help="re-trace every witness")
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("cmj", help="tree-height Monte Carlo to CSV")
    common(sp)
    sp.add_argument("--offspring", default="1", help="offspring law, e.g. 1 or 0:0.5,2:0.5")
    sp.set_defaults(func=cmd_cmj)

    sp = sub.add_parser("pkc", help="public-key demo: keygen, encrypt, decrypt, attack")
    sp.add_argument("action", choices=["keygen", "encrypt", "decrypt", "attack"])
    sp.add_argument("--demo", action="store_true")
    sp.add_argument("--key", metavar="FILE")
    sp.add_argument("--bit", type=int, choices=[0, 1], default=0)
    sp.add_argument("--n", type=_ns, default=(200,))
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--cipher", default="1")
    sp.add_argument("--conj", action="store_true", help="use the conjugacy variant")
    sp.add_argument("--max-iter", type=int, default=None)
    sp.add_argument("--out", metavar="FILE")
    sp.set_defaults(func=cmd_pkc)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (PresentationError, InvalidKeyError, ValueError) as exc:
        print(f"dehnlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
