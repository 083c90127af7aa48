"""Command-line entry point: ``confdfa <command> [flags]``.

Exit codes: 0 success, 1 a check or search came out negative, 2 bad usage or
unreadable input, 3 the learner hit its state cap.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from .automata import AutomatonError, Dfa, format_dfa, load_dfa, mod_language, random_dfa, save_dfa
from .encodings import EncodingSizeError, build_example_set, build_instance, to_dimacs, to_lp, to_smtlib
from .learner import EpsilonSchedule, LearnerAbort, LearnerConfig, learn
from .lemmas import check_derivative_bound, check_single_edit_bound, report_json
from .metric import OracleLanguage, exact_distance_truncated, tail_mass
from .oracle import GeometricOracle, as_fraction, empirical_oracle, perturb, read_labelled_csv, truncation_length
from .solve import BackendError, ModelParseError, backend_from_spec, brute_force_minimal, minimal_search, solve_instance
from .solve.search import SearchError

BENCH_HEADER = "family,target,rep,n,verdict,seconds,vars,constraints"


class UsageError(Exception):
    pass


# --- shared flag groups --------------------------------------------------------


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="seed for every random choice (default 0)")
    p.add_argument("--alphabet", type=int, default=2, help="alphabet size for generated languages (default 2)")
    p.add_argument("--lambda", dest="lam", type=float, default=0.9, help="geometric length parameter (default 0.9)")
    p.add_argument("--eta", type=float, default=None, help="error budget")
    p.add_argument("--k", type=int, default=None, help="truncation length")
    return p


def _oracle_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--base", help="ground-truth DFA file for a geometric oracle")
    src.add_argument("--mod", type=int, help="use the mod-N language as ground truth")
    src.add_argument("--random", type=int, metavar="N", help="use a random N-state DFA as ground truth")
    src.add_argument("--data", help="CSV of 'string,label' samples (empirical oracle)")
    p.add_argument("--perturb", type=float, default=None, metavar="ETA",
                   help="flip signs on strings of total mass at most ETA")
    p.add_argument("--perturb-strategy", choices=("random", "shortest"), default="random")
    return p


def _example_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--eta-trunc", type=float, default=None,
                   help="pick k as the smallest length whose tail mass is at most this")
    return p


def _encoding_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--direction", choices=("naive", "forward", "backward"), default="backward")
    p.add_argument("--flavor", choices=("exact-sat", "eta-smt", "eta-mip"), default=None,
                   help="default: exact-sat, or eta-smt when --eta is given")
    return p


def _backend_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--backend", default="builtin-sat",
                   help='builtin-sat | builtin-mip | replay:<json> | smt:cmd="z3 {file}" | sat:cmd=... | mip:cmd=...')
    p.add_argument("--timeout-secs", type=float, default=None, help="per-size solver timeout")
    p.add_argument("--n-max", type=int, default=10)
    return p


def build_oracle(args):
    if args.data:
        oracle = empirical_oracle(read_labelled_csv(_existing(args.data)))
    else:
        if args.base:
            base = load_dfa(_existing(args.base))
        elif args.mod:
            base = mod_language(args.mod, args.alphabet)
        elif args.random:
            base = random_dfa(args.random, args.alphabet, seed=args.seed)
        else:
            raise UsageError("choose an oracle with --base, --mod, --random or --data")
        oracle = GeometricOracle(base, args.lam)
    if args.perturb:
        oracle = perturb(oracle, args.perturb, strategy=args.perturb_strategy, seed=args.seed)
    return oracle


def build_examples(args, oracle=None):
    oracle = build_oracle(args) if oracle is None else oracle
    if args.k is not None:
        k = args.k
    elif args.eta_trunc is not None:
        k = truncation_length(oracle, args.eta_trunc)
    else:
        raise UsageError("give --k or --eta-trunc to fix the example set")
    return build_example_set(oracle, k), k


def _existing(path: str) -> str:
    if not Path(path).is_file():
        raise UsageError(f"no such file: {path}")
    return path


def _flavor(args) -> str:
    if args.flavor:
        return args.flavor
    return "eta-smt" if args.eta else "exact-sat"


def _eta(args) -> Fraction:
    return as_fraction(args.eta or 0)


# --- commands ------------------------------------------------------------------


def cmd_oracle_info(args) -> int:
    oracle = build_oracle(args)
    print(f"oracle        {type(oracle).__name__}")
    print(f"alphabet      {oracle.alphabet_size}")
    if isinstance(oracle, GeometricOracle):
        print(f"lambda        {oracle.lam}")
        print(f"base states   {oracle.base.n}")
    if hasattr(oracle, "spent_budget"):
        print(f"flipped mass  {oracle.spent_budget:.6g} ({len(oracle.flipped)} strings)")
    k = args.k if args.k is not None else 10
    print(f"mass <= {k:<5} {oracle.length_cdf(k):.12g}")
    print(f"tail > {k:<6} {tail_mass(oracle, k):.12g}")
    if args.eta:
        print(f"k for eta={args.eta:g}  {truncation_length(oracle, args.eta)}")
    try:
        scale = ", ".join(f"{oracle.prefix_scaling(j):.6g}" for j in range(4))
        print(f"c(0..3)       {scale}")
    except NotImplementedError:
        pass
    return 0


def cmd_learn(args) -> int:
    oracle = build_oracle(args)
    if args.eps is not None:
        schedule = EpsilonSchedule.constant(args.eps)
    else:
        schedule = EpsilonSchedule.geometric(args.eta if args.eta is not None else 1e-4)
    config = LearnerConfig(schedule, samples_per_test=args.samples, delta=args.delta,
                           max_states=args.max_states, seed=args.seed, labeling=args.labeling)
    try:
        dfa, transcript = learn(oracle, config)
    except LearnerAbort as abort:
        if args.transcript:
            Path(args.transcript).write_text(abort.transcript.to_text())
        print(f"learner stopped: {abort}", file=sys.stderr)
        print(f"access strings so far: {len(abort.access_strings)}", file=sys.stderr)
        return 3
    if args.transcript:
        Path(args.transcript).write_text(transcript.to_text())
    if args.out:
        save_dfa(dfa, args.out)
    else:
        sys.stdout.write(format_dfa(dfa))
    print(f"states {dfa.n}")
    if args.report_k is not None:
        try:
            d = exact_distance_truncated(oracle, OracleLanguage(oracle), dfa, args.report_k)
            print(f"d<={args.report_k}(L_Q, hypothesis) = {d:.12g}  (+ tail {tail_mass(oracle, args.report_k):.3g})")
        except ValueError as exc:
            print(f"distance report skipped: {exc}", file=sys.stderr)
    return 0


def cmd_encode(args) -> int:
    examples, k = build_examples(args)
    flavor = _flavor(args)
    inst = build_instance(examples, args.n, args.direction, flavor, _eta(args))
    fmt = args.format or {"exact-sat": "smt2", "eta-smt": "smt2", "eta-mip": "lp"}[flavor]
    mapping = None
    if fmt == "smt2":
        text = to_smtlib(inst)
    elif fmt == "lp":
        text = to_lp(inst)
    else:
        text, mapping = to_dimacs(inst)
    if args.out:
        Path(args.out).write_text(text)
        if mapping is not None:
            Path(args.mapping or args.out + ".map").write_text(mapping)
    else:
        sys.stdout.write(text)
    print(f"k={k} examples={len(examples)} n={args.n} {args.direction} {flavor}: "
          f"{inst.num_variables} variables, {inst.num_constraints} constraints", file=sys.stderr)
    return 0


def cmd_solve(args) -> int:
    examples, k = build_examples(args)
    backend = backend_from_spec(args.backend)
    report = minimal_search(examples, backend, eta=_eta(args), direction=args.direction, flavor=args.flavor,
                            n_max=args.n_max, timeout=args.timeout_secs)
    csv_text = report.to_csv()
    if args.csv:
        Path(args.csv).write_text(csv_text)
    sys.stdout.write(csv_text)
    if report.winner is None:
        why = "search incomplete" if not report.complete else f"no DFA with at most {args.n_max} states"
        print(why, file=sys.stderr)
        return 1
    n, dfa = report.winner
    print(f"minimal size {n}", file=sys.stderr)
    if args.out:
        save_dfa(dfa, args.out)
    return 0


def _bench_targets(args) -> list[tuple[str, str, Dfa]]:
    lo, hi = _size_range(args.sizes)
    if args.family == "mod":
        return [("mod", str(n), mod_language(n, args.alphabet)) for n in range(lo, hi + 1)]
    if args.family == "random":
        return [("random", str(n), random_dfa(n, args.alphabet, seed=args.seed + n)) for n in range(lo, hi + 1)]
    if not args.files:
        raise UsageError("--family file needs --files")
    return [("file", f, load_dfa(_existing(f))) for f in args.files]


def _size_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition("..")
    try:
        lo, hi = int(lo), int(hi or lo)
    except ValueError:
        raise UsageError(f"bad size range {text!r}; expected e.g. 1..4") from None
    if lo < 1 or hi < lo:
        raise UsageError(f"empty size range {text!r}")
    return lo, hi


def cmd_bench(args) -> int:
    if args.repetitions < 1:
        raise UsageError("--repetitions must be at least 1")
    targets = _bench_targets(args)
    backend = backend_from_spec(args.backend)
    eta = _eta(args)
    flavor = args.flavor or {"sat": "exact-sat", "smt": "eta-smt" if eta else "exact-sat", "mip": "eta-mip"}[backend.kind]

    def examples_for(target):
        oracle = GeometricOracle(target[2], args.lam)
        return build_examples(args, oracle)[0]

    # example sets may be built in parallel; solving stays sequential
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        example_sets = list(pool.map(examples_for, targets))

    rows, points = [BENCH_HEADER], []
    for (family, label, _), examples in zip(targets, example_sets):
        for rep in range(args.repetitions):
            if args.fixed_size:
                records = []
                for n in range(1, args.fixed_size + 1):
                    inst = build_instance(examples, n, args.direction, flavor, eta)
                    t0 = time.perf_counter()
                    try:
                        verdict, _, _ = solve_instance(inst, backend, args.timeout_secs)
                    except (BackendError, ModelParseError, SearchError, ValueError) as exc:
                        verdict = "error"
                        print(f"{family} {label} n={n}: {exc}", file=sys.stderr)
                    secs = max(time.perf_counter() - t0, 1e-9)
                    records.append((n, verdict, secs, inst.num_variables, inst.num_constraints))
                    points.append((n, secs))
            else:
                try:
                    report = minimal_search(examples, backend, eta=eta, direction=args.direction, flavor=flavor,
                                            n_max=args.n_max, timeout=args.timeout_secs)
                    records = [(r.n, r.verdict, r.seconds, r.variables, r.constraints) for r in report.records]
                    points.append((report.n_star or 0, sum(r[2] for r in records)))
                except (BackendError, ModelParseError, SearchError, ValueError) as exc:
                    print(f"{family} {label}: {exc}", file=sys.stderr)
                    records = [(0, "error", 0.0, 0, 0)]
            for n, verdict, secs, nv, nc in records:
                rows.append(f"{family},{label},{rep},{n},{verdict},{secs:.6f},{nv},{nc}")
    text = "\n".join(rows) + "\n"
    if args.csv:
        Path(args.csv).write_text(text)
    else:
        sys.stdout.write(text)
    if args.dat:
        xlabel = "encoding size n" if args.fixed_size else "minimal size n*"
        lines = [f"# {xlabel} vs solver seconds", f"# backend {backend.name}, {args.direction} {flavor}"]
        lines += [f"{x} {y:.6f}" for x, y in points]
        Path(args.dat).write_text("\n".join(lines) + "\n")
    return 0


def cmd_check_lemmas(args) -> int:
    k = args.k if args.k is not None else 16
    reports = []
    if args.which in ("both", "derivative"):
        reports.append(check_derivative_bound(args.trials, args.alphabet, args.max_states, args.lam, k, seed=args.seed))
    if args.which in ("both", "single-edit"):
        reports.append(check_single_edit_bound(args.trials, args.alphabet, args.max_states, args.lam, k,
                                               seed=args.seed))
    bad = False
    for rep in reports:
        print(rep.summary())
        if rep.violations:
            bad = True
            dump = report_json(rep)
            if args.out:
                Path(args.out).write_text(dump)
            else:
                print(dump)
    return 1 if bad else 0


def cmd_brute_min(args) -> int:
    examples, k = build_examples(args)
    try:
        n_star, dfa, best = brute_force_minimal(examples, _eta(args), args.n_max)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    for n, d in best.items():
        print(f"n={n} best misclassified weight {d} ({float(d):.6g})")
    if n_star is None:
        print(f"no DFA with at most {args.n_max} states within eta", file=sys.stderr)
        return 1
    print(f"minimal size {n_star}")
    sys.stdout.write(format_dfa(dfa))
    return 0


# --- parser --------------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    glob, orc, exa, enc, bak = _global_flags(), _oracle_flags(), _example_flags(), _encoding_flags(), _backend_flags()
    parser = argparse.ArgumentParser(prog="confdfa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("oracle-info", parents=[glob, orc], help="describe an oracle and its truncation")
    p.set_defaults(func=cmd_oracle_info)

    p = sub.add_parser("learn", parents=[glob, orc], help="run the epsilon-closure learner")
    p.add_argument("--eps", type=float, default=None, help="constant threshold instead of the eta schedule")
    p.add_argument("--samples", type=int, default=100_000, help="samples per distance test")
    p.add_argument("--delta", type=float, default=0.01, help="failure probability per test")
    p.add_argument("--max-states", type=int, default=64)
    p.add_argument("--labeling", choices=("sign", "majority"), default="sign")
    p.add_argument("--out", help="write the hypothesis DFA here")
    p.add_argument("--transcript", help="write the decision transcript here")
    p.add_argument("--report-k", type=int, default=None, help="print the exact distance truncated at this length")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("encode", parents=[glob, orc, exa, enc], help="emit an identification instance")
    p.add_argument("--n", type=int, required=True, help="number of DFA states")
    p.add_argument("--format", choices=("smt2", "dimacs", "lp"), default=None)
    p.add_argument("--out")
    p.add_argument("--mapping", help="DIMACS name-mapping file (default <out>.map)")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("solve", parents=[glob, orc, exa, enc, bak], help="search for the smallest fitting DFA")
    p.add_argument("--csv", help="write the per-size report here")
    p.add_argument("--out", help="write the winning DFA here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", parents=[glob, exa, enc, bak], help="timing sweep over a language family")
    p.add_argument("--family", choices=("mod", "random", "file"), default="mod")
    p.add_argument("--sizes", default="1..4", help="target size range, e.g. 2..5")
    p.add_argument("--files", nargs="*", help="DFA files for --family file")
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--fixed-size", type=int, default=None, metavar="N",
                   help="solve every encoding size 1..N instead of stopping at the first fit")
    p.add_argument("--jobs", type=int, default=1, help="threads for building example sets")
    p.add_argument("--csv", help="CSV output (default stdout)")
    p.add_argument("--dat", help="two-column gnuplot data file")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("check-lemmas", parents=[glob], help="randomized exact checks of the derivative bounds")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--max-states", type=int, default=5)
    p.add_argument("--which", choices=("both", "derivative", "single-edit"), default="both")
    p.add_argument("--out", help="write counterexamples (JSON) here")
    p.set_defaults(func=cmd_check_lemmas)

    p = sub.add_parser("brute-min", parents=[glob, orc, exa], help="exhaustive minimal DFA for small instances")
    p.add_argument("--n-max", type=int, default=3)
    p.set_defaults(func=cmd_brute_min)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, AutomatonError, EncodingSizeError, FileNotFoundError) as exc:
        print(f"confdfa: {exc}", file=sys.stderr)
        return 2
    except (BackendError, ModelParseError, SearchError) as exc:
        print(f"confdfa: solver failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
