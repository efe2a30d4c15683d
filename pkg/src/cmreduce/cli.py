"""Command-line entry point: ``cmreduce <subcommand> ...``.

Exit codes: 0 success / no mismatch, 1 mismatch found, 2 config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from sympy import isprime, primerange

from .curves import count_points, count_sequence, parse_curve
from .errors import CMReduceError
from .harness import MISMATCH, RunConfig, check_fact51, run, scan_maximal
from .lfunction import classify, lpoly_from_counts, validate
from .splitting import parse_field, predict_reduction, splitting

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def _prime(text: str) -> int:
    p = int(text)
    if not isprime(p):
        raise argparse.ArgumentTypeError(f"{text} is not prime")
    return p


def _emit(obj) -> None:
    print(json.dumps(obj))


def cmd_predict(args) -> int:
    spec = parse_field(args.field)
    rep = splitting(spec, args.prime)
    pred = predict_reduction(spec, args.prime, rationality_ok=not args.no_rationality)
    _emit({"field": str(spec), "splitting": rep.to_dict(), "prediction": pred.to_dict()})
    return EXIT_OK


def cmd_count(args) -> int:
    print(count_points(parse_curve(args.curve), args.prime, args.ext,
                      max_field_size=args.max_field_size, workers=args.threads))
    return EXIT_OK


def cmd_lpoly(args) -> int:
    curve = parse_curve(args.curve)
    g = curve.genus
    seq = count_sequence(curve, args.prime, max(g, 2), max_field_size=args.max_field_size,
                         workers=args.threads)
    L = lpoly_from_counts(seq, g)
    obs = classify(L, seq[1])
    report = validate(L, seq)
    _emit({
        "curve": curve.family_tag, "p": args.prime, "g": g,
        "counts": list(seq.counts),
        "lpoly": list(L.coeffs),
        "charpoly": list(obs.charpoly),
        "newton": obs.newton.to_json(),
        "p_rank": obs.p_rank,
        "class": obs.kind,
        "maximal_over_p2": obs.maximal_over_p2,
        "valid": report.ok,
        "failures": report.failures,
    })
    return EXIT_OK if report.ok else EXIT_MISMATCH


def cmd_verify(args) -> int:
    cfg = RunConfig(prime_min=args.prime_min, prime_max=args.prime_max, families=args.curve,
                    max_field_size=args.max_field_size, extension_cap=args.extension_cap,
                    threads=args.threads, output_path=args.out, format=args.format)
    return run(cfg)


def cmd_fact51(args) -> int:
    if args.prime_min > args.prime_max:
        print("config error: prime-min > prime-max", file=sys.stderr)
        return EXIT_CONFIG
    status = EXIT_OK
    for p in primerange(args.prime_min, args.prime_max + 1):
        rec = check_fact51(p)
        _emit(rec.to_dict())
        if rec.verdict == MISMATCH:
            status = EXIT_MISMATCH
    return status


def cmd_scan(args) -> int:
    if args.prime_min > args.prime_max:
        print("config error: prime-min > prime-max", file=sys.stderr)
        return EXIT_CONFIG
    cfg = RunConfig(families=args.curve, max_field_size=args.max_field_size)
    for entry in scan_maximal(args.curve, args.prime_min, args.prime_max, cfg):
        _emit(entry.to_dict())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cmreduce", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("predict", help="reduction type from splitting data")
    p.add_argument("--field", required=True, help="cyclotomic:<N> or composite:<M>:<d>")
    p.add_argument("--prime", required=True, type=_prime)
    p.add_argument("--no-rationality", action="store_true",
                   help="do not assume the CM action is defined over K0")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("count", help="#C(F_{p^k})")
    p.add_argument("--curve", required=True)
    p.add_argument("--prime", required=True, type=_prime)
    p.add_argument("--ext", type=int, default=1)
    p.add_argument("--max-field-size", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("lpoly", help="L-polynomial and Frobenius polynomial from counts")
    p.add_argument("--curve", required=True)
    p.add_argument("--prime", required=True, type=_prime)
    p.add_argument("--max-field-size", type=int, default=2 * 10**8)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_lpoly)

    p = sub.add_parser("verify", help="prediction vs observation over a prime range")
    p.add_argument("--curve", required=True, action="append", help="repeatable")
    p.add_argument("--prime-min", required=True, type=int)
    p.add_argument("--prime-max", required=True, type=int)
    p.add_argument("--max-field-size", type=int, default=2 * 10**8)
    p.add_argument("--extension-cap", type=int, default=3)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fact51", help="check the tabulated Frobenius polynomials of gk-x")
    p.add_argument("--prime-min", required=True, type=int)
    p.add_argument("--prime-max", required=True, type=int)
    p.set_defaults(func=cmd_fact51)

    p = sub.add_parser("scan-maximal", help="flag F_{p^2}-maximal reductions")
    p.add_argument("--curve", required=True, action="append", help="repeatable")
    p.add_argument("--prime-min", required=True, type=int)
    p.add_argument("--prime-max", required=True, type=int)
    p.add_argument("--max-field-size", type=int, default=2 * 10**8)
    p.set_defaults(func=cmd_scan)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CMReduceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
