"""Command-line interface: ``qcradle {design,simulate,schedule,verify}``.

Exit codes: 0 success, 2 invalid design/request, 3 verification failure,
4 I/O or malformed input file.
"""
import argparse
import csv
import io
import json
import sys

from . import chainio, pipeline
from .errors import DesignError

EXIT_OK = 0
EXIT_DESIGN = 2
EXIT_VERIFY = 3
EXIT_IO = 4


def _positive_int(text):
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return val


def _times(text):
    if text == "auto":
        return None
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--times expects 'auto' or comma-separated numbers, got {text!r}")


def build_parser():
    parser = argparse.ArgumentParser(prog="qcradle",
                                     description="Mass-spring chains with perfect transfer and fractional revival.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="synthesize a chain and write its chain-spec JSON")
    p.add_argument("--N", type=_positive_int, required=True, help="number of springs between the end masses")
    p.add_argument("--r", type=int, required=True, help="lattice integer r >= 2")
    p.add_argument("--k0", type=int, required=True)
    p.add_argument("--k1", type=int, required=True)
    p.add_argument("--boundary", choices=["fixed-fixed", "free-free"], default=None,
                   help="default: free-free when k0 = 0, otherwise fixed-fixed")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--m0", type=float, default=1.0)
    p.add_argument("--pbar", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.5, help="deformation parameter in (0, 1)")
    p.add_argument("--surgery", default=None, help='adjacent pairs to remove, e.g. "3,4;1,2"')
    p.add_argument("--out", default="-", help="output path ('-' for stdout)")

    for name, help_text in (("simulate", "evolve a unit kick on mass 0 and emit a trajectory"),
                            ("schedule", "list fractional-revival times and predicted amplitudes"),
                            ("verify", "run the invariant suite on a chain spec")):
        s = sub.add_parser(name, help=help_text)
        s.add_argument("spec", help="chain-spec JSON file ('-' for stdin)")
        s.add_argument("--out", default="-")
        if name == "simulate":
            s.add_argument("--format", choices=["csv", "json"], default="csv")
            s.add_argument("--times", type=_times, default=None,
                           help="'auto' (default) or comma-separated times")
            s.add_argument("--samples", type=_positive_int, default=200)
        else:
            s.add_argument("--format", choices=["json"], default="json")
    return parser


def _read_spec(path):
    if path == "-":
        return chainio.loads(sys.stdin.read())
    return chainio.read(path)


def _emit(text, path):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["%.17g" % v for v in row])
    return buf.getvalue()


def cmd_design(args):
    request = pipeline.DesignRequest(N=args.N, r=args.r, k0=args.k0, k1=args.k1, boundary=args.boundary,
                                     omega=args.omega, m0=args.m0, pbar=args.pbar, alpha=args.alpha,
                                     surgery=pipeline.parse_surgery(args.surgery))
    doc = pipeline.design_document(request)
    _emit(chainio.dumps(doc), args.out)
    return EXIT_OK


def cmd_simulate(args):
    doc = _read_spec(args.spec)
    header, rows = pipeline.simulate_rows(doc, samples=args.samples, times=args.times)
    if args.format == "csv":
        text = _csv_text(header, rows)
    else:
        text = json.dumps({"columns": header, "rows": rows}, indent=2, allow_nan=False) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def cmd_schedule(args):
    report = pipeline.schedule_report(_read_spec(args.spec))
    _emit(json.dumps(report, indent=2, allow_nan=False) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args):
    report = pipeline.verify_document(_read_spec(args.spec))
    _emit(json.dumps(report.as_dict(), indent=2, allow_nan=False) + "\n", args.out)
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        note = f"  ({c.note})" if c.note else ""
        print(f"{status} {c.name}: {c.value:.3e} <= {c.tolerance:.0e}{note}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_VERIFY


COMMANDS = {"design": cmd_design, "simulate": cmd_simulate, "schedule": cmd_schedule, "verify": cmd_verify}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except DesignError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DESIGN
    except (OSError, ValueError, KeyError, TypeError) as exc:
        # json.JSONDecodeError is a ValueError; malformed documents raise Key/TypeError.
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
