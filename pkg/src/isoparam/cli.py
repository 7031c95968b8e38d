"""Command-line front end: ``isoparam <command> [options]``.

Exit status is 0 when every reported check passes, 1 when a check fails and
2 for usage or domain errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from typing import List, Optional

from . import report as rp
from .errors import DomainError, IsoparamError
from .sp2 import MetricWeights

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _weights(text: str) -> MetricWeights:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"weights must be three numbers wx,wy,wz, got {text!r}") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"weights must be three numbers wx,wy,wz, got {text!r}")
    try:
        return MetricWeights(*parts)
    except IsoparamError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _sign(text: str) -> int:
    table = {"+": 1, "+1": 1, "1": 1, "-": -1, "-1": -1}
    if text not in table:
        raise argparse.ArgumentTypeError(f"sign must be + or -, got {text!r}")
    return table[text]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--samples", type=int, default=10000, help="Monte Carlo sample count (default 10000)")
    common.add_argument("--seed", type=int, default=42, help="random seed (default 42)")
    common.add_argument("--tol", type=float, default=None, help="override the tolerance of every positive check")
    common.add_argument("--json", action=argparse.BooleanOptionalAction, default=True, help="emit a JSON array of reports")
    common.add_argument("--csv", metavar="PATH", default=None, help="write profile rows (profile) or a report summary")

    parser = argparse.ArgumentParser(prog="isoparam", description="Numerical checks for isoparametric functions on Sp(2) and its biquotient.")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run a verification suite")
    vsub = verify.add_subparsers(dest="target", required=True)
    vsub.add_parser("sp2", parents=[common], help="F = Re(a) on Sp(2)")
    vsub.add_parser("gm", parents=[common], help="the induced function on the biquotient")
    vm = vsub.add_parser("metric", parents=[common], help="F under another left-invariant metric")
    vm.add_argument("--weights", type=_weights, required=True, help="block weights wx,wy,wz")

    mz = sub.add_parser("munzner", parents=[common], help="forced cohomology of a ball-bundle splitting")
    mz.add_argument("--n", type=int, required=True)
    mz.add_argument("--m1", type=int, required=True)
    mz.add_argument("--m-1", dest="m_1", type=int, required=True)
    mz.add_argument("--orientable", action="store_true", help="both focal manifolds orientable (integer coefficients)")

    pr = sub.add_parser("profile", parents=[common], help="(t, b, a, h) curves of a shipped profile")
    pr.add_argument("--case", choices=sorted(rp.levels.PROFILES), required=True)
    pr.add_argument("--minimal-level", action="store_true", help="also locate the minimal level")
    pr.add_argument("--points", type=int, default=201)

    geo = sub.add_parser("geodesic", parents=[common], help="trace a normal geodesic to a focal set")
    geo.add_argument("--t0", type=float, required=True)
    geo.add_argument("--sign", type=_sign, default=1)
    return parser


def _write_csv(path: str, header: List[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])


def _run(args) -> List[rp.VerificationReport]:
    if args.command == "verify":
        if args.target == "sp2":
            return rp.verify_sp2(args.samples, args.seed, args.tol)
        if args.target == "gm":
            return rp.verify_gm(args.samples, args.seed, args.tol)
        return rp.verify_metric(args.weights, args.samples, args.seed, args.tol)
    if args.command == "munzner":
        return [rp.munzner_report(args.n, args.m1, args.m_1, args.orientable)]
    if args.command == "profile":
        reports, table = rp.profile_report(args.case, args.minimal_level, args.points, args.tol)
        if args.csv:
            _write_csv(args.csv, ["t", "b", "a", "h"], table.tolist())
        return reports
    if args.command == "geodesic":
        if not -1.0 < args.t0 < 1.0:
            raise DomainError(f"t0 must lie strictly between -1 and 1, got {args.t0!r}")
        return rp.check_geodesic(args.t0, args.sign, args.tol)
    raise AssertionError(args.command)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        reports = _run(args)
    except IsoparamError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.json:
        print(json.dumps([r.to_dict() for r in reports], indent=2))
    else:
        for r in reports:
            flag = "PASS" if r.passed else "FAIL"
            print(f"{flag} {r.check}: residual {r.max_residual:.3e} (tol {r.tolerance:.1e}, n={r.samples})")
    if args.csv and args.command != "profile":
        _write_csv(args.csv, ["check", "passed", "max_residual", "tolerance"], [[r.check, r.passed, r.max_residual, r.tolerance] for r in reports])
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
