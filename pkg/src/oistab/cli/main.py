"""Command line: ``oistab analyze|simulate|certify``."""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from ..errors import InversionUnavailable, OistabError, ParseError, ValidationError
from ..symbolic import TIME_SYM, Polynomial
from .dsl import parse_expression, parse_system
from .report import (
    EXIT_CERTIFICATE_FAILED,
    EXIT_INPUT_ERROR,
    EXIT_OK,
    EXIT_TOLERANCE,
    emit_report,
)

log = logging.getLogger("oistab")


def parse_box(text: str, n: int) -> tuple:
    """``lo,hi`` for every state, or ``lo:hi,lo:hi,...`` per state."""
    if ":" in text:
        parts = [p.split(":") for p in text.split(",")]
        box = tuple((float(Fraction(a)), float(Fraction(b))) for a, b in parts)
        if len(box) != n:
            raise ValueError(f"box has {len(box)} intervals for {n} states")
        return box
    lo, hi = (float(Fraction(v)) for v in text.split(","))
    return tuple((lo, hi) for _ in range(n))


def parse_gain(text: str):
    from ..verify import Gain

    if text.strip() == "0":
        return None
    c, q = text.split(",")
    return Gain(Fraction(c), int(q))


def _config(args, sys_):
    from ..pipeline import AnalysisConfig

    box = parse_box(args.box, sys_.n) if getattr(args, "box", None) else None
    return AnalysisConfig(
        mode=args.mode,
        max_iter=args.max_iter,
        strict=not args.permissive,
        bounds=getattr(args, "bounds", False) or box is not None,
        box=box,
        samples=args.samples,
        check_samples=getattr(args, "check_samples", 0),
        seed=args.seed,
    )


def _analyze_file(path: str, args) -> tuple[str, str, int]:
    """Returns (stdout text, stderr text, exit code) for one file."""
    from ..pipeline import analyze_system

    try:
        sys_ = parse_system(Path(path).read_text())
        result = analyze_system(sys_, _config(args, sys_))
    except (ParseError, ValidationError, ValueError) as exc:
        return "", f"{path}: {exc}\n", EXIT_INPUT_ERROR
    err = "".join(f"{path}: warning: {w}\n" for w in result.warnings)
    report = result.report
    return emit_report(report, "json" if args.json else "text"), err, report.exit_code


def cmd_analyze(args) -> int:
    target = Path(args.path)
    if target.is_dir():
        files = sorted(str(p) for p in target.glob("*.sys"))
        if not files:
            print(f"{target}: no .sys files", file=sys.stderr)
            return EXIT_INPUT_ERROR
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_analyze_file, files, [args] * len(files)))
        code = 0
        if args.json:
            import json

            doc = {Path(f).name: json.loads(out) for f, (out, _, _) in zip(files, results) if out}
            sys.stdout.write(json.dumps(doc, indent=2) + "\n")
        for f, (out, err, c) in zip(files, results):
            if not args.json:
                sys.stdout.write(f"== {Path(f).name}\n{out}")
            sys.stderr.write(err)
            code = max(code, c)
        return code
    out, err, code = _analyze_file(str(target), args)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


def cmd_simulate(args) -> int:
    from ..cli.report import Report
    from ..pipeline import analyze_system
    from ..verify import InputSignal, check_input_bounding, integrate, recover_input

    try:
        sys_ = parse_system(Path(args.path).read_text())
        result = analyze_system(sys_, _config(args, sys_))
    except (ParseError, ValidationError, ValueError) as exc:
        print(f"{args.path}: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if result.inverse is None:
        print(f"{args.path}: inversion unavailable: structure outcome is "
              f"{result.report.outcome['kind']}", file=sys.stderr)
        return result.report.exit_code
    x0 = [float(Fraction(v)) for v in args.x0.split(",")] if args.x0 else [0.0] * sys_.n
    tsym = {"t": TIME_SYM}
    polys = []
    for i in range(1, sys_.m + 1):
        text = getattr(args, f"u{i}", None) or "0"
        polys.append(parse_expression(text, tsym))
    signal = InputSignal.from_polys(polys)
    inv = result.inverse
    traj = integrate(sys_, x0, signal, args.t_final, args.dt, order=inv.k_star)
    rec = recover_input(traj, inv, sys_)
    verification = dict(result.report.verification or {})
    verification["simulation"] = {
        "x0": x0,
        "inputs": [str(p) for p in polys],
        "dt": args.dt,
        "t_final": args.t_final,
        "truncated": traj.truncated,
        "max_relative_recovery_error": rec.max_relative_error,
        "pointwise_residual": rec.pointwise_residual,
        "singular_samples": len(rec.singular_samples),
        "tol": args.tol,
    }
    if result.bounds is not None:
        chk = check_input_bounding(traj, result.bounds, inv)
        verification["trajectory_input_bounding"] = {
            "checked": chk.checked,
            "violations": len(chk.violations),
            "outside_box": len(chk.outside_box),
            "inconclusive": chk.inconclusive,
        }
    report = Report.from_dict({**result.report.to_dict(), "verification": verification})
    sys.stdout.write(emit_report(report, "json" if args.json else "text"))
    ok = rec.max_relative_error <= args.tol and not traj.truncated and not rec.singular_samples
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_certify(args) -> int:
    import json

    from ..verify import Certificate, check_certificate

    try:
        sys_ = parse_system(Path(args.path).read_text())
        table = {s.name: s for s in sys_.states}
        V = parse_expression(args.V, table)
        cert = Certificate(V, parse_gain(args.alpha), parse_gain(args.chi), args.order)
        box = parse_box(args.box, sys_.n)
    except (ParseError, ValueError) as exc:
        print(f"{args.path}: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    res = check_certificate(sys_, cert, box, samples=args.samples, seed=args.seed)
    doc = {
        "passed": res.passed,
        "samples": res.samples,
        "worst_margin": str(res.worst_margin),
        "worst_point": res.worst_point,
        "violation": res.violation,
        "notes": res.notes,
        "caveat": "sampled evidence on the box, not a proof",
    }
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK if res.passed else EXIT_CERTIFICATE_FAILED


def _common(p):
    p.add_argument("path")
    p.add_argument("--json", action="store_true", help="emit JSON instead of text")
    p.add_argument("--mode", choices=["auto", "affine-only"], default="auto")
    p.add_argument("--max-iter", type=int, default=None, help="iteration cap (default n + p)")
    p.add_argument("--permissive", action="store_true",
                   help="continue past a rank-drop locus instead of halting")
    p.add_argument("--box", default=None, help="state box: 'lo,hi' or 'lo:hi,lo:hi,...'")
    p.add_argument("--samples", type=int, default=4096)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="oistab", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="run the structure algorithm and build the inverse")
    _common(pa)
    pa.add_argument("--bounds", action="store_true", help="estimate input-bounding tables")
    pa.add_argument("--check-samples", type=int, default=0,
                    help="sample the input-bounding inequality at this many points")
    pa.add_argument("--jobs", type=int, default=None, help="worker processes for directories")
    pa.set_defaults(func=cmd_analyze)

    ps = sub.add_parser("simulate", help="simulate and recover the input from outputs")
    _common(ps)
    ps.add_argument("--x0", default=None, help="initial state as comma-separated rationals")
    for i in range(1, 10):
        ps.add_argument(f"--u{i}", default=None, help=argparse.SUPPRESS if i > 3 else f"input {i} as a polynomial in t")
    ps.add_argument("--dt", type=float, default=1e-3)
    ps.add_argument("--t-final", type=float, default=1.0)
    ps.add_argument("--tol", type=float, default=1e-6)
    ps.set_defaults(func=cmd_simulate)

    pc = sub.add_parser("certify", help="sample a detectability dissipation certificate")
    pc.add_argument("path")
    pc.add_argument("--V", required=True, help="candidate function, polynomial in the states")
    pc.add_argument("--alpha", required=True, help="c,q for alpha(s) = c*s^q")
    pc.add_argument("--chi", required=True, help="c,q for chi(s) = c*s^q, or 0")
    pc.add_argument("--order", type=int, default=0)
    pc.add_argument("--box", required=True)
    pc.add_argument("--samples", type=int, default=1000)
    pc.add_argument("--seed", type=int, default=0)
    pc.set_defaults(func=cmd_certify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InversionUnavailable as exc:
        print(f"inversion unavailable: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except OistabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
