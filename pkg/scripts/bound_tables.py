"""Input-bounding tables for a system file, printed as a grid.

    python scripts/bound_tables.py systems/example1.sys --box=-4,4 --samples 4096
"""

import argparse
from pathlib import Path

from oistab.cli.dsl import parse_system
from oistab.cli.main import parse_box
from oistab.inversion import build_inverse, estimate_bounds, sampled_input_bounding_check
from oistab.structure import run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("path")
    ap.add_argument("--box", default="-1,1")
    ap.add_argument("--samples", type=int, default=4096)
    ap.add_argument("--check", type=int, default=10_000, help="samples of the pointwise inequality")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    sys_ = parse_system(Path(args.path).read_text())
    inv = build_inverse(run(sys_), sys_)
    b = estimate_bounds(inv, parse_box(args.box, sys_.n), samples=args.samples, seed=args.seed)
    print(f"|B(0)| (Frobenius) = {b.b_norm!r}")
    print(f"{'r':>8} {'gamma1':>12} {'gamma2':>12} {'rho1':>12} {'rho2':>12}")
    for row in zip(b.radius_grid, b.gamma1, b.gamma2, b.rho1, b.rho2):
        print(" ".join(f"{v:12.6g}" if i else f"{v:8.4g}" for i, v in enumerate(row)))
    if args.check:
        chk = sampled_input_bounding_check(inv, sys_, b, samples=args.check, seed=args.seed + 1)
        print(f"pointwise check: {chk.samples} samples, {len(chk.violations)} violations, "
              f"worst margin {chk.worst_margin:.4g}")


if __name__ == "__main__":
    main()
