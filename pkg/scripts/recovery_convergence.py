"""Input-recovery error versus step size on Example 1.

Prints the max relative recovery error for a sequence of halving steps and
the ratio between consecutive errors (about 16 for a fourth-order method).

    python scripts/recovery_convergence.py [--steps 4e-3,2e-3,1e-3,5e-4]
"""

import argparse

from oistab.fixtures import example1
from oistab.inversion import build_inverse
from oistab.structure import run
from oistab.symbolic import TIME_SYM, Polynomial
from oistab.verify import InputSignal, integrate, recover_input


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", default="4e-3,2e-3,1e-3,5e-4")
    ap.add_argument("--t-final", type=float, default=1.0)
    args = ap.parse_args()

    sys_ = example1()
    inv = build_inverse(run(sys_), sys_)
    t = Polynomial.sym(TIME_SYM)
    u = InputSignal.from_polys([Polynomial.const(1) + t, t ** 2])
    prev = None
    print(f"{'dt':>10} {'max rel error':>14} {'ratio':>8}")
    for dt in (float(s) for s in args.steps.split(",")):
        traj = integrate(sys_, [1.0, 0.5, -1.0, 2.0], u, args.t_final, dt, order=inv.k_star)
        err = recover_input(traj, inv, sys_).max_relative_error
        ratio = f"{prev / err:8.2f}" if prev else " " * 8
        print(f"{dt:10.1e} {err:14.3e} {ratio}")
        prev = err


if __name__ == "__main__":
    main()
