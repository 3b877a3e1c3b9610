"""Reproduce the benchmark error table for the three analytic test fields.

For each field the script samples a sequence of grids, builds the
quasi-interpolant, measures the maximum error on a dense evaluation grid
and prints the reduction factor rf = log2(previous / current).

Defaults keep the run short (m = 16, 32 on a 69^3 evaluation grid).  Use
``--full`` for the reference setup (m up to 128, 139^3 evaluation grid);
that takes a few minutes.
"""

import argparse
import time

from boxqi import convergence


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fn", choices=("f1", "f2", "f3"), default=None,
                    help="restrict to one test field (default: all)")
    ap.add_argument("--m", type=int, nargs="+", default=[16, 32],
                    help="grid resolutions (default: 16 32)")
    ap.add_argument("--eval-points", type=int, default=69,
                    help="evaluation grid points per axis (default: 69)")
    ap.add_argument("--full", action="store_true",
                    help="reference setup: m = 16..128, 139^3 evaluation")
    args = ap.parse_args(argv)

    m_values = [16, 32, 64, 128] if args.full else args.m
    eval_points = None if args.full else args.eval_points
    fields = (args.fn,) if args.fn else ("f1", "f2", "f3")

    print(f"{'field':>5} {'m':>4} {'h':>10} {'max error':>12} {'rf':>6}")
    for fn in fields:
        t0 = time.perf_counter()
        rows = convergence.convergence_table(fn, m_values, eval_points)
        for row in rows:
            rf = f"{row.rf:6.2f}" if row.rf is not None else "     -"
            print(f"{row.fn:>5} {row.m:>4} {row.h:>10.5f} "
                  f"{row.error:>12.3e} {rf}")
        print(f"      ({time.perf_counter() - t0:.1f} s)")


if __name__ == "__main__":
    main()
