"""Peak live-scalar comparison: sketch-based solver vs dense reference.

Prints one row per problem size. The dense column switches to 'oom-guard'
once the n x n iterate would cross the dense guard, which is the point of
the exercise: the sketched solver's footprint stays affine in n.
"""

import argparse
import sys

from sketchycgm.cli import bench_memory_rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument(
        "--n-values", default="256,512,1024,2048,4096,8192",
        help="comma-separated problem sizes",
    )
    ap.add_argument("--rank", type=int, default=1)
    ap.add_argument("--views", type=int, default=10)
    ap.add_argument("--iters", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--csv", default=None, help="also write rows to this file")
    args = ap.parse_args(argv)

    ns = [int(tok) for tok in args.n_values.split(",") if tok]
    rows = bench_memory_rows(ns, rank=args.rank, views=args.views,
                             iters=args.iters, seed=args.seed)
    print(f"{'n':>6} {'sketchy peak':>14} {'dense peak':>12}")
    for n, sk, dn in rows:
        print(f"{n:>6} {sk:>14} {str(dn):>12}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as f:
            f.write("n,sketchycgm_peak_scalars,dense_cgm_peak_scalars\n")
            for n, sk, dn in rows:
                f.write(f"{n},{sk},{dn}\n")
        print(f"wrote {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
