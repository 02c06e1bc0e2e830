#!/usr/bin/env python3
"""Pick iterates whose decay quantities beat a halving tolerance schedule.

Useful for seeing how the required iterate gaps stretch as the window m
grows: each extra unit of window width costs a few more steps before the
cross terms shrink enough.
"""

import argparse
import sys

from opdyn import NSeq
from opdyn.criteria import CriterionInstance, search_subsequence, sufficient_decay_logs
from opdyn.lattice import PermutationUnitary, WeightedShift, WeightRule


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=2, help="window half-width")
    ap.add_argument("--r1", type=int, default=1)
    ap.add_argument("--count", type=int, default=8, help="iterates to collect")
    ap.add_argument("--pool", type=int, default=200, help="candidates 1..POOL")
    ap.add_argument("--tol", type=float, default=1e-3)
    args = ap.parse_args(argv)

    inst = CriterionInstance(
        shifts=(
            WeightedShift(WeightRule.piecewise(2.0, 0.5)),
            WeightedShift(WeightRule.piecewise(3.0, 1.0 / 3.0)),
        ),
        unitary=PermutationUnitary.translation(1),
        r_list=(args.r1, 2 * args.r1),
        n_seq=NSeq.all_k(),
        m=args.m,
        k_max=max(args.count, 1),
    )
    chosen = search_subsequence(inst, range(1, args.pool + 1), args.count, tol=args.tol)
    if chosen is None:
        print(f"no schedule of length {args.count} found in 1..{args.pool}")
        return 1
    print("k,n_k,max_log_quantity")
    for k, n in enumerate(chosen, start=1):
        worst = max(lg for _, lg in sufficient_decay_logs(inst, n))
        print(f"{k},{n},{worst:.6f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
