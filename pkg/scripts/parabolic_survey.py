#!/usr/bin/env python3
"""Trichotomy frequencies over random parabolic sets.

Samples random functional flags per algebra, classifies the induced
parabolic set on a window, and tallies how often each of the three types
shows up.  Standard samples also get their cone data built, so the run
doubles as a smoke test for the certificate path; the Levi Weyl-group
orders seen along the way are reported.
"""

import argparse
import random
from collections import Counter

from affinekit.affine import build_affine, DegreeWindow
from affinekit.finlie import build_simple
from affinekit.rootpar import (
    assemble_parabolic,
    check_parabolic_axioms,
    classify_parabolic,
    make_flag,
    phi_P,
    principal_witness,
    random_flag,
)

TYPES = ("A1", "A2", "C2")


def survey(A, window, samples, rng):
    tally = Counter()
    orders = Counter()
    for _ in range(samples):
        flag = random_flag(A, rng)
        P = assemble_parabolic(A, flag, window)
        if not check_parabolic_axioms(P):
            raise SystemExit(f"axiom violation on {flag}")
        tag = classify_parabolic(P)
        tally[tag] += 1
        if tag == "standard":
            # cone data wants delta on the positive side; the opposite
            # parabolic (negated flag) is standard with the same Levi
            if principal_witness(P)[-1] < 0:
                neg = make_flag(A, tuple(-x for x in flag.phi1), flag.phi2)
                P = assemble_parabolic(A, neg, window)
            orders[phi_P(P).wl_order] += 1
    return tally, orders


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--radius", type=int, default=3)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    window = DegreeWindow(-args.radius, args.radius)
    print(f"window -{args.radius}:{args.radius}, {args.samples} flags per algebra\n")
    print(f"{'algebra':<9}{'standard':>9}{'imaginary':>10}{'mixed':>7}   wl orders seen")
    for t in TYPES:
        A = build_affine(build_simple(t))
        tally, orders = survey(A, window, args.samples, rng)
        pretty = ", ".join(f"{o} (x{c})" for o, c in sorted(orders.items()))
        print(
            f"{t:<9}{tally['standard']:>9}{tally['imaginary']:>10}"
            f"{tally['mixed']:>7}   {pretty}"
        )


if __name__ == "__main__":
    main()
