#!/usr/bin/env python3
"""Randomised sweep over the hardness-reduction generators.

Samples CNF and Horn inputs, runs the optimality recognizers on each
gadget's distinguished candidate, and checks the intended correspondence:
the candidate is optimal exactly when the formula is unsatisfiable
(respectively, exactly when the Horn formula entails its query).  Prints a
summary table with per-family timings.

Usage: python scripts/hardness_sweep.py [--samples N] [--seed S] [--max-vars V]
"""
import argparse
import pathlib
import random
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "tests"))

from randgen import random_cnf, random_horn  # noqa: E402

from erx.gadgets import (  # noqa: E402
    gen_3sat,
    gen_3sat_restricted_max_e,
    gen_3sat_restricted_min_a,
    gen_horn,
    horn_entails,
    sat_oracle,
)
from erx.query import SimilarityStore  # noqa: E402
from erx.semantics import ALL_CRITERIA, Criterion  # noqa: E402
from erx.solver import (  # noqa: E402
    SearchConfig,
    recognize_many,
    recognize_optimal_bruteforce,
    recognize_optimal_restricted,
)

SIM = SimilarityStore()
CFG = SearchConfig(pair_budget=24)


def sweep_cnf(name, gen, criteria, samples, rng, max_vars):
    t0 = time.perf_counter()
    agree = 0
    sat_count = 0
    for _ in range(samples):
        cnf = random_cnf(rng, rng.randint(1, max_vars))
        inst = gen(cnf)
        sat = sat_oracle(cnf)
        sat_count += sat
        res = recognize_many(inst.db, inst.spec, inst.candidate, criteria, SIM, CFG)
        agree += all(r.optimal == (not sat) for r in res.values())
    dt = time.perf_counter() - t0
    print(f"  {name:10s} {agree}/{samples} agree "
          f"({sat_count} satisfiable) in {dt:6.2f}s")
    return agree == samples


def sweep_horn(samples, rng, max_vars):
    t0 = time.perf_counter()
    agree = 0
    entailed = 0
    for _ in range(samples):
        inp = random_horn(rng, max_vars=max_vars)
        inst = gen_horn(inp)
        want = horn_entails(inp)
        entailed += want
        fast = recognize_optimal_restricted(inst.db, inst.spec, inst.candidate,
                                            Criterion.MIN_AS, SIM, CFG)
        slow = recognize_optimal_bruteforce(inst.db, inst.spec, inst.candidate,
                                            Criterion.MIN_AS, SIM, CFG)
        agree += (fast.optimal == slow.optimal == want)
    dt = time.perf_counter() - t0
    print(f"  {'horn':10s} {agree}/{samples} agree "
          f"({entailed} entailed) in {dt:6.2f}s")
    return agree == samples


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-vars", type=int, default=3)
    args = ap.parse_args()
    rng = random.Random(args.seed)

    print(f"sweep: {args.samples} samples per family, up to {args.max_vars} variables")
    ok = True
    ok &= sweep_cnf("3sat", gen_3sat, ALL_CRITERIA, args.samples, rng, args.max_vars)
    ok &= sweep_cnf("3sat-minA", gen_3sat_restricted_min_a,
                    (Criterion.MIN_AC, Criterion.MIN_VC), args.samples, rng, args.max_vars)
    ok &= sweep_cnf("3sat-maxE", gen_3sat_restricted_max_e,
                    (Criterion.MAX_EC, Criterion.MAX_SC), args.samples, rng, args.max_vars)
    ok &= sweep_horn(args.samples, rng, max_vars=min(args.max_vars + 3, 6))
    print("all correspondences hold" if ok else "DISAGREEMENT FOUND")
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
