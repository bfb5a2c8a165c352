#!/usr/bin/env python3
"""End-to-end walkthrough on the two-table authors dataset.

Materialises the dataset under a scratch directory, then reports every
solution, the four annotated sets of each, and the optima under all eight
criterion names.  Finishes by running the installed CLI on the same files.

Usage: python scripts/demo_authors.py [workdir]
"""
import pathlib
import subprocess
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "tests"))

from conftest import AUTHORS_ROWS, AUTHORS_SIM, AUTHORS_SPEC, build_authors  # noqa: E402

from erx.semantics import ALL_CRITERIA, criterion_sets  # noqa: E402
from erx.solver import enumerate_solutions, optimal_solutions  # noqa: E402


def describe(cand):
    objs = ["{" + ", ".join(sorted(c.text for c in cls)) + "}"
            for cls in cand.E.merged_classes()]
    cells = ["{" + ", ".join(sorted(repr(c) for c in cls)) + "}"
             for cls in cand.V.merged_classes()]
    return f"objects {objs or 'none'} | cells {cells or 'none'}"


def main():
    workdir = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "demo_authors_out")
    spec, db, sim = build_authors()

    print(f"database: {len(db.facts)} facts, {len(db.objects())} objects, "
          f"{len(db.cells())} value cells")
    sols = enumerate_solutions(db, spec, sim)
    print(f"\nsolutions ({len(sols)}):")
    for k, cand in enumerate(sols, start=1):
        sets = criterion_sets(db, cand, spec, sim)
        print(f"  [{k}] {describe(cand)}")
        print(f"      merged pairs {len(sets.eq)}, supported {len(sets.supp)}, "
              f"absent {len(sets.absent)}, violations {len(sets.viol)}")

    print("\noptima per criterion:")
    for crit in ALL_CRITERIA:
        optima = optimal_solutions(db, spec, crit, sim)
        ids = [str(sols.index(c) + 1) for c in optima]
        print(f"  {crit.value:6s} -> solution(s) {', '.join(ids)}")

    workdir.mkdir(parents=True, exist_ok=True)
    (workdir / "spec.erx").write_text(AUTHORS_SPEC, encoding="utf-8")
    data = workdir / "data"
    data.mkdir(exist_ok=True)
    for rel, rows in AUTHORS_ROWS.items():
        (data / f"{rel}.tsv").write_text(
            "".join("\t".join(row) + "\n" for row in rows), encoding="utf-8")
    (workdir / "overrides.tsv").write_text(
        "".join(f"{a}\t{b}\t{s}\n" for a, b, s in AUTHORS_SIM), encoding="utf-8")

    print(f"\nwrote {workdir}/; running the CLI on it:")
    cmd = [
        sys.executable, "-m", "erx.cli", "solve",
        "--spec", str(workdir / "spec.erx"), "--data", str(data),
        "--sim-overrides", str(workdir / "overrides.tsv"),
        "--out", str(workdir / "out"), "--num", "3",
    ]
    subprocess.run(cmd, check=True)
    print((workdir / "out" / "solution_001.txt").read_text(), end="")


if __name__ == "__main__":
    main()
