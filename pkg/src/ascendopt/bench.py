"""Timing and operation counts per solver.

Counters: level searches for ``decomp`` (one per candidate start per
iteration), greedy steps across all passes for ``greedy``, subproblem calls
for ``nested`` and point visits for ``tautstring``.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass

from ascendopt import decomp, greedy, nested, tautstring
from ascendopt.generators import generate

SOLVERS = ("decomp", "greedy", "nested", "tautstring")
COLUMNS = ("solver", "n", "seed", "wall_time_ns", "op_count")

# Instance family used for each solver.
FAMILY = {
    "decomp": "random-quadratic",
    "greedy": "inventory",
    "nested": "random-quadratic",
    "tautstring": "dsep",
}


@dataclass(frozen=True)
class BenchRow:
    solver: str
    n: int
    seed: int
    wall_time_ns: int
    op_count: int


def _run(solver, inst):
    if solver == "decomp":
        return decomp.solve(inst).eta_solves
    if solver == "greedy":
        return greedy.gap_run(inst).increments
    if solver == "nested":
        _, stats = nested.nested_run(nested.tighten(nested.from_ascending(inst)))
        return stats.rap_calls
    if solver == "tautstring":
        return tautstring.solve(inst).cover.visits
    raise ValueError(f"unknown solver {solver!r}")


def measure(solver: str, n: int, seed: int) -> BenchRow:
    inst = generate(FAMILY[solver], n, seed)
    start = time.perf_counter_ns()
    ops = _run(solver, inst)
    return BenchRow(solver, n, seed, time.perf_counter_ns() - start, ops)


def run(sizes, solvers, seed: int):
    for s in solvers:
        for n in sizes:
            yield measure(s, n, seed)


def write_csv(rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([r.solver, r.n, r.seed, r.wall_time_ns, r.op_count])
        fh.flush()
