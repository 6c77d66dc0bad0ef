"""Acceptance criteria 1-9, each at its stated tolerance.

Every test records a single PASS/FAIL line; the lines are printed together
in the terminal summary (and immediately when run with ``-s``).
"""

import math
import random
import time

import pytest

import conftest
from ascendopt import decomp, greedy, nested, tautstring
from ascendopt.costs import PhiKind, PowerP, Quadratic
from ascendopt.errors import InfeasibleError
from ascendopt.oracle import BruteForceConfig, enumerate_integer_optimum, grid_refine_optimum, reference_majorant
from ascendopt.problem import (
    Instance,
    check_constraints,
    construct_feasible_point,
    groenevelt_certificate,
    is_feasible,
    rank,
    rank_beta,
)
from helpers import (
    any_cost,
    continuous_instance,
    decomp_violations,
    dsep_from,
    dsep_instance,
    integer_instance,
    integer_pwl,
    smooth_cost,
)

pytestmark = pytest.mark.slow


@pytest.fixture
def report():
    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
        conftest.ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


# -- shared corpora ------------------------------------------------------------

def integer_corpus():
    rng = random.Random(1001)
    return [integer_instance(rng, max_n=4, max_total=12) for _ in range(500)]


def continuous_corpus():
    rng = random.Random(1002)
    return [continuous_instance(rng, rng.randint(1, 3), smooth_cost) for _ in range(200)]


EPS = 1e-4


def grid_instance(rng, n):
    """Smooth instance whose demands sit on the eps grid."""
    while True:
        alpha = [rng.choice((0, rng.randint(0, 30000))) * EPS for _ in range(n)]
        beta = [rng.randint(3000, 40000) * EPS for _ in range(n)]
        costs = [rng.choice((Quadratic(rng.uniform(0.5, 3), rng.uniform(-2, 2)),
                             PowerP(rng.uniform(0.5, 2), rng.choice((1.5, 2.0, 3.0)))))
                 for _ in range(n)]
        inst = Instance(alpha, beta, costs)
        if is_feasible(inst):
            return inst


def agreement_corpus():
    rng = random.Random(1003)
    return [grid_instance(rng, rng.randint(1, 50)) for _ in range(500)]


def certificate_corpus():
    rng = random.Random(1004)
    mixed = [continuous_instance(rng, rng.randint(1, 8), any_cost) for _ in range(200)]
    smooth = [continuous_instance(rng, rng.randint(1, 8), smooth_cost) for _ in range(200)]
    pwl = []
    for _ in range(200):
        base = integer_instance(rng, max_n=8, max_total=24)
        pwl.append(Instance(base.alpha, base.beta, [integer_pwl(rng) for _ in range(base.n)]))
    dsep = [dsep_instance(rng, rng.randint(1, 8))[0] for _ in range(200)]
    return mixed, smooth, pwl, dsep


def dsep_pairs():
    rng = random.Random(1005)
    out = []
    for _ in range(100):
        _, d, alpha = dsep_instance(rng, rng.randint(1, 30))
        out.append((dsep_from(d, alpha, PhiKind.SQUARE), dsep_from(d, alpha, PhiKind.HYPOT)))
    return out


def rel_gap(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


# -- criteria ------------------------------------------------------------------

def test_criterion_1_integer_oracle(report):
    start = time.perf_counter()
    cfg = BruteForceConfig(max_n=4, max_B=12)
    bad = [inst for inst in integer_corpus()
           if greedy.gap_solve(inst).objective != enumerate_integer_optimum(inst, cfg).objective]
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 60
    assert report(1, ok, f"500 instances, {len(bad)} mismatches, {elapsed:.1f}s"), bad[:3]


def test_criterion_2_continuous_oracle(report):
    start = time.perf_counter()
    cfg = BruteForceConfig(max_n=3)
    worst, bad = -math.inf, []
    for inst in continuous_corpus():
        diff = decomp.decomp_solve(inst).objective - grid_refine_optimum(inst, cfg).objective
        worst = max(worst, diff)
        if diff > 1e-5:
            bad.append(inst)
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 120
    assert report(2, ok, f"200 instances, worst excess {worst:.2e}, {elapsed:.1f}s"), bad[:3]


def test_criterion_3_cross_solver(report):
    worst = {"nested": 0.0, "greedy": 0.0, "tautstring": 0.0}
    for inst in agreement_corpus():
        ref = decomp.decomp_solve(inst).objective
        worst["nested"] = max(worst["nested"], rel_gap(nested.solve(inst).objective, ref))
        worst["greedy"] = max(worst["greedy"], rel_gap(greedy.gap_solve_eps(inst, EPS).objective, ref))
    for sq, _ in dsep_pairs():
        ref = decomp.decomp_solve(sq).objective
        worst["tautstring"] = max(worst["tautstring"], rel_gap(tautstring.solve(sq).allocation.objective, ref))
    ok = worst["nested"] <= 1e-4 and worst["greedy"] <= 1e-4 and worst["tautstring"] <= 1e-6
    detail = ", ".join(f"{k} worst rel {v:.1e}" for k, v in worst.items())
    assert report(3, ok, f"500 smooth + 100 d-separable instances; {detail}")


def test_criterion_4_certificates(report):
    mixed, smooth, pwl, dsep = certificate_corpus()
    runs = [("decomp", inst, decomp.decomp_solve(inst).x) for inst in mixed]
    runs += [("decomp", inst, decomp.decomp_solve(inst).x) for inst in pwl]
    runs += [("nested", inst, nested.solve(inst).x) for inst in smooth]
    runs += [("greedy", inst, greedy.gap_solve(inst).x) for inst in pwl]
    runs += [("tautstring", inst, tautstring.solve(inst).allocation.x) for inst in dsep]
    failed = [(name, inst) for name, inst, x in runs
              if not groenevelt_certificate(inst, x, tol=1e-7).passed]
    assert report(4, not failed, f"{len(runs)} solver runs, {len(failed)} failures"), failed[:3]


def test_criterion_5_decomp_invariants(report):
    mixed, smooth, pwl, dsep = certificate_corpus()
    corpus = integer_corpus() + continuous_corpus() + agreement_corpus() + mixed + smooth + pwl + dsep
    corpus += [sq for sq, _ in dsep_pairs()] + [hy for _, hy in dsep_pairs()]
    problems = []
    for inst in corpus:
        trace = decomp.solve(inst)
        problems += decomp_violations(inst, trace)
        if not check_constraints(inst, trace.allocation.x, 1e-8).satisfied:
            problems.append("infeasible output")
    assert report(5, not problems, f"{len(corpus)} runs, {len(problems)} violations"), problems[:5]


def _proximity_violations(run):
    return sum(
        1 for p in run.passes for xs, v, d in zip(run.x, p.x, p.delta) if xs < v - d
    )


def test_criterion_6_proximity(report):
    runs = [greedy.gap_run(inst) for inst in integer_corpus()]
    _, _, pwl, _ = certificate_corpus()
    runs += [greedy.gap_run(inst) for inst in pwl]
    runs += [greedy.gap_run_eps(inst, EPS) for inst in agreement_corpus()[:100]]
    bad = sum(_proximity_violations(r) for r in runs)
    passes = sum(len(r.passes) for r in runs)
    assert report(6, bad == 0, f"{len(runs)} runs, {passes} passes, {bad} violations")


def test_criterion_7_string_algorithm(report):
    ratios = {}
    for n in (10**3, 10**4, 10**5, 10**6):
        rng = random.Random(n)
        d = [rng.uniform(0.2, 3.0) for _ in range(n)]
        alpha = [rng.choice((0.0, rng.uniform(0, 3))) for _ in range(n)]
        pts = tautstring.build_points(dsep_from(d, alpha, PhiKind.SQUARE, cap=max(sum(alpha), 1.0)))
        ratios[n] = tautstring.string_cover(pts).visits / n
    rng = random.Random(1007)
    mismatches = 0
    for _ in range(1000):
        n = rng.randint(1, 12)
        if rng.random() < 0.5:
            d = [rng.randint(1, 4) for _ in range(n)]
            alpha = [rng.choice((0, rng.randint(0, 6))) for _ in range(n)]
        else:
            d = [rng.uniform(0.2, 3) for _ in range(n)]
            alpha = [rng.choice((0.0, rng.uniform(0, 3))) for _ in range(n)]
        pts = tautstring.build_points(dsep_from(d, alpha, PhiKind.SQUARE))
        if tautstring.string_cover(pts).retained != reference_majorant(pts).retained:
            mismatches += 1
    ok = all(r <= 6 for r in ratios.values()) and mismatches == 0
    visits = ", ".join(f"n={n}: {r:.2f}n" for n, r in ratios.items())
    assert report(7, ok, f"visits {visits}; {mismatches}/1000 majorant mismatches")


def test_criterion_8_phi_independence(report):
    identical, worst = 0, 0.0
    pairs = dsep_pairs()
    for sq, hy in pairs:
        x_sq = tautstring.solve(sq).allocation.x
        x_hy = tautstring.solve(hy).allocation.x
        identical += x_sq == x_hy
        for inst in (sq, hy):
            ref = decomp.decomp_solve(inst)
            worst = max(worst, abs(inst.objective(x_sq) - ref.objective),
                        max(abs(a - b) for a, b in zip(x_sq, ref.x)))
    ok = identical == len(pairs) and worst <= 1e-7
    assert report(8, ok, f"{identical}/{len(pairs)} bitwise identical, worst gap to decomp {worst:.1e}")


def _random_pair(rng):
    n = rng.randint(1, 8)
    if rng.random() < 0.5:
        # Multiples of 1/64: every sum is exact, so checks run at tolerance 0.
        alpha = [rng.choice((0, rng.randint(0, 192))) / 64 for _ in range(n)]
        beta = [rng.randint(1, 192) / 64 for _ in range(n)]
        tol = 0.0
    else:
        alpha = [rng.choice((0.0, rng.uniform(0, 3))) for _ in range(n)]
        beta = [rng.uniform(0.05, 3) for _ in range(n)]
        tol = 1e-12 * (1 + sum(alpha))
    return Instance(alpha, beta, [Quadratic(1)] * n), tol


def test_criterion_9_feasibility(report):
    rng = random.Random(1009)
    disagreements, feasible = 0, 0
    for _ in range(10**5):
        inst, tol = _random_pair(rng)
        feas = is_feasible(inst)
        try:
            x = construct_feasible_point(inst).x
            built = check_constraints(inst, x, tol).satisfied
        except InfeasibleError:
            built = False
        full = (1 << inst.n) - 1
        # The ascending set is nonempty exactly when capacities do not cut the rank.
        has_base = rank_beta(inst, full) >= rank(inst, full) - tol
        feasible += feas
        disagreements += not (feas == built == has_base)
    assert report(9, disagreements == 0,
                  f"100000 pairs ({feasible} feasible), {disagreements} disagreements")
