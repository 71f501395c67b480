"""Acceptance criteria, each at its stated sample count and tolerance.

Every test prints one line ``ACCEPTANCE <id> PASS|FAIL <detail>`` to the
terminal (outside pytest's capture) before asserting.
"""

import time

import numpy as np
import pytest

from c3geom import cli
from c3geom import covering as cov
from c3geom import suites
from c3geom.algebra import C, H, O, R
from c3geom.geometry import CASES, HH

START = time.perf_counter()
CASE_NAMES = ("hh", "ho", "oo")
SEED = 20261016


def rng_for(label):
    return suites.sub_rng(SEED, label)


@pytest.fixture
def report(capsys):
    def emit(cid, checks, extra=""):
        ok = all(c.passed for c in checks)
        failed = [c for c in checks if not c.passed]
        detail = extra or " ".join(f"{c.name}={c.max_error:.3g}" for c in checks)
        if failed:
            detail += f" first_failure={failed[0].name}: {failed[0].counterexample}"
        with capsys.disabled():
            print(f"\nACCEPTANCE {cid} {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail

    return emit


def test_1_composition_law(report):
    t0 = time.perf_counter()
    rng = rng_for("acceptance-1")
    checks = [suites.composition_law(tag, rng, 10**5, 1e-9) for tag in (R, C, H, O)]
    dt = time.perf_counter() - t0
    checks.append(suites.Check("runtime_under_5s", dt < 5.0, 1, dt))
    worst = max(c.max_error for c in checks[:4])
    report("1", checks, f"pairs=4x100000 max_rel_error={worst:.3g} runtime={dt:.2f}s")


def test_2_hermitian(report):
    rng = rng_for("acceptance-2")
    checks = []
    for name in CASE_NAMES:
        case = CASES[name]
        for tag in dict.fromkeys((case.A, case.B)):
            checks.append(suites.hermitian_properties(tag, case.k, rng, 10**4, 1e-9))
    report("2", checks)


def test_3_embedding(report):
    rng = rng_for("acceptance-3")
    checks = []
    for name in CASE_NAMES:
        case = CASES[name]
        checks.append(suites.embed_multiplicative(case.A, case.B, case.k, rng, 1000, pairs=100, tol=1e-8))
        checks.append(suites.embed_rejects_proportional(case.A, case.B, case.k, rng, 100))
    report("3", checks)


def test_4_coplanarity(report):
    rng = rng_for("acceptance-4")
    checks = [suites.coplanarity_criterion(CASES[n], rng, 1000, 1e-9, 1e-3) for n in CASE_NAMES]
    report("4", checks)


def test_5_gq_axiom(report):
    rng = rng_for("acceptance-5")
    checks = [suites.gq_rank_two(CASES[n], rng, 1000) for n in CASE_NAMES]
    report("5", checks)


def test_6_freeness(report):
    rng = rng_for("acceptance-6")
    res = suites.covering_suite(HH, rng, 10**4, 1e-9)
    np.testing.assert_array_equal(cov.BASE_POINT, [1, 0, 0, 1, 0, 0, 0])
    report("6", res.checks, f"samples=10000 min_abs_B={res.stats['min_abs_B']:.6g}")


def _budget_checks(case, rng, n):
    out = [
        suites.eliminate_planes_check(case, rng, n),
        suites.orthogonalize_check(case, rng, n),
        suites.pinch_check(case, rng, n),
        suites.diam_connect_check(case, rng, n, 1e-9)[0],
    ]
    if case.k.name == "C":
        out.append(suites.pl_reduce_check(case, rng, n, 1e-9))
    return out


@pytest.mark.parametrize("name", CASE_NAMES)
def test_7_homotopy_budgets(report, name):
    rng = rng_for(f"acceptance-7-{name}")
    report(f"7[{name}]", _budget_checks(CASES[name], rng, 100))


def test_8_budget_arithmetic(report):
    report("8[arithmetic]", [suites.budget_arithmetic_check(64)])


@pytest.mark.parametrize("name", CASE_NAMES)
def test_8_reduce_within_D(report, name):
    case = CASES[name]
    rng = rng_for(f"acceptance-8-{name}")
    res = suites.SuiteResult()
    k_budget = suites.default_k_budget(case)
    checks = suites.reduce_experiments(case, rng, 10, k_budget, res)
    cmp = res.stats["D_comparisons"]
    worst = max((used / bound for _, used, bound in cmp if used >= 0), default=float("nan"))
    extra = (
        f"pairs={len(cmp)} successes={res.stats['reduce_successes']} K_budget={k_budget} "
        f"K_emp={res.stats['K_emp']} max_log/D={worst:.3g}"
    )
    report(f"8[{name}]", checks, extra)


def test_9_determinism(report):
    cfg = cli.RunConfig(case="ho", seed=99, samples=20)
    a, b = cli.run(cfg), cli.run(cfg)
    counts = lambda r: {k: len(v[1]) for k, v in r.logs.items()}
    same = a.outcome_vector() == b.outcome_vector() and counts(a) == counts(b) and a.stats == b.stats
    chk = suites.Check("identical_runs", same, 2, 0.0, None if same else "outcome vectors differ")
    report("9", [chk], f"checks={len(a.checks)} movelogs={len(a.logs)} identical={same}")


def test_8_runtime(report):
    # runs last in this module: the whole acceptance suite stays under two minutes
    dt = time.perf_counter() - START
    report("8[runtime]", [suites.Check("acceptance_runtime", dt <= 120.0, 1, dt)], f"elapsed={dt:.1f}s")
