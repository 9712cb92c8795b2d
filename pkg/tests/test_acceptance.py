"""The nine acceptance criteria, each at its stated tolerance and time limit.

Every test prints one ``criterion N: PASS|FAIL`` line; the lines are
repeated in a summary section at the end of the pytest run.
"""

import time

import numpy as np
import pytest

from fairbreak import verify
from fairbreak.experiment import ExperimentConfig, run_experiment, summarize
from fairbreak.learners import PenalizedObjective
from fairbreak.datagen import SyntheticConfig, generate_synthetic
from fairbreak.metrics import DP, EO, cell_stats
from fairbreak.optimal_attack import two_stage_attack


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - start


def suite_detail(res, seconds):
    return f"{res.checked} instances, margin {res.margin:.3g}, {seconds:.1f}s" + (
        f"; {res.failures[0]}" if res.failures else ""
    )


def test_criterion_1_formula_equivalence(acceptance):
    res, secs = timed(verify.formula_equivalence, n=1000, tol=1e-10)
    ok = res.passed and res.checked == 1000 and secs < 5
    assert acceptance(1, "closed-form bound equals its alternative form", ok, suite_detail(res, secs))


def test_criterion_2_fair_construction(acceptance):
    res, secs = timed(verify.fair_construction, n=500, tol=1e-10)
    ok = res.passed and res.checked == 500 and secs < 10
    detail = suite_detail(res, secs) + "; " + "; ".join(res.notes)
    assert acceptance(2, "fair construction: marginal, fairness, cost", ok, detail)


@pytest.mark.slow
def test_criterion_3_tightness_sandwich(acceptance):
    start = time.perf_counter()
    sandwich = verify.lower_bound_sandwich(n=50, grid_step=0.01)
    bayes = verify.bayes_tightness(n=50, grid_step=0.01, oracle_points=2, max_points=2)
    secs = time.perf_counter() - start
    ok = sandwich.passed and bayes.passed and secs < 120
    detail = (f"sandwich margin {sandwich.margin:.3g}, Bayes margin {bayes.margin:.3g}, "
              f"{sandwich.checked}+{bayes.checked} instances, {secs:.1f}s")
    failures = sandwich.failures + bayes.failures
    if failures:
        detail += f"; {failures[0]}"
    assert acceptance(3, "grid oracle within 0.02 of the bound", ok, detail)


def test_criterion_4_worked_example(acceptance, example1, worked_target):
    res = two_stage_attack(example1, worked_target, margin=0.1)
    stats = np.array(cell_stats(worked_target, res.stage1).as_tuple())
    expected = np.array([0.075, 0.0625, 0.025, 0.1875])
    err_stats = float(np.abs(stats - expected).max())
    err_frac = abs(res.transport.fraction - 2 / 3)
    ok = err_stats <= 1e-9 and err_frac <= 1e-9
    detail = f"cells {stats.round(6).tolist()}, fraction {res.transport.fraction:.12f}"
    assert acceptance(4, "two-stage pipeline on the discretized example", ok, detail)


def test_criterion_5_empirical_attack(acceptance):
    res, secs = timed(verify.zflip_empirical, n=500, min_cell=5)
    ok = res.passed and res.checked == 500 and secs < 10
    detail = suite_detail(res, secs) + "; " + "; ".join(res.notes)
    assert acceptance(5, "Z-flip attack: 1/min envelope, exact prediction, risk", ok, detail)


@pytest.mark.slow
def test_criterion_6_fair_boundary(acceptance):
    res, secs = timed(verify.fair_boundary_suite, n=100, tol=1e-8, mc_samples=1_000_000)
    ok = res.passed and res.checked == 100 and secs < 60
    assert acceptance(6, "fair boundaries through anchors", ok, suite_detail(res, secs))


def test_criterion_7_per_group_tv(acceptance):
    res, secs = timed(verify.per_group_tv, n=200, tol=1e-10)
    ok = res.passed and res.checked == 200
    assert acceptance(7, "per-group TV in case 1", ok, suite_detail(res, secs))


@pytest.mark.slow
def test_criterion_8_table(acceptance):
    cfg = ExperimentConfig(seeds=(0, 1, 2, 3, 4), attacks=("none", "zflip"),
                           learners=("erm", "fc", "errtol"), data=SyntheticConfig(n_samples=6000))
    results, secs = timed(run_experiment, cfg)
    rows = {(r.attack, r.learner): r for r in summarize(results, cfg)}
    erm, fc_clean = rows["none", "erm"], rows["none", "fc"]
    fc_z, tol_z = rows["zflip", "fc"], rows["zflip", "errtol"]
    checks = {
        f"ERM accuracy {erm.acc_mean:.3f} in 0.88+-0.04": abs(erm.acc_mean - 0.88) <= 0.04,
        f"ERM gap {erm.gap_mean:.3f} in 0.19+-0.06": abs(erm.gap_mean - 0.19) <= 0.06,
        f"FC clean gap {fc_clean.gap_mean:.3f} <= 0.08": fc_clean.gap_mean <= 0.08,
        f"FC zflip gap {fc_z.gap_mean:.3f} >= 0.10": fc_z.gap_mean >= 0.10,
        f"relaxed zflip gap {tol_z.gap_mean:.3f} >= 0.15": tol_z.gap_mean >= 0.15,
        f"zflip rate {fc_z.rate_mean:.4f} in 0.032+-0.01": abs(fc_z.rate_mean - 0.032) <= 0.01,
        f"runtime {secs:.0f}s < 300s": secs < 300,
    }
    failed = [k for k, v in checks.items() if not v]
    detail = "; ".join(checks) + ("" if not failed else f"; failed: {failed}")
    assert acceptance(8, "attack x learner table, 5 seeds", not failed, detail)


def test_criterion_9_gradient_check(acceptance):
    train, _ = generate_synthetic(SyntheticConfig(n_samples=600, seed=0))
    rng = np.random.default_rng(0)
    eps, worst = 1e-6, 0.0
    for k in range(20):
        obj = PenalizedObjective(train, float(rng.uniform(0.1, 5.0)), EO if k % 2 == 0 else DP)
        theta = rng.normal(scale=0.5, size=3)
        num = np.array([(obj.value(theta + eps * e) - obj.value(theta - eps * e)) / (2 * eps)
                        for e in np.eye(3)])
        ana = obj.grad(theta)
        worst = max(worst, float(np.abs(ana - num).max() / max(np.abs(ana).max(), 1e-12)))
    ok = worst <= 1e-5
    assert acceptance(9, "penalized objective gradient vs finite differences", ok,
                      f"20 points, worst relative error {worst:.2e}")
