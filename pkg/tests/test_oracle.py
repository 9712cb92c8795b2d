import numpy as np
import pytest

from fairbreak.classifiers import LinearClassifier, ThresholdClassifier, constant_classifier
from fairbreak.dataset import LabeledDataset
from fairbreak.datagen import random_discrete_instance
from fairbreak.distributions import DiscreteJointDistribution, tv_distance
from fairbreak.errors import InstanceTooLarge, UndefinedGap
from fairbreak.metrics import DP, EO, c_bound, cell_stats, fairness_gap
from fairbreak.optimal_attack import fair_construct
from fairbreak.oracle import brute_force_min_tv, exhaustive_gap_recheck


def test_already_fair_costs_nothing():
    d = DiscreteJointDistribution(np.array([[0.0], [1.0]]), np.full((2, 2, 2), 0.125))
    res = brute_force_min_tv(d, ThresholdClassifier(0.5, "ge"))
    assert res.best_tv == 0.0 and res.feasible


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("criterion", [EO, DP])
def test_sandwich_two_points(seed, criterion):
    d, h = random_discrete_instance(2, seed)
    step = 0.01
    res = brute_force_min_tv(d, h, grid_step=step, criterion=criterion)
    c = c_bound(cell_stats(h, d, criterion))
    assert res.feasible
    assert c - 2 * step <= res.best_tv <= tv_distance(d, fair_construct(d, h, criterion)) + 1e-12
    fair = res.best_distribution
    assert np.max(np.abs(fair.x_marginal() - d.x_marginal())) <= 1e-12
    assert fairness_gap(h, fair, criterion) <= step / 2 + 1e-12


def test_worked_example_cells():
    # two points carrying the stage-2 input cells of the worked example
    coords = np.array([[0.0], [1.0]])
    mass = np.zeros((2, 2, 2))
    mass[0, 1] = (0.075, 0.025)
    mass[1, 1] = (0.0625, 0.1875)
    mass[0, 0, 0] = 0.65
    d = DiscreteJointDistribution(coords, mass)
    res = brute_force_min_tv(d, ThresholdClassifier(0.5, "ge"))
    assert res.best_tv == pytest.approx(0.05, abs=0.02)


def test_too_large():
    d, h = random_discrete_instance(5, 0)
    with pytest.raises(InstanceTooLarge):
        brute_force_min_tv(d, h)


def test_bad_grid():
    d, h = random_discrete_instance(2, 0)
    with pytest.raises(ValueError):
        brute_force_min_tv(d, h, grid_step=0.5)


def test_recheck_matches_metrics():
    for seed in range(1000):
        d, h = random_discrete_instance(1 + seed % 6, seed)
        rec = exhaustive_gap_recheck(d, h)
        for crit, got in ((EO, rec.eo_gap), (DP, rec.dp_gap)):
            try:
                expected = fairness_gap(h, d, crit)
            except UndefinedGap:
                assert got is None
                continue
            assert abs(got - expected) <= 1e-12


def test_recheck_on_samples():
    rng = np.random.default_rng(0)
    d = LabeledDataset(rng.normal(size=(50, 2)), rng.integers(0, 2, 50), rng.integers(0, 2, 50))
    h = LinearClassifier((1.0, -0.5), 0.2)
    rec = exhaustive_gap_recheck(d, h)
    assert abs(rec.eo_gap - fairness_gap(h, d, EO)) <= 1e-12
    assert abs(rec.dp_gap - fairness_gap(h, d, DP)) <= 1e-12


def test_constant_classifier_conditionals_equal():
    d, _ = random_discrete_instance(4, 2)
    rec = exhaustive_gap_recheck(d, constant_classifier(2, 1))
    values = [*rec.by_z, *rec.by_y, *rec.by_yz[0], *rec.by_yz[1], rec.overall]
    assert all(v == pytest.approx(1.0, abs=1e-15) for v in values)
    assert rec.eo_gap == pytest.approx(0.0, abs=1e-15)


def test_empty_group_flagged_like_metrics():
    d = LabeledDataset(np.array([0.0, 1.0, 2.0]), [1, 1, 0], [0, 0, 1])
    h = ThresholdClassifier(0.5, "ge")
    rec = exhaustive_gap_recheck(d, h)
    assert rec.by_yz[1][1] is None and rec.eo_gap is None
    with pytest.raises(UndefinedGap):
        fairness_gap(h, d, EO)
