from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fairbreak.classifiers import LinearClassifier, ThresholdClassifier, constant_classifier
from fairbreak.dataset import LabeledDataset
from fairbreak.datagen import random_discrete_instance
from fairbreak.errors import DimensionError, UndefinedBound, UndefinedGap
from fairbreak.metrics import (
    DP,
    EO,
    CellStats,
    FairnessCriterion,
    c_bound,
    c_bound_alt,
    cell_stats,
    fairness_gap,
    fairness_gap_exact,
    gap_from_stats,
    risk,
)
from fairbreak.optimal_attack import CaseSelector, select_case


def counts_dataset(P, Q, R, S, negatives=0):
    """One-dimensional dataset with the given EO cell counts for h = [x >= 0.5]."""
    cells = [(0, 0, P), (1, 0, Q), (0, 1, R), (1, 1, S)]
    x = [hx for hx, _, n in cells for _ in range(n)] + [0] * negatives
    z = [zz for _, zz, n in cells for _ in range(n)] + [0] * negatives
    y = [1] * (P + Q + R + S) + [0] * negatives
    return LabeledDataset(np.array(x, float), y, z)


H_HALF = ThresholdClassifier(0.5, "ge")


def test_gap_small_example():
    d = counts_dataset(3, 3, 1, 3)
    assert cell_stats(H_HALF, d) == CellStats(3, 3, 1, 3)
    # rates 3/6 and 3/4 against the pooled 6/10
    assert fairness_gap_exact(H_HALF, d) == Fraction(3, 20)
    assert fairness_gap(H_HALF, d) == pytest.approx(0.15, abs=1e-15)


def test_eo_ignores_negatives_but_dp_does_not():
    d = counts_dataset(3, 3, 1, 3, negatives=4)
    assert fairness_gap(H_HALF, d, EO) == pytest.approx(0.15)
    assert cell_stats(H_HALF, d, DP) == CellStats(7, 3, 1, 3)


def test_criterion_parse():
    assert FairnessCriterion.parse("eo") is EO
    assert FairnessCriterion.parse("DP") is DP
    assert FairnessCriterion.parse(EO) is EO
    with pytest.raises(ValueError):
        FairnessCriterion.parse("odds")


def test_worked_example_bound():
    stats = CellStats(0.075, 0.0625, 0.025, 0.1875)
    assert c_bound(stats) == pytest.approx(0.05, abs=1e-15)
    assert select_case(stats) is CaseSelector.CASE4


@pytest.mark.parametrize(
    "stats, case",
    [
        ((0.3, 0.2, 0.1, 0.1), CaseSelector.CASE2),
        ((0.25, 0.25, 0.25, 0.25), CaseSelector.CASE1),
        ((0.2, 0.3, 0.3, 0.1), CaseSelector.CASE1),
        ((0.1, 0.2, 0.3, 0.4), CaseSelector.CASE3),
        ((0.075, 0.0625, 0.025, 0.1875), CaseSelector.CASE4),
    ],
)
def test_select_case(stats, case):
    assert select_case(CellStats(*stats)) is case


def test_zero_cells():
    with pytest.raises(UndefinedBound):
        c_bound(CellStats(0, 0, 0, 0))
    with pytest.raises(UndefinedBound):
        select_case(CellStats(0.0, 0.0, 0.0, 0.0))
    with pytest.raises(UndefinedGap):
        gap_from_stats(CellStats(0, 0, 2, 3))


def test_dimension_mismatch():
    d = counts_dataset(1, 1, 1, 1)
    with pytest.raises(DimensionError):
        fairness_gap(LinearClassifier((1.0, 1.0), 0.0), d)


def test_constant_classifier_is_fair():
    d = counts_dataset(3, 3, 1, 3, negatives=4)
    h = constant_classifier(1, 1)
    assert fairness_gap(h, d) == 0.0
    assert 1 - risk(h, d) == pytest.approx(10 / 14)


cell = st.floats(0.0, 1.0, allow_nan=False)


@given(cell, cell, cell, cell)
def test_bound_at_most_smaller_side(p, q, r, s):
    stats = CellStats(p, q, r, s)
    if max(p + r, q + s) == 0:
        return
    assert 0.0 <= c_bound(stats) <= min(p + r, q + s) + 1e-12


@given(st.integers(0, 40), st.integers(0, 40), st.integers(0, 40), st.integers(0, 40))
def test_gap_matches_definition_on_counts(P, Q, R, S):
    if P + Q == 0 or R + S == 0:
        return
    pooled = Fraction(Q + S, P + Q + R + S)
    expected = max(abs(Fraction(Q, P + Q) - pooled), abs(Fraction(S, R + S) - pooled))
    assert gap_from_stats(CellStats(P, Q, R, S)) == expected


@pytest.mark.parametrize("seed", range(20))
def test_cell_stats_against_loop(seed):
    d, h = random_discrete_instance(6, seed)
    pred = h.predict(d.coords)
    for crit in (EO, DP):
        cells = np.zeros((2, 2))
        for i in range(d.n_points):
            for y in (0, 1):
                if crit is EO and y == 0:
                    continue
                for z in (0, 1):
                    cells[pred[i], z] += d.mass[i, y, z]
        stats = cell_stats(h, d, crit)
        assert np.allclose(stats.as_tuple(), [cells[0, 0], cells[1, 0], cells[0, 1], cells[1, 1]],
                           atol=1e-15)
        assert c_bound(stats) == pytest.approx(c_bound_alt(h, d, crit), abs=1e-10)


def test_risk_of_distribution():
    d, h = random_discrete_instance(5, 3)
    pred = h.predict(d.coords)
    wrong = sum(d.mass[i, 1 - pred[i]].sum() for i in range(d.n_points))
    assert risk(h, d) == pytest.approx(wrong, abs=1e-15)
