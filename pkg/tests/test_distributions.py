import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fairbreak.distributions import (
    DiscreteJointDistribution,
    FlipKind,
    apply_y_flip,
    apply_z_flip,
    classify_flip,
    example1_distribution,
    load_distribution_csv,
    save_distribution_csv,
    tv_distance,
)
from fairbreak.errors import FormatError, InvalidFraction, InvalidMass, SupportMismatch

ALL_KINDS = {FlipKind.GENERAL, FlipKind.PURE_Y, FlipKind.PURE_Z, FlipKind.PURE_YZ}


def one_point(cells):
    return DiscreteJointDistribution(np.zeros((1, 1)), np.array(cells, dtype=float).reshape(1, 2, 2))


def masses(k):
    cell = st.floats(0.0, 1.0, allow_nan=False)
    return st.lists(cell, min_size=4 * k, max_size=4 * k).filter(lambda v: sum(v) > 1e-3)


def build(values, coords):
    m = np.array(values).reshape(-1, 2, 2)
    return DiscreteJointDistribution(coords, m / m.sum())


COORDS3 = np.array([[0.0], [1.0], [2.0]])


def test_tv_identity():
    d = example1_distribution(2)
    assert tv_distance(d, d) == 0.0


def test_tv_disjoint_mass_is_one():
    assert tv_distance(one_point([0, 0, 1, 0]), one_point([0, 0, 0, 1])) == 1.0


def test_tv_support_mismatch():
    a = one_point([1, 0, 0, 0])
    b = DiscreteJointDistribution(np.ones((1, 1)), a.mass)
    with pytest.raises(SupportMismatch):
        tv_distance(a, b)


@given(masses(3), masses(3), masses(3))
def test_tv_is_a_metric(a, b, c):
    d1, d2, d3 = build(a, COORDS3), build(b, COORDS3), build(c, COORDS3)
    assert tv_distance(d1, d2) >= 0
    assert tv_distance(d1, d2) == pytest.approx(tv_distance(d2, d1), abs=1e-15)
    assert tv_distance(d1, d3) <= tv_distance(d1, d2) + tv_distance(d2, d3) + 1e-12
    assert tv_distance(d1, d2) <= 1.0 + 1e-12


def test_total_mass_validation():
    with pytest.raises(InvalidMass):
        DiscreteJointDistribution(np.zeros((1, 1)), np.full((1, 2, 2), 0.3))
    with pytest.raises(InvalidMass):
        DiscreteJointDistribution(np.zeros((1, 1)), np.array([[[1.5, -0.5], [0, 0]]]))


def test_classify_identity_has_every_kind():
    d = example1_distribution(2)
    assert classify_flip(d, d) == ALL_KINDS


def test_classify_single_y_move():
    base = one_point([0.4, 0.1, 0.2, 0.3])
    moved = one_point([0.3, 0.1, 0.3, 0.3])  # (y=0, z=0) -> (y=1, z=0)
    kinds = classify_flip(base, moved)
    assert FlipKind.PURE_Y in kinds and FlipKind.GENERAL in kinds
    assert FlipKind.PURE_Z not in kinds
    # by hand: (y0z0 + y1z1) changed by -0.1, so not a Y&Z-pairing flip either
    assert FlipKind.PURE_YZ not in kinds


def test_classify_marginal_change_is_empty():
    a = DiscreteJointDistribution(np.array([[0.0], [1.0]]), np.array([[[0.25, 0.25], [0, 0]], [[0.25, 0.25], [0, 0]]]))
    b = a.with_mass(np.array([[[0.5, 0.25], [0, 0]], [[0.0, 0.25], [0, 0]]]))
    assert classify_flip(a, b) == set()


@given(masses(3), st.integers(0, 2), st.integers(0, 1), st.integers(0, 1), st.floats(0, 1))
def test_flips_keep_their_kind_and_nesting(values, i, y, z, frac):
    d = build(values, COORDS3)
    zf = classify_flip(d, apply_z_flip(d, i, y, z, frac))
    yf = classify_flip(d, apply_y_flip(d, i, y, z, frac))
    assert {FlipKind.PURE_Z, FlipKind.GENERAL} <= zf
    assert {FlipKind.PURE_Y, FlipKind.GENERAL} <= yf
    for kinds in (zf, yf):
        if kinds & {FlipKind.PURE_Y, FlipKind.PURE_Z, FlipKind.PURE_YZ}:
            assert FlipKind.GENERAL in kinds


def test_z_flip_fraction_edges():
    d = one_point([0.1, 0.2, 0.3, 0.4])
    assert apply_z_flip(d, 0, 1, 0, 0.0) == d
    full = apply_z_flip(d, 0, 1, 0, 1.0)
    assert full.mass[0, 1, 0] == 0.0
    assert full.mass[0, 1, 1] == pytest.approx(0.7, abs=1e-15)
    with pytest.raises(InvalidFraction):
        apply_z_flip(d, 0, 1, 0, 1.5)


def test_z_flip_purple_region_densities():
    # stage-1 density 0.4 on (y=1, z=0) where h=0; flipping 2/3 of it leaves
    # 0.4/3 and moves 0.8/3 to z=1 (per unit of X-density)
    d = one_point([0.6, 0.0, 0.4, 0.0])
    out = apply_z_flip(d, 0, 1, 0, 2 / 3)
    assert out.mass[0, 1, 0] == pytest.approx(0.4 / 3, abs=1e-15)
    assert out.mass[0, 1, 1] == pytest.approx(0.8 / 3, abs=1e-15)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_example1(n):
    d = example1_distribution(n)
    assert d.n_points == 4 * n * n
    assert np.allclose(d.x_marginal(), 1 / (4 * n * n))
    assert d.prob(y=1, z=0) == pytest.approx(0.25, abs=1e-15)
    assert abs(d.mass.sum() - 1.0) <= 1e-12


def test_example1_square_placement():
    d = example1_distribution(1)
    for (x1, x2), m in zip(d.coords, d.mass):
        y, z = np.argwhere(m > 0)[0]
        quadrant = 3 - y + z - 2 * y * z
        expected = {1: (1, 1), 2: (-1, 1), 3: (-1, -1), 4: (1, -1)}[quadrant]
        assert (np.sign(x1), np.sign(x2)) == expected


def test_csv_round_trip(tmp_path):
    d = example1_distribution(3)
    path = tmp_path / "d.csv"
    save_distribution_csv(d, path)
    assert load_distribution_csv(path) == d


def test_csv_rejects_bad_total(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,x1,m_y0z0,m_y0z1,m_y1z0,m_y1z1\n0,0.0,0.5,0.5,0.5,0.0\n")
    with pytest.raises(FormatError):
        load_distribution_csv(path)


def test_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,x,a,b,c,d\n0,0.0,0.25,0.25,0.25,0.25\n")
    with pytest.raises(FormatError):
        load_distribution_csv(path)
