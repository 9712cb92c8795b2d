"""Risk, fairness gaps and the closed-form flipping cost C(h, D).

Functions accept either a :class:`DiscreteJointDistribution` (exact masses)
or a :class:`LabeledDataset` (empirical measure). On datasets the cell
statistics are integer counts and gaps are evaluated in rational arithmetic,
so equal gaps compare equal exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

import numpy as np

from .dataset import LabeledDataset
from .distributions import DiscreteJointDistribution
from .errors import DimensionError, UndefinedBound, UndefinedGap


class FairnessCriterion(enum.Enum):
    EQUAL_OPPORTUNITY = "eo"
    DEMOGRAPHIC_PARITY = "dp"

    @classmethod
    def parse(cls, value) -> "FairnessCriterion":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


EO = FairnessCriterion.EQUAL_OPPORTUNITY
DP = FairnessCriterion.DEMOGRAPHIC_PARITY


@dataclass(frozen=True)
class CellStats:
    """Joint masses (or counts) of (h(X), Z) restricted to Y=1 for EO.

    p = (h=0, z=0), q = (h=1, z=0), r = (h=0, z=1), s = (h=1, z=1).
    For demographic parity the Y=1 restriction is dropped.
    """

    p: Real
    q: Real
    r: Real
    s: Real

    def as_tuple(self) -> tuple:
        return (self.p, self.q, self.r, self.s)

    @property
    def is_integral(self) -> bool:
        return all(isinstance(v, (int, np.integer)) for v in self.as_tuple())


def _predict(h, X) -> np.ndarray:
    if getattr(h, "dim", X.shape[1]) != X.shape[1]:
        raise DimensionError(f"classifier dimension {h.dim} != data dimension {X.shape[1]}")
    return np.asarray(h.predict(X), dtype=np.int8)


def predictions(h, d) -> np.ndarray:
    return _predict(h, d.coords if isinstance(d, DiscreteJointDistribution) else d.X)


def risk(h, d) -> float:
    """Expected 0/1 loss of ``h``."""
    pred = predictions(h, d)
    if isinstance(d, DiscreteJointDistribution):
        # mass of the label h does not predict
        wrong = np.where(pred == 1, d.mass[:, 0, :].sum(axis=1), d.mass[:, 1, :].sum(axis=1))
        return float(wrong.sum())
    return float(Fraction(int(np.count_nonzero(pred != d.y)), len(d)))


def cell_stats(h, d, criterion=EO) -> CellStats:
    criterion = FairnessCriterion.parse(criterion)
    pred = predictions(h, d)
    if isinstance(d, DiscreteJointDistribution):
        m = d.mass[:, 1, :] if criterion is EO else d.mass.sum(axis=1)
        neg, pos = pred == 0, pred == 1
        return CellStats(
            p=float(m[neg, 0].sum()),
            q=float(m[pos, 0].sum()),
            r=float(m[neg, 1].sum()),
            s=float(m[pos, 1].sum()),
        )
    keep = d.y == 1 if criterion is EO else np.ones(len(d), dtype=bool)

    def count(a, c):
        return int(np.count_nonzero(keep & (pred == a) & (d.z == c)))

    return CellStats(p=count(0, 0), q=count(1, 0), r=count(0, 1), s=count(1, 1))


def gap_from_stats(stats: CellStats):
    """Fairness gap from the four cells; rational when the cells are counts."""
    p, q, r, s = stats.as_tuple()
    if stats.is_integral:
        p, q, r, s = (Fraction(int(v)) for v in (p, q, r, s))
    g0, g1 = p + q, r + s
    if g0 <= 0 or g1 <= 0:
        raise UndefinedGap("a sensitive group has zero mass in the conditioning event")
    pooled = (q + s) / (g0 + g1)
    return max(abs(q / g0 - pooled), abs(s / g1 - pooled))


def fairness_gap(h, d, criterion=EO) -> float:
    """Largest deviation of a group-conditional positive rate from the pooled rate."""
    return float(gap_from_stats(cell_stats(h, d, criterion)))


def fairness_gap_exact(h, d: LabeledDataset, criterion=EO) -> Fraction:
    return gap_from_stats(cell_stats(h, d, criterion))


def c_bound(stats: CellStats) -> float:
    """C(h, D) = |ps - qr| / max(p + r, q + s)."""
    p, q, r, s = stats.as_tuple()
    denom = max(p + r, q + s)
    if denom <= 0:
        raise UndefinedBound("p = q = r = s = 0")
    if stats.is_integral:
        return float(Fraction(abs(int(p) * int(s) - int(q) * int(r)), int(denom)))
    return abs(p * s - q * r) / denom


def c_bound_alt(h, d: DiscreteJointDistribution, criterion=EO) -> float:
    """The same quantity written as gap * min group mass / max(TPR, FNR).

    Computed from the distribution directly rather than through
    :func:`cell_stats`, so it doubles as a cross-check of :func:`c_bound`.
    For demographic parity the group masses are Pr(Z=z) and TPR/FNR become
    Pr(h=1) and Pr(h=0).
    """
    criterion = FairnessCriterion.parse(criterion)
    pred = predictions(h, d)
    m = d.mass[:, 1, :] if criterion is EO else d.mass.sum(axis=1)
    group = m.sum(axis=0)  # mass of each sensitive group inside the conditioning event
    total = group.sum()
    if group[0] <= 0 or group[1] <= 0:
        raise UndefinedGap("a sensitive group has zero mass in the conditioning event")
    positive = m[pred == 1].sum(axis=0)
    pooled = positive.sum() / total
    gap = max(abs(positive[0] / group[0] - pooled), abs(positive[1] / group[1] - pooled))
    tpr, fnr = pooled, 1.0 - pooled
    return float(gap * group.min() / max(tpr, fnr))
