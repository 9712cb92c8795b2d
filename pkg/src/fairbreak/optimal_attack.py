"""Distribution-level optimal flipping attacks.

``fair_construct`` moves the minimum total-variation mass across Z so that a
target classifier becomes perfectly fair; its cost equals
``c_bound(cell_stats(h, d))`` exactly. ``two_stage_attack`` first relabels Y so
the target is the strict Bayes classifier (hence the unique risk minimizer)
and then applies ``fair_construct``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .distributions import DiscreteJointDistribution, tv_distance
from .errors import CaseNotApplicable, DegenerateCase, InvalidMargin, UndefinedBound
from .metrics import (
    DP,
    EO,
    CellStats,
    FairnessCriterion,
    c_bound,
    cell_stats,
    predictions,
    risk,
)


class CaseSelector(enum.Enum):
    CASE1 = 1
    CASE2 = 2
    CASE3 = 3
    CASE4 = 4


def select_case(stats: CellStats) -> CaseSelector:
    """Pick the transport case; cross-multiplied so zero cells never divide.

    Ties go to the ``>=`` branch of both conditions.
    """
    p, q, r, s = stats.as_tuple()
    if p == 0 and q == 0 and r == 0 and s == 0:
        raise UndefinedBound("p = q = r = s = 0")
    heavy_negative = p + r >= q + s
    tilted = q * r >= p * s
    if heavy_negative:
        return CaseSelector.CASE1 if tilted else CaseSelector.CASE2
    return CaseSelector.CASE3 if tilted else CaseSelector.CASE4


@dataclass(frozen=True)
class Transport:
    """One Z-flip applied uniformly over an h-region.

    ``fraction`` of the mass in Z=``source_z`` is moved to Z=1-``source_z`` at
    every support point with h(x) = ``h_value`` (Y=1 cells only for EO,
    both Y rows for DP).
    """

    case: CaseSelector
    h_value: int
    source_z: int
    fraction: float


def _transport_fraction(case: CaseSelector, stats: CellStats) -> tuple[float, float]:
    """(numerator, divisor) of the transported fraction for ``case``."""
    p, q, r, s = stats.as_tuple()
    if case is CaseSelector.CASE1:
        return q * r - p * s, (p + r) * q
    if case is CaseSelector.CASE2:
        return p * s - q * r, (p + r) * s
    if case is CaseSelector.CASE3:
        return q * r - p * s, (q + s) * r
    return p * s - q * r, (q + s) * p


# (h region, source z) per case
_CASE_REGION = {
    CaseSelector.CASE1: (1, 0),
    CaseSelector.CASE2: (1, 1),
    CaseSelector.CASE3: (0, 1),
    CaseSelector.CASE4: (0, 0),
}


def plan_transport(stats: CellStats) -> Transport:
    case = select_case(stats)
    num, div = _transport_fraction(case, stats)
    if div == 0:
        if num != 0:
            raise DegenerateCase(f"{case.name}: divisor cell is zero but numerator is {num}")
        fraction = 0.0
    else:
        fraction = float(num / div)
    h_value, source_z = _CASE_REGION[case]
    return Transport(case, h_value, source_z, fraction)


def apply_transport(
    d: DiscreteJointDistribution, h, transport: Transport, criterion=EO
) -> DiscreteJointDistribution:
    criterion = FairnessCriterion.parse(criterion)
    region = predictions(h, d) == transport.h_value
    rows = [1] if criterion is EO else [0, 1]
    src, dst = transport.source_z, 1 - transport.source_z
    mass = np.array(d.mass)
    for y in rows:
        moved = transport.fraction * mass[region, y, src]
        mass[region, y, src] -= moved
        mass[region, y, dst] += moved
    # rounding residue from (1 - a) * m with a == 1
    np.clip(mass, 0.0, None, out=mass)
    return d.with_mass(mass)


def fair_construct(d: DiscreteJointDistribution, h, criterion=EO) -> DiscreteJointDistribution:
    """The minimum-TV flip of ``d`` on which ``h`` is perfectly fair.

    For equal opportunity only Y=1 mass is moved; for demographic parity the
    same fraction is moved in both Y rows.
    """
    criterion = FairnessCriterion.parse(criterion)
    stats = cell_stats(h, d, criterion)
    return apply_transport(d, h, plan_transport(stats), criterion)


def stage1_make_unique_minimizer(
    d: DiscreteJointDistribution, h, margin: float = 0.1
) -> DiscreteJointDistribution:
    """Pure Y-flip making ``h`` the Bayes classifier with the given margin.

    At each support point where Pr(Y = h(x) | x) < 1/2 + margin, the same
    fraction of both wrong-label cells (one per z) is relabeled so that the
    conditional reaches exactly 1/2 + margin. Other points are untouched.
    """
    if not 0.0 < margin <= 0.5:
        raise InvalidMargin(f"margin must lie in (0, 1/2], got {margin}")
    pred = predictions(h, d)
    mass = np.array(d.mass)
    total = mass.sum(axis=(1, 2))
    idx = np.arange(d.n_points)
    right = mass[idx, pred, :]  # shape (k, 2): cells with y == h(x)
    wrong = mass[idx, 1 - pred, :]
    need = (0.5 + margin) * total - right.sum(axis=1)
    todo = (need > 0) & (total > 0)
    frac = np.zeros(d.n_points)
    frac[todo] = np.minimum(need[todo] / wrong[todo].sum(axis=1), 1.0)
    moved = wrong * frac[:, None]
    mass[idx, pred, :] = right + moved
    mass[idx, 1 - pred, :] = wrong - moved
    np.clip(mass, 0.0, None, out=mass)
    return d.with_mass(mass)


def bayes_classifier(d: DiscreteJointDistribution):
    """Pointwise majority label (ties to 1) as a lookup classifier."""
    from .classifiers import LookupClassifier

    labels = (d.mass[:, 1, :].sum(axis=1) >= d.mass[:, 0, :].sum(axis=1)).astype(int)
    return LookupClassifier.from_points(d.coords, labels)


def bayes_margin(d: DiscreteJointDistribution, h) -> float:
    """min over support points of Pr(Y = h(x) | x) - 1/2."""
    pred = predictions(h, d)
    total = d.mass.sum(axis=(1, 2))
    right = d.mass[np.arange(d.n_points), pred, :].sum(axis=1)
    live = total > 0
    return float((right[live] / total[live]).min() - 0.5)


def is_unique_risk_minimizer(h, d, hypotheses: Iterable, tol: float = 1e-12) -> bool:
    """True if every hypothesis that labels some positive-mass point differently
    from ``h`` has strictly larger risk."""
    base = risk(h, d)
    pred = predictions(h, d)
    live = d.x_marginal() > 0 if isinstance(d, DiscreteJointDistribution) else slice(None)
    for g in hypotheses:
        if np.array_equal(predictions(g, d)[live], pred[live]):
            continue
        if risk(g, d) <= base + tol:
            return False
    return True


@dataclass(frozen=True)
class TwoStageResult:
    stage1: DiscreteJointDistribution
    stage2: DiscreteJointDistribution
    tv_stage1: float
    tv_stage2: float
    tv_total: float
    bound_stage2: float
    transport: Transport
    unique_minimizer: bool | None = None


def two_stage_attack(
    d: DiscreteJointDistribution,
    h,
    margin: float = 0.1,
    criterion=EO,
    hypotheses: Iterable | None = None,
) -> TwoStageResult:
    """Stage 1 makes ``h`` the strict Bayes classifier, stage 2 makes it fair.

    When ``hypotheses`` is given, ``unique_minimizer`` records whether ``h``
    is the strict risk minimizer over that finite set on the final
    distribution.
    """
    criterion = FairnessCriterion.parse(criterion)
    stage1 = stage1_make_unique_minimizer(d, h, margin)
    stats1 = cell_stats(h, stage1, criterion)
    transport = plan_transport(stats1)
    stage2 = apply_transport(stage1, h, transport, criterion)
    unique = None
    if hypotheses is not None:
        unique = is_unique_risk_minimizer(h, stage2, hypotheses)
    return TwoStageResult(
        stage1=stage1,
        stage2=stage2,
        tv_stage1=tv_distance(d, stage1),
        tv_stage2=tv_distance(stage1, stage2),
        tv_total=tv_distance(d, stage2),
        bound_stage2=c_bound(stats1),
        transport=transport,
        unique_minimizer=unique,
    )


@dataclass(frozen=True)
class Bounds:
    lower: float
    upper: float


def cost_bounds(d: DiscreteJointDistribution, h, margin: float = 0.1, criterion=EO) -> Bounds:
    """Lower bound C(h, D) and the two-stage upper bound d_TV(D, D~) + C(h, D~)."""
    criterion = FairnessCriterion.parse(criterion)
    lower = c_bound(cell_stats(h, d, criterion))
    stage1 = stage1_make_unique_minimizer(d, h, margin)
    upper = tv_distance(d, stage1) + c_bound(cell_stats(h, stage1, criterion))
    return Bounds(lower, upper)


@dataclass(frozen=True)
class ConditionalTV:
    z0_tv: float
    z0_bound: float
    z1_tv: float
    z1_bound: float

    def holds(self, tol: float = 1e-10) -> bool:
        return abs(self.z0_tv - self.z0_bound) <= tol and self.z1_tv >= self.z1_bound - tol


def _given_z(mass: np.ndarray, z: int) -> np.ndarray:
    block = mass[:, :, z]
    return block / block.sum()


def conditional_tv_check(d: DiscreteJointDistribution, h) -> ConditionalTV:
    """Per-group TV between D and its demographic-parity fair construction.

    Compares d_TV(D_{Z=z}, DPFair_h(D)_{Z=z}) with
    |Pr(h=1 | Z=z) - Pr(h=1)|; only defined when the construction is in
    case 1.
    """
    stats = cell_stats(h, d, DP)
    if select_case(stats) is not CaseSelector.CASE1:
        raise CaseNotApplicable("conditional TV comparison requires case 1")
    p, q, r, s = stats.as_tuple()
    if p + q <= 0 or r + s <= 0:
        raise CaseNotApplicable("both Pr(Z=z) must be positive")
    fair = fair_construct(d, h, DP)
    pooled = (q + s) / (p + q + r + s)
    tvs = [0.5 * float(np.abs(_given_z(d.mass, z) - _given_z(fair.mass, z)).sum()) for z in (0, 1)]
    return ConditionalTV(
        z0_tv=tvs[0],
        z0_bound=abs(q / (p + q) - pooled),
        z1_tv=tvs[1],
        z1_bound=abs(s / (r + s) - pooled),
    )
