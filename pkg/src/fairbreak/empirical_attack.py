"""Sensitive-attribute flipping on finite training sets, plus random baselines."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dataset import LabeledDataset
from .errors import BudgetError, UndefinedBound, UndefinedGap
from .metrics import EO, CellStats, FairnessCriterion, cell_stats, fairness_gap, predictions, risk
from .optimal_attack import CaseSelector, select_case

# (h(x), y, z) cell whose z values are flipped, per case
_SOURCE_CELL = {
    CaseSelector.CASE1: (1, 1, 0),
    CaseSelector.CASE2: (1, 1, 1),
    CaseSelector.CASE3: (0, 1, 1),
    CaseSelector.CASE4: (0, 1, 0),
}

RANDOM_KINDS = ("Y", "Z", "YZ")


@dataclass(frozen=True)
class AttackReport:
    poisoned: LabeledDataset
    flipped_indices: tuple[int, ...]
    poisoning_rate: float
    pre_gap: float
    post_gap: float
    pre_risk: float
    post_risk: float
    attack: str = "zflip"
    alpha: int | None = None
    case: CaseSelector | None = None
    stats: CellStats | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    def to_text(self) -> str:
        """Flat ``key=value`` block, one entry per line."""
        rows = {
            "attack": self.attack,
            "n_samples": len(self.poisoned),
            "n_flipped": len(self.flipped_indices),
            "poisoning_rate": repr(self.poisoning_rate),
            "alpha": "" if self.alpha is None else self.alpha,
            "case": "" if self.case is None else self.case.name.lower(),
            "cells_PQRS": "" if self.stats is None else ",".join(map(str, self.stats.as_tuple())),
            "pre_gap": repr(self.pre_gap),
            "post_gap": repr(self.post_gap),
            "pre_risk": repr(self.pre_risk),
            "post_risk": repr(self.post_risk),
            "gap_envelope": self._envelope_text(),
            "flipped_indices": ",".join(map(str, self.flipped_indices)),
            "notes": " | ".join(self.notes),
        }
        return "".join(f"{k}={v}\n" for k, v in rows.items())

    def _envelope_text(self) -> str:
        if self.stats is None or min(self.stats.as_tuple()) <= 0:
            return ""
        return f"{envelope(self.stats)!r} (1/min(P,Q,R,S); constant chosen by this package)"


def _gap_or_nan(h, d, criterion) -> float:
    try:
        return fairness_gap(h, d, criterion)
    except UndefinedGap:
        return math.nan


def flip_count(stats: CellStats) -> int:
    """floor(|PS - QR| / max(P + R, Q + S)) on integer counts."""
    P, Q, R, S = (int(v) for v in stats.as_tuple())
    denom = max(P + R, Q + S)
    if denom <= 0:
        raise UndefinedBound("no Y=1 samples")
    return abs(P * S - Q * R) // denom


def z_flip_attack(d: LabeledDataset, h, rng_seed: int = 0, criterion=EO) -> AttackReport:
    """Flip the sensitive attribute of a minimal random subset so ``h`` looks fair.

    The flip count is the empirical analogue of C(h, D); the subset is drawn
    uniformly from the cell chosen by the same case split as the distribution
    construction.
    """
    criterion = FairnessCriterion.parse(criterion)
    stats = cell_stats(h, d, criterion)
    alpha = flip_count(stats)
    case = select_case(stats)
    a, b, c = _SOURCE_CELL[case]
    pred = predictions(h, d)
    in_cell = (pred == a) & (d.z == c)
    if criterion is EO:
        in_cell &= d.y == b
    cell = np.flatnonzero(in_cell)
    assert alpha <= cell.size, "flip count exceeds the designated cell"
    rng = np.random.default_rng(rng_seed)
    chosen = np.sort(rng.choice(cell, size=alpha, replace=False)) if alpha else np.array([], int)
    z = np.array(d.z)
    z[chosen] = 1 - z[chosen]
    poisoned = d.replace(z=z) if alpha else d
    notes = ()
    if alpha == 0:
        notes = ("alpha = 0: no flips needed at this sample size",)
    return AttackReport(
        poisoned=poisoned,
        flipped_indices=tuple(int(i) for i in chosen),
        poisoning_rate=alpha / len(d),
        pre_gap=_gap_or_nan(h, d, criterion),
        post_gap=_gap_or_nan(h, poisoned, criterion),
        pre_risk=risk(h, d),
        post_risk=risk(h, poisoned),
        attack="zflip",
        alpha=alpha,
        case=case,
        stats=stats,
        notes=notes,
    )


def random_flip_attack(
    d: LabeledDataset, kind: str, count: int, rng_seed: int = 0, h=None, criterion=EO
) -> AttackReport:
    """Flip y, z or both on ``count`` uniformly chosen samples.

    Gap and risk fields are NaN unless a classifier ``h`` is supplied.
    """
    kind = kind.upper()
    if kind not in RANDOM_KINDS:
        raise ValueError(f"kind must be one of {RANDOM_KINDS}, got {kind!r}")
    if count < 0 or count > len(d):
        raise BudgetError(f"count {count} outside [0, {len(d)}]")
    rng = np.random.default_rng(rng_seed)
    chosen = np.sort(rng.choice(len(d), size=count, replace=False))
    y, z = np.array(d.y), np.array(d.z)
    if "Y" in kind:
        y[chosen] = 1 - y[chosen]
    if "Z" in kind:
        z[chosen] = 1 - z[chosen]
    poisoned = d.replace(y=y, z=z) if count else d
    nan = math.nan
    return AttackReport(
        poisoned=poisoned,
        flipped_indices=tuple(int(i) for i in chosen),
        poisoning_rate=count / len(d),
        pre_gap=nan if h is None else _gap_or_nan(h, d, criterion),
        post_gap=nan if h is None else _gap_or_nan(h, poisoned, criterion),
        pre_risk=nan if h is None else risk(h, d),
        post_risk=nan if h is None else risk(h, poisoned),
        attack=f"rand{kind}",
    )


def post_attack_counts(P: int, Q: int, R: int, S: int, alpha: int) -> tuple[int, int, int, int]:
    """Cell counts after flipping ``alpha`` samples out of the case's source cell."""
    case = select_case(CellStats(P, Q, R, S))
    if case is CaseSelector.CASE1:
        return P, Q - alpha, R, S + alpha
    if case is CaseSelector.CASE2:
        return P, Q + alpha, R, S - alpha
    if case is CaseSelector.CASE3:
        return P + alpha, Q, R - alpha, S
    return P - alpha, Q, R + alpha, S


def empirical_gap_bound_exact(P: int, Q: int, R: int, S: int, alpha: int) -> Fraction:
    """Predicted post-attack gap from the closed-form per-group deviations.

    With post-attack counts P', Q', R', S' and T their sum, the group
    deviations are |Q'R' - P'S'| / ((P' + Q') T) and |Q'R' - P'S'| / ((R' + S') T);
    in case 1 the first is |QR - PS - alpha (P + R)| / ((P + Q - alpha) T).
    """
    P2, Q2, R2, S2 = post_attack_counts(P, Q, R, S, alpha)
    total = P2 + Q2 + R2 + S2
    if min(P2, Q2, R2, S2) < 0 or P2 + Q2 <= 0 or R2 + S2 <= 0:
        raise UndefinedGap("post-attack group is empty or alpha exceeds its source cell")
    num = abs(Q2 * R2 - P2 * S2)
    return max(Fraction(num, (P2 + Q2) * total), Fraction(num, (R2 + S2) * total))


def empirical_gap_bound(P: int, Q: int, R: int, S: int, alpha: int) -> float:
    return float(empirical_gap_bound_exact(P, Q, R, S, alpha))


def envelope(stats: CellStats) -> float:
    """The 1 / min(P, Q, R, S) envelope used to check the O(1/m) rate.

    The constant is our choice; the underlying rate statement leaves it implicit.
    """
    return 1.0 / min(int(v) for v in stats.as_tuple())
