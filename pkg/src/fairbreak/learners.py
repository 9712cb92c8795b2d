"""Learners: logistic ERM, penalized fair ERM, a delta-relaxed sweep and an
exact fair learner over one-dimensional thresholds.

All gradient-based learners run full-batch gradient descent with a fixed
step and iteration cap. No line search, so results depend only on the data,
the config and the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np
from scipy.special import expit, log_expit

from .classifiers import LinearClassifier, ThresholdClassifier
from .dataset import LabeledDataset
from .errors import Infeasible, TrainingDiverged, UndefinedGap
from .metrics import EO, FairnessCriterion, cell_stats, fairness_gap_exact, gap_from_stats, risk

DEFAULT_PENALTY_GRID = (0.0, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0)


@dataclass(frozen=True)
class FermConfig:
    penalty_weight: float = 0.0
    delta: float = 0.0
    criterion: FairnessCriterion = EO
    learning_rate: float = 0.1
    max_iters: int = 2000
    seed: int = 0
    penalty_grid: tuple = DEFAULT_PENALTY_GRID

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.penalty_weight < 0:
            raise ValueError("penalty_weight must be nonnegative")
        object.__setattr__(self, "criterion", FairnessCriterion.parse(self.criterion))


def _design(X: np.ndarray) -> np.ndarray:
    return np.hstack([X, np.ones((X.shape[0], 1))])


def _groups(d: LabeledDataset, criterion: FairnessCriterion):
    cond = d.y == 1 if criterion is EO else np.ones(len(d), dtype=bool)
    g0, g1 = cond & (d.z == 0), cond & (d.z == 1)
    if not g0.any() or not g1.any():
        raise UndefinedGap("a sensitive group is empty")
    return g0, g1


class PenalizedObjective:
    """Mean logistic loss plus ``weight * |mean_g0 sigmoid - mean_g1 sigmoid|``.

    Parameters are ``theta = (weights..., bias)``.
    """

    def __init__(self, d: LabeledDataset, weight: float, criterion=EO):
        self.A = _design(d.X)
        self.sign = 2.0 * d.y - 1.0
        self.weight = float(weight)
        self.g0 = self.g1 = None
        if self.weight > 0:
            self.g0, self.g1 = _groups(d, FairnessCriterion.parse(criterion))

    def surrogate_gap(self, theta) -> float:
        p = expit(self.A @ theta)
        return float(p[self.g0].mean() - p[self.g1].mean())

    def value(self, theta) -> float:
        margins = self.sign * (self.A @ theta)
        loss = -log_expit(margins).mean()
        if self.weight > 0:
            loss += self.weight * abs(self.surrogate_gap(theta))
        return float(loss)

    def grad(self, theta) -> np.ndarray:
        scores = self.A @ theta
        # d/ds of -log sigmoid(t s) is -t sigmoid(-t s)
        coef = -self.sign * expit(-self.sign * scores)
        g = self.A.T @ coef / self.A.shape[0]
        if self.weight > 0:
            p = expit(scores)
            dp = p * (1.0 - p)
            diff = p[self.g0].mean() - p[self.g1].mean()
            d_diff = (
                self.A[self.g0].T @ dp[self.g0] / self.g0.sum()
                - self.A[self.g1].T @ dp[self.g1] / self.g1.sum()
            )
            g = g + self.weight * np.sign(diff) * d_diff
        return g


def _descend(obj: PenalizedObjective, cfg: FermConfig) -> LinearClassifier:
    rng = np.random.default_rng(cfg.seed)
    theta = rng.normal(scale=0.01, size=obj.A.shape[1])
    for _ in range(cfg.max_iters):
        theta = theta - cfg.learning_rate * obj.grad(theta)
    if not np.all(np.isfinite(theta)) or not np.isfinite(obj.value(theta)):
        raise TrainingDiverged("non-finite parameters or loss")
    return LinearClassifier(tuple(theta[:-1]), theta[-1])


def train_erm(d: LabeledDataset, cfg: FermConfig = FermConfig()) -> LinearClassifier:
    """Unconstrained logistic regression."""
    return _descend(PenalizedObjective(d, 0.0), cfg)


def train_ferm_penalized(d: LabeledDataset, cfg: FermConfig = FermConfig()) -> LinearClassifier:
    """Logistic regression with an absolute group-mean-score penalty.

    With ``penalty_weight == 0`` this is exactly :func:`train_erm`.
    """
    return _descend(PenalizedObjective(d, cfg.penalty_weight, cfg.criterion), cfg)


@dataclass(frozen=True)
class RelaxedResult:
    model: LinearClassifier
    penalty_weight: float
    train_risk: float
    train_gap: float
    fallback: bool


def train_ferm_relaxed_detailed(d: LabeledDataset, cfg: FermConfig = FermConfig()) -> RelaxedResult:
    """Lowest-risk candidate of a penalty sweep whose training gap is <= delta.

    If no candidate qualifies, returns the fairest one with ``fallback=True``.
    """
    _groups(d, cfg.criterion)
    candidates = []
    for w in cfg.penalty_grid:
        model = train_ferm_penalized(d, replace(cfg, penalty_weight=w))
        gap = fairness_gap_exact(model, d, cfg.criterion)
        candidates.append((Fraction(risk(model, d)), gap, w, model))
    feasible = [c for c in candidates if c[1] <= Fraction(cfg.delta)]
    if feasible:
        r, gap, w, model = min(feasible, key=lambda c: (c[0], c[1], c[2]))
        return RelaxedResult(model, w, float(r), float(gap), fallback=False)
    r, gap, w, model = min(candidates, key=lambda c: (c[1], c[0], c[2]))
    return RelaxedResult(model, w, float(r), float(gap), fallback=True)


def train_ferm_relaxed(d: LabeledDataset, cfg: FermConfig = FermConfig()) -> LinearClassifier:
    return train_ferm_relaxed_detailed(d, cfg).model


def threshold_candidates(values: np.ndarray) -> list[float]:
    """Midpoints between sorted distinct values, plus both infinities."""
    v = np.unique(np.asarray(values, dtype=np.float64))
    mids = (0.5 * (v[:-1] + v[1:])).tolist()
    return [-np.inf, *mids, np.inf]


def ftrm_threshold_exact(
    d: LabeledDataset, delta: float, criterion=EO, feature: int = 0
) -> ThresholdClassifier:
    """Exact minimum-risk delta-fair threshold classifier by enumeration.

    Both directions are enumerated. Ties are broken by smaller risk, then
    smaller gap, then smaller threshold, then ``ge`` before ``le``.
    """
    criterion = FairnessCriterion.parse(criterion)
    col = d.X[:, feature]
    m = len(d)
    best = None
    for t in threshold_candidates(col):
        for direction in ("ge", "le"):
            h = ThresholdClassifier(t, direction, dim=d.dim, feature=feature)
            pred = h.predict(d.X)
            r = Fraction(int(np.count_nonzero(pred != d.y)), m)
            gap = gap_from_stats(cell_stats(h, d, criterion))
            if gap > Fraction(delta):
                continue
            key = (r, gap, t, direction != "ge")
            if best is None or key < best[0]:
                best = (key, h)
    if best is None:
        raise Infeasible("no delta-fair threshold; constant classifiers should always qualify")
    return best[1]
