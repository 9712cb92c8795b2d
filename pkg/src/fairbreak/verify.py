"""Property suites that cross-check the closed forms against independent
computations on randomly generated instances.

Every suite returns a :class:`SuiteResult` whose ``margin`` is the smallest
slack observed over all checks (negative means a check failed). Suites are
deterministic given their seed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import empirical_attack
from .classifiers import LookupClassifier, ThresholdClassifier
from .dataset import LabeledDataset
from .datagen import random_discrete_instance
from .distributions import FlipKind, classify_flip, tv_distance
from .errors import FairbreakError, UndefinedBound, UndefinedGap
from .fair_boundary import GaussianMixture, find_fair_direction, halfplane_prob
from .metrics import (
    DP,
    EO,
    c_bound,
    c_bound_alt,
    cell_stats,
    fairness_gap,
    fairness_gap_exact,
    predictions,
    risk,
)
from .optimal_attack import (
    CaseSelector,
    bayes_classifier,
    bayes_margin,
    conditional_tv_check,
    fair_construct,
    select_case,
    cost_bounds,
    two_stage_attack,
)
from .oracle import brute_force_min_tv


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    margin: float = math.inf
    failures: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures and self.checked > 0

    def record(self, slack: float, what: str) -> None:
        """Register one check with slack ``slack`` (>= 0 passes)."""
        self.margin = min(self.margin, float(slack))
        if not slack >= 0:
            self.failures.append(f"{what} (slack {slack:.3g})")

    def require(self, ok: bool, what: str) -> None:
        """Register a yes/no check; it does not affect the numeric margin."""
        if not ok:
            self.failures.append(what)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        line = f"{status} {self.name}: {self.checked} instances, margin {self.margin:.3g}"
        if self.failures:
            line += f"; first failure: {self.failures[0]}"
        return line


def _instances(n: int, seed: int, max_points: int = 6, min_points: int = 1):
    """Yield ``(index, d, h)`` for ``n`` random discrete instances."""
    for i in range(n):
        k = min_points + i % (max_points - min_points + 1)
        d, h = random_discrete_instance(k, seed * 1_000_003 + i)
        yield i, d, h


def formula_equivalence(n: int = 1000, seed: int = 0, tol: float = 1e-10) -> SuiteResult:
    """c_bound against its gap-times-group-mass form, both criteria."""
    res = SuiteResult("formula-equivalence")
    for i, d, h in _instances(n, seed):
        for crit in (EO, DP):
            try:
                a = c_bound(cell_stats(h, d, crit))
                b = c_bound_alt(h, d, crit)
            except (UndefinedGap, UndefinedBound):
                continue
            res.record(tol - abs(a - b), f"instance {i} {crit.value}: {a} vs {b}")
        res.checked += 1
    return res


def fair_construction(n: int = 500, seed: int = 0, tol: float = 1e-10) -> SuiteResult:
    """The fair construction is a flip, makes h fair and costs exactly C."""
    res = SuiteResult("fair-construction (marginal, fairness, cost)")
    cases = {c: 0 for c in CaseSelector}
    for i, d, h in _instances(n, seed):
        for crit in (EO, DP):
            stats = cell_stats(h, d, crit)
            try:
                cases[select_case(stats)] += crit is EO
                fair = fair_construct(d, h, crit)
                kinds = classify_flip(d, fair)
                res.require(
                    {FlipKind.GENERAL, FlipKind.PURE_Z} <= kinds,
                    f"instance {i} {crit.value}: flip kinds {sorted(k.name for k in kinds)}",
                )
                res.record(tol - fairness_gap(h, fair, crit), f"instance {i} {crit.value}: gap")
                res.record(tol - abs(tv_distance(d, fair) - c_bound(stats)),
                           f"instance {i} {crit.value}: tv vs C")
            except UndefinedGap:
                continue
            except FairbreakError as exc:
                res.require(False, f"instance {i} {crit.value}: {type(exc).__name__}: {exc}")
        res.checked += 1
    for case, count in cases.items():
        res.require(count > 0, f"{case.name} never exercised")
    res.notes.append("EO case counts: " + ", ".join(f"{c.name}={k}" for c, k in cases.items()))
    return res


def lower_bound_sandwich(n: int = 50, seed: int = 0, grid_step: float = 0.01) -> SuiteResult:
    """Grid oracle sandwiched between C - 2 step and the construction's cost.

    Also checks the lower bound for every exactly-fair flip the package
    produces (fair construction and the two-stage output).
    """
    res = SuiteResult("lower-bound sandwich (oracle)")
    for i, d, h in _instances(n, seed, max_points=2):
        c = c_bound(cell_stats(h, d))
        upper = tv_distance(d, fair_construct(d, h))
        o = brute_force_min_tv(d, h, grid_step)
        res.record(o.best_tv - (c - 2 * grid_step), f"instance {i}: oracle {o.best_tv} below C {c}")
        res.record(c + 2 * grid_step - o.best_tv, f"instance {i}: oracle {o.best_tv} above C {c}")
        res.record(upper + 1e-12 - o.best_tv, f"instance {i}: oracle above construction {upper}")
        stage2 = two_stage_attack(d, h).stage2
        for name, other in (("construction", fair_construct(d, h)), ("two-stage", stage2)):
            if fairness_gap(h, other) <= 1e-10:
                res.record(tv_distance(d, other) - (c - 1e-9), f"instance {i}: {name} beats C")
        res.checked += 1
    return res


def _bayes_instances(n: int, seed: int, max_points: int):
    """Random instances whose Bayes classifier is strict and non-constant."""
    found, j = 0, 0
    while found < n:
        k = 2 + j % (max_points - 1)
        d, _ = random_discrete_instance(k, seed * 1_000_003 + j)
        j += 1
        h = bayes_classifier(d)
        labels = predictions(h, d)
        if labels.min() == labels.max() or bayes_margin(d, h) <= 1e-6:
            continue
        yield found, d, h
        found += 1


def bayes_tightness(n: int = 50, seed: int = 0, grid_step: float = 0.01, oracle_points: int = 2,
         max_points: int = 4) -> SuiteResult:
    """For the Bayes classifier the cost is exactly C and the oracle agrees."""
    res = SuiteResult("tightness at the Bayes classifier")
    for i, d, h in _bayes_instances(n, seed, max_points):
        c = c_bound(cell_stats(h, d))
        margin = bayes_margin(d, h)
        out = two_stage_attack(d, h, margin=min(margin, 0.5))
        res.record(1e-12 - out.tv_stage1, f"instance {i}: stage 1 moved mass")
        res.record(1e-10 - abs(out.tv_total - c), f"instance {i}: total {out.tv_total} vs C {c}")
        if d.n_points <= oracle_points:
            o = brute_force_min_tv(d, h, grid_step)
            res.record(2 * grid_step - abs(o.best_tv - c), f"instance {i}: oracle {o.best_tv} vs C {c}")
        res.checked += 1
    return res


def _all_labelings(d):
    for bits in itertools.product((0, 1), repeat=d.n_points):
        yield LookupClassifier.from_points(d.coords, np.array(bits))


def two_stage(n: int = 200, seed: int = 0, max_points: int = 6, margin: float = 0.1) -> SuiteResult:
    """Two-stage attack: fair, cost C on stage 1, risks unchanged, h unique.

    The hypothesis set is every labeling of the support, so uniqueness is
    checked against all deterministic classifiers at once.
    """
    res = SuiteResult("two-stage attack")
    for i, d, h in _instances(n, seed, max_points=max_points):
        hyps = list(_all_labelings(d))
        try:
            out = two_stage_attack(d, h, margin=margin, hypotheses=hyps)
        except UndefinedBound:
            continue
        s1, s2 = out.stage1, out.stage2
        try:
            res.record(1e-10 - fairness_gap(h, s2), f"instance {i}: stage-2 gap")
        except UndefinedGap:
            pass
        res.record(1e-10 - abs(out.tv_stage2 - c_bound(cell_stats(h, s1))), f"instance {i}: stage-2 cost")
        worst = max(abs(risk(g, s1) - risk(g, s2)) for g in hyps)
        res.record(1e-12 - worst, f"instance {i}: a hypothesis changed risk by {worst}")
        res.record(bayes_margin(s1, h) - margin + 1e-12, f"instance {i}: stage-1 margin")
        res.require(out.unique_minimizer, f"instance {i}: h not the unique minimizer")
        b = cost_bounds(d, h, margin)
        res.record(b.upper - b.lower + 1e-12, f"instance {i}: bounds inverted")
        res.record(out.tv_stage1 + out.tv_stage2 - out.tv_total + 1e-12, f"instance {i}: triangle")
        res.checked += 1
    return res


def _count_cells(d: LabeledDataset, h):
    """P, Q, R, S by a plain loop, independent of metrics.cell_stats."""
    counts = {(a, c): 0 for a in (0, 1) for c in (0, 1)}
    for x, y, z in zip(d.X, d.y, d.z):
        if y == 1:
            counts[(int(h.predict(x[None, :])[0]), int(z))] += 1
    return counts[(0, 0)], counts[(1, 0)], counts[(0, 1)], counts[(1, 1)]


def _random_dataset(rng, min_cell: int):
    while True:
        m = int(rng.integers(60, 400))
        X = rng.normal(size=(m, 2))
        y = (rng.random(m) < rng.uniform(0.3, 0.8)).astype(np.int8)
        z = (rng.random(m) < rng.uniform(0.3, 0.7)).astype(np.int8)
        h = ThresholdClassifier(float(rng.normal(scale=0.5)), "ge" if rng.random() < 0.5 else "le", dim=2)
        d = LabeledDataset(X, y, z)
        if min(cell_stats(h, d).as_tuple()) >= min_cell:
            return d, h


def zflip_empirical(n: int = 500, seed: int = 0, min_cell: int = 5) -> SuiteResult:
    """Z-flip attack on finite sets: flip count, predicted gap, rate, risk."""
    res = SuiteResult("empirical Z-flip attack")
    rng = np.random.default_rng(seed)
    regressions = 0
    for i in range(n):
        d, h = _random_dataset(rng, min_cell)
        P, Q, R, S = _count_cells(d, h)
        alpha = abs(P * S - Q * R) // max(P + R, Q + S)
        try:
            rep = empirical_attack.z_flip_attack(d, h, rng_seed=i)
            again = empirical_attack.z_flip_attack(d, h, rng_seed=i)
        except (AssertionError, ValueError, FairbreakError) as exc:
            res.require(False, f"dataset {i}: attack raised {type(exc).__name__}: {exc}")
            res.checked += 1
            continue
        res.require(rep.alpha == alpha, f"dataset {i}: alpha {rep.alpha} != {alpha}")
        res.require(len(rep.flipped_indices) == alpha, f"dataset {i}: flipped count")
        post = fairness_gap_exact(h, rep.poisoned)
        predicted = empirical_attack.empirical_gap_bound_exact(P, Q, R, S, alpha)
        res.require(predicted == post, f"dataset {i}: predicted {predicted} != measured {post}")
        res.record(float(Fraction(1, min(P, Q, R, S)) - post), f"dataset {i}: gap above 1/min cell")
        res.require(rep.post_risk == rep.pre_risk, f"dataset {i}: risk changed")
        res.require(rep.flipped_indices == again.flipped_indices, f"dataset {i}: nondeterministic")
        if alpha >= 1 and post > fairness_gap_exact(h, d):
            regressions += 1
        res.checked += 1
    res.notes.append(f"post gap above pre gap with alpha >= 1: {regressions} of {n} datasets")
    return res


def per_group_tv(n: int = 200, seed: int = 0, tol: float = 1e-10) -> SuiteResult:
    """Per-group TV of the demographic-parity construction in case 1."""
    res = SuiteResult("per-group TV (demographic parity, case 1)")
    j = 0
    while res.checked < n:
        d, h = random_discrete_instance(1 + j % 6, seed * 1_000_003 + j)
        j += 1
        try:
            if select_case(cell_stats(h, d, DP)) is not CaseSelector.CASE1:
                continue
            rec = conditional_tv_check(d, h)
        except (UndefinedBound, FairbreakError):
            continue
        res.record(tol - abs(rec.z0_tv - rec.z0_bound), f"instance {j}: z=0 equality")
        res.record(rec.z1_tv - rec.z1_bound + tol, f"instance {j}: z=1 inequality")
        res.checked += 1
    return res


def random_mixture(rng, max_components: int = 3) -> GaussianMixture:
    k = int(rng.integers(1, max_components + 1))
    w = rng.random(k) + 0.1
    means = rng.uniform(-3, 3, size=(k, 2))
    covs = []
    for _ in range(k):
        A = rng.normal(size=(2, 2))
        covs.append(A @ A.T + 0.1 * np.eye(2))
    return GaussianMixture(tuple(w / w.sum()), tuple(map(tuple, means)), tuple(map(tuple, np.array(covs))))


def fair_boundary_suite(n: int = 100, seed: int = 0, tol: float = 1e-8, mc_samples: int = 1_000_000) -> SuiteResult:
    """Fair boundary search: residual, Monte-Carlo agreement, antipodes, distinctness."""
    res = SuiteResult("fair boundaries through anchors")
    rng = np.random.default_rng(seed)
    for i in range(n):
        g0, g1 = random_mixture(rng), random_mixture(rng)
        anchors = rng.uniform(-2, 2, size=(2, 2))
        found = [find_fair_direction(g0, g1, a, tol) for a in anchors]
        for r in found:
            res.record(tol - abs(r.residual), f"pair {i}: residual {r.residual}")
        r = found[0]
        for g in (g0, g1):
            anti = halfplane_prob(g, r.theta, r.anchor) + halfplane_prob(g, r.theta + math.pi, r.anchor)
            res.record(1e-12 - abs(anti - 1.0), f"pair {i}: antipodal sum {anti}")
        exact = halfplane_prob(g0, r.theta, r.anchor)
        X = g0.sample(mc_samples, rng)
        est = float(np.mean(r.classifier().predict(X)))
        se = math.sqrt(max(exact * (1 - exact), 1e-300) / mc_samples)
        res.record(3 * se - abs(est - exact), f"pair {i}: Monte-Carlo {est} vs {exact}")
        # the second anchor's boundary must differ from the first one
        u = np.array([math.cos(r.theta), math.sin(r.theta)])
        off = abs(float(u @ (np.asarray(found[1].anchor) - np.asarray(r.anchor))))
        same_dir = abs(math.sin(found[1].theta - r.theta)) < 1e-12
        res.require(off > 1e-9 or not same_dir, f"pair {i}: anchors gave one line")
        res.checked += 1
    return res


SUITES = {
    "formula-equivalence": formula_equivalence,
    "fair-construction": fair_construction,
    "lower-bound-sandwich": lower_bound_sandwich,
    "bayes-tightness": bayes_tightness,
    "two-stage": two_stage,
    "zflip-empirical": zflip_empirical,
    "per-group-tv": per_group_tv,
    "fair-boundary": fair_boundary_suite,
}


def run_all(names=None, seed: int = 0) -> list[SuiteResult]:
    out = []
    for name in names or SUITES:
        out.append(SUITES[name](seed=seed))
    return out
