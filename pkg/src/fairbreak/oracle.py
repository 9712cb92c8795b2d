"""Brute-force verifiers for tiny instances.

``brute_force_min_tv`` searches a grid of label reallocations for the
cheapest flip that makes a classifier (approximately) fair. It knows nothing
about the case split or the closed-form cost, so it serves as an independent
check of both. ``exhaustive_gap_recheck`` recomputes every fairness
conditional with explicit loops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import LabeledDataset
from .distributions import DiscreteJointDistribution, tv_distance
from .errors import InstanceTooLarge, UndefinedGap
from .metrics import EO, FairnessCriterion, fairness_gap, predictions

MAX_POINTS = 4
MAX_REGION_OPTIONS = 5_000_000
MAX_PAIRS = 60_000_000
LOCAL_DECADES = 6
MAX_MOVES = 500
_CHUNK = 1 << 20


@dataclass(frozen=True)
class OracleResult:
    best_tv: float
    best_distribution: DiscreteJointDistribution
    grid_step: float
    feasible: bool


def _grid_fractions(n_steps: int, criterion) -> np.ndarray:
    """All grid fractions of a point's total: pairs summing to <= 1 for EO."""
    if criterion is EO:
        j, k = np.meshgrid(np.arange(n_steps + 1), np.arange(n_steps + 1), indexing="ij")
        keep = (j + k) <= n_steps
        return np.stack([j[keep], k[keep]], axis=1) / n_steps
    return (np.arange(n_steps + 1) / n_steps)[:, None]


def _local_fractions(center: np.ndarray, radius: float, last_move: np.ndarray) -> np.ndarray:
    """Fractions near ``center`` at log-spaced offsets down to ``radius * 1e-6``,
    plus extrapolations of the previous move.

    Mixing scales lets one move combine a coarse step along one axis with a
    fine correction along another, which thin fair regions require; the
    extrapolated points let long straight descents take few moves.
    """
    scales = radius * 10.0 ** -np.arange(LOCAL_DECADES)
    steps = np.outer(scales, (1.0, 2.0, 5.0)).ravel()
    offsets = np.concatenate([[0.0], steps, -steps])
    axes = [np.clip(c + offsets, 0.0, 1.0) for c in center]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, center.size)
    ahead = center + np.outer(2.0 ** np.arange(8), last_move)
    pts = np.unique(np.vstack([pts, ahead]), axis=0)
    pts = pts[(pts >= 0.0).all(axis=1) & (pts <= 1.0).all(axis=1)]
    return pts[pts.sum(axis=1) <= 1.0 + 1e-15]


def _point_options(m: np.ndarray, fractions: np.ndarray, criterion):
    """Options for one support point at the given fractions of its total.

    Returns ``(u, cost, fractions)``: ``u[:, z]`` is the new mass of the
    conditioning event (Y=1 for EO, everything for DP) in group z and
    ``cost`` the least TV contribution of any flip reaching it.
    """
    total = m.sum()
    if criterion is EO:
        a, b = total * fractions[:, 0], total * fractions[:, 1]
        y0_old = m[0, 0] + m[0, 1]
        y0_new = total - a - b
        # Y=0 cells can absorb any change in their total at cost |change|
        cost = 0.5 * (np.abs(a - m[1, 0]) + np.abs(b - m[1, 1]) + np.abs(y0_new - y0_old))
        return np.stack([a, b], axis=1), cost, fractions
    c0 = total * fractions[:, 0]
    cost = np.abs(c0 - m[:, 0].sum())
    return np.stack([c0, total - c0], axis=1), cost, fractions


def _region_options(options: list):
    """Cartesian sum of per-point options; rows enumerate in lexicographic order."""
    u = np.zeros((1, 2))
    cost = np.zeros(1)
    picks = np.zeros((1, 0), dtype=np.int64)
    for pu, pc, _ in options:
        n = u.shape[0] * pu.shape[0]
        if n > MAX_REGION_OPTIONS:
            raise InstanceTooLarge(f"{n} options in one prediction region")
        u = (u[:, None, :] + pu[None, :, :]).reshape(-1, 2)
        cost = (cost[:, None] + pc[None, :]).reshape(-1)
        left = np.repeat(picks, pu.shape[0], axis=0)
        right = np.tile(np.arange(pu.shape[0]), picks.shape[0])[:, None]
        picks = np.hstack([left, right])
    return u, cost, picks


def _pair_gaps(u0: np.ndarray, u1: np.ndarray) -> np.ndarray:
    """Gap for every pairing of an h=0 option (rows) with an h=1 option (cols)."""
    p, r = u0[:, 0:1], u0[:, 1:2]
    q, s = u1[None, :, 0], u1[None, :, 1]
    g0, g1 = p + q, r + s
    with np.errstate(divide="ignore", invalid="ignore"):
        pooled = (q + s) / (g0 + g1)
        gap = np.maximum(np.abs(q / g0 - pooled), np.abs(s / g1 - pooled))
    # an empty group leaves the gap undefined, which never counts as fair
    return np.where((g0 > 0) & (g1 > 0), gap, np.inf)


def _rebuild(d: DiscreteJointDistribution, point_choices: dict, criterion):
    mass = np.array(d.mass)
    for i, choice in point_choices.items():
        m = d.mass[i]
        total = m.sum()
        if criterion is EO:
            a, b = total * choice[0], total * choice[1]
            y0_old = m[0].sum()
            y0_new = max(total - a - b, 0.0)
            if y0_old > 0 and y0_new <= y0_old:
                y0 = m[0] * (y0_new / y0_old)
            elif y0_old > 0:
                y0 = m[0] + 0.5 * (y0_new - y0_old)
            else:
                y0 = np.full(2, 0.5 * y0_new)
            mass[i] = [[y0[0], y0[1]], [a, b]]
        else:
            c0 = total * choice[0]
            z0_old = m[:, 0].sum()
            new = np.array(m)
            if c0 <= z0_old:
                moved = m[:, 0] * (1.0 - c0 / z0_old) if z0_old > 0 else np.zeros(2)
                new[:, 0] -= moved
                new[:, 1] += moved
            else:
                z1_old = m[:, 1].sum()
                moved = m[:, 1] * ((c0 - z0_old) / z1_old)
                new[:, 1] -= moved
                new[:, 0] += moved
            mass[i] = new
    np.clip(mass, 0.0, None, out=mass)
    # cells are fractions of each point total; renormalize rounding only
    return d.with_mass(mass / mass.sum())


def _gap_or_inf(h, d, criterion) -> float:
    try:
        return fairness_gap(h, d, criterion)
    except UndefinedGap:
        return np.inf


def brute_force_min_tv(
    d: DiscreteJointDistribution,
    h,
    grid_step: float = 0.01,
    gap_tol: float | None = None,
    criterion=EO,
) -> OracleResult:
    """Least-TV grid flip making ``fairness_gap(h, .) <= gap_tol``.

    Each support point keeps its total mass; the new mass of the
    conditioning event per group is searched on a grid of ``grid_step``
    times the point total, then refined by a pattern search around the
    best coarse point. Ties go to the lexicographically first grid index.
    """
    criterion = FairnessCriterion.parse(criterion)
    if not 0.0 < grid_step <= 0.1:
        raise ValueError("grid_step must lie in (0, 0.1]")
    if d.n_points > MAX_POINTS:
        raise InstanceTooLarge(f"{d.n_points} support points; at most {MAX_POINTS}")
    if gap_tol is None:
        gap_tol = grid_step / 2
    if _gap_or_inf(h, d, criterion) <= gap_tol:
        return OracleResult(0.0, d, grid_step, True)
    n_steps = int(round(1.0 / grid_step))
    pred = predictions(h, d)
    regions = [[int(i) for i in np.flatnonzero(pred == value)] for value in (0, 1)]
    coarse = _grid_fractions(n_steps, criterion)
    found = _search(d, regions, {i: coarse for i in range(d.n_points)}, gap_tol, criterion)
    if found is None:
        return OracleResult(np.inf, d, grid_step, False)
    # pattern search: recenter while the multi-scale neighborhood improves
    moves = {i: np.zeros_like(f) for i, f in found[1].items()}
    for _ in range(MAX_MOVES):
        local = {i: _local_fractions(f, grid_step, moves[i]) for i, f in found[1].items()}
        try:
            finer = _search(d, regions, local, gap_tol, criterion)
        except InstanceTooLarge:
            break
        if finer is None or finer[0] >= found[0]:
            break
        moves = {i: finer[1][i] - found[1][i] for i in found[1]}
        found = finer
    fair = _rebuild(d, found[1], criterion)
    return OracleResult(tv_distance(d, fair), fair, grid_step, True)


def _search(d, regions, fractions: dict, gap_tol: float, criterion):
    """``(cost, fractions per point)`` of the cheapest fair pairing, or None."""
    built = []
    for pts in regions:
        opts = [_point_options(d.mass[i], fractions[i], criterion) for i in pts]
        built.append((pts, opts, *_region_options(opts)))
    (pts0, opts0, u0, c0, k0), (pts1, opts1, u1, c1, k1) = built
    if u0.shape[0] * u1.shape[0] > MAX_PAIRS:
        raise InstanceTooLarge(f"{u0.shape[0] * u1.shape[0]} option pairs")
    best = (np.inf, -1, -1)
    rows = max(1, _CHUNK // u1.shape[0])
    for start in range(0, u0.shape[0], rows):
        stop = min(start + rows, u0.shape[0])
        gap = _pair_gaps(u0[start:stop], u1)
        cost = np.where(gap <= gap_tol, c0[start:stop, None] + c1[None, :], np.inf)
        flat = int(np.argmin(cost))
        if cost.flat[flat] < best[0]:
            best = (cost.flat[flat], start + flat // u1.shape[0], flat % u1.shape[0])
    if not np.isfinite(best[0]):
        return None
    choices = {}
    for pts, opts, picks, row in ((pts0, opts0, k0, best[1]), (pts1, opts1, k1, best[2])):
        for slot, i in enumerate(pts):
            choices[i] = opts[slot][2][picks[row, slot]]
    return float(best[0]), choices


@dataclass(frozen=True)
class ConditionalRecord:
    """Every conditional positive rate, ``None`` where the event has no mass.

    ``by_z[z]`` is Pr(h=1 | Z=z), ``by_yz[y][z]`` is Pr(h=1 | Y=y, Z=z),
    ``by_y[y]`` is Pr(h=1 | Y=y) and ``overall`` is Pr(h=1).
    """

    by_z: tuple
    by_yz: tuple
    by_y: tuple
    overall: float | None
    eo_gap: float | None
    dp_gap: float | None
    eodds_gap: float | None


def _ratio(num: float, den: float):
    return num / den if den > 0 else None


def _max_dev(rates, pooled):
    if pooled is None or any(r is None for r in rates):
        return None
    return max(abs(r - pooled) for r in rates)


def exhaustive_gap_recheck(d, h) -> ConditionalRecord:
    """Recompute all conditionals with plain loops over points or samples."""
    pos = [[0.0, 0.0], [0.0, 0.0]]  # mass with h=1 per (y, z)
    tot = [[0.0, 0.0], [0.0, 0.0]]
    if isinstance(d, DiscreteJointDistribution):
        for i in range(d.n_points):
            label = int(h.predict(d.coords[i : i + 1])[0])
            for y in (0, 1):
                for z in (0, 1):
                    w = float(d.mass[i, y, z])
                    tot[y][z] += w
                    if label == 1:
                        pos[y][z] += w
    else:
        for x, y, z in zip(d.X, d.y, d.z):
            label = int(h.predict(x[None, :])[0])
            tot[y][z] += 1
            if label == 1:
                pos[y][z] += 1
    by_yz = tuple(tuple(_ratio(pos[y][z], tot[y][z]) for z in (0, 1)) for y in (0, 1))
    by_y = tuple(_ratio(pos[y][0] + pos[y][1], tot[y][0] + tot[y][1]) for y in (0, 1))
    by_z = tuple(_ratio(pos[0][z] + pos[1][z], tot[0][z] + tot[1][z]) for z in (0, 1))
    overall = _ratio(sum(map(sum, pos)), sum(map(sum, tot)))
    eo = _max_dev(by_yz[1], by_y[1])
    dp = _max_dev(by_z, overall)
    per_y = [_max_dev(by_yz[y], by_y[y]) for y in (0, 1)]
    eodds = None if any(v is None for v in per_y) else max(per_y)
    return ConditionalRecord(by_z, by_yz, by_y, overall, eo, dp, eodds)
