"""The attack-versus-learner comparison on synthetic two-Gaussian data.

For each seed: generate data, train the attacker's target (unconstrained
logistic regression on the clean training split), poison the training split
with each attack, fit every learner on each training set, and score accuracy
and the fairness gap on the clean test split. Random baselines flip as many
samples as the Z-flip attack does for the same seed.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .datagen import SyntheticConfig, generate_synthetic
from .empirical_attack import random_flip_attack, z_flip_attack
from .errors import FormatError
from .learners import (
    FermConfig,
    ftrm_threshold_exact,
    train_erm,
    train_ferm_penalized,
    train_ferm_relaxed,
)
from .metrics import EO, FairnessCriterion, fairness_gap, risk

ATTACKS = ("none", "zflip", "randY", "randZ", "randYZ")
LEARNERS = ("erm", "fc", "errtol", "ftrm-threshold")
DEFAULT_FC_PENALTY = 1.0
THREADS_ENV = "FAIRBREAK_THREADS"


@dataclass(frozen=True)
class ExperimentConfig:
    seeds: tuple = (0, 1, 2, 3, 4)
    attacks: tuple = ATTACKS
    learners: tuple = LEARNERS
    criterion: FairnessCriterion = EO
    fc_penalty: float = DEFAULT_FC_PENALTY
    data: SyntheticConfig = field(default_factory=SyntheticConfig)

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("need at least one seed")
        bad = set(self.attacks) - set(ATTACKS) | set(self.learners) - set(LEARNERS)
        if bad:
            raise ValueError(f"unknown attacks or learners: {sorted(bad)}")
        if self.fc_penalty < 0:
            raise ValueError("fc_penalty must be nonnegative")
        object.__setattr__(self, "criterion", FairnessCriterion.parse(self.criterion))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise FormatError(f"bad config: {exc}") from exc
        unknown = set(raw) - set(cls.__dataclass_fields__)
        if unknown:
            raise FormatError(f"unknown config fields {sorted(unknown)}")
        if "data" in raw:
            raw["data"] = SyntheticConfig.from_dict(raw["data"])
        for key in ("seeds", "attacks", "learners"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)


@dataclass(frozen=True)
class CellResult:
    seed: int
    attack: str
    learner: str
    accuracy: float
    gap: float
    poisoning_rate: float


def _fit(learner: str, train, cfg: ExperimentConfig, seed: int, delta: float):
    base = FermConfig(criterion=cfg.criterion, seed=seed)
    if learner == "erm":
        return train_erm(train, base)
    if learner == "fc":
        return train_ferm_penalized(train, replace(base, penalty_weight=cfg.fc_penalty))
    if learner == "errtol":
        return train_ferm_relaxed(train, replace(base, delta=delta))
    return ftrm_threshold_exact(train, delta, cfg.criterion)


def run_seed(cfg: ExperimentConfig, seed: int) -> list[CellResult]:
    train, test = generate_synthetic(replace(cfg.data, seed=seed))
    target = train_erm(train, FermConfig(seed=seed))
    zflip = z_flip_attack(train, target, rng_seed=seed, criterion=cfg.criterion)
    # the relaxed learners tolerate as much unfairness as the attack's budget
    delta = zflip.poisoning_rate
    out = []
    for attack in cfg.attacks:
        if attack == "none":
            poisoned, rate = train, 0.0
        elif attack == "zflip":
            poisoned, rate = zflip.poisoned, zflip.poisoning_rate
        else:
            rep = random_flip_attack(train, attack[4:], zflip.alpha, rng_seed=seed)
            poisoned, rate = rep.poisoned, rep.poisoning_rate
        for learner in cfg.learners:
            model = _fit(learner, poisoned, cfg, seed, delta)
            out.append(
                CellResult(
                    seed=seed,
                    attack=attack,
                    learner=learner,
                    accuracy=1.0 - risk(model, test),
                    gap=fairness_gap(model, test, cfg.criterion),
                    poisoning_rate=rate,
                )
            )
    return out


def worker_count(n_tasks: int) -> int:
    env = os.environ.get(THREADS_ENV)
    limit = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(limit, n_tasks))


def run_experiment(cfg: ExperimentConfig = ExperimentConfig()) -> list[CellResult]:
    """All per-seed results, ordered by seed regardless of completion order."""
    workers = worker_count(len(cfg.seeds))
    if workers == 1:
        chunks = [run_seed(cfg, s) for s in cfg.seeds]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run_seed, [cfg] * len(cfg.seeds), cfg.seeds))
    return [r for chunk in chunks for r in chunk]


@dataclass(frozen=True)
class SummaryRow:
    attack: str
    learner: str
    n_seeds: int
    acc_mean: float
    acc_std: float
    gap_mean: float
    gap_std: float
    rate_mean: float


def summarize(results: list[CellResult], cfg: ExperimentConfig) -> list[SummaryRow]:
    """Mean and population standard deviation over seeds per (attack, learner)."""
    rows = []
    for attack in cfg.attacks:
        for learner in cfg.learners:
            cell = [r for r in results if r.attack == attack and r.learner == learner]
            acc = np.array([r.accuracy for r in cell])
            gap = np.array([r.gap for r in cell])
            rate = np.array([r.poisoning_rate for r in cell])
            rows.append(
                SummaryRow(attack, learner, len(cell), float(acc.mean()), float(acc.std()),
                           float(gap.mean()), float(gap.std()), float(rate.mean()))
            )
    return rows


def table_csv(rows: list[SummaryRow]) -> str:
    buf = io.StringIO()
    names = list(SummaryRow.__dataclass_fields__)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for row in rows:
        w.writerow([f"{v:.6f}" if isinstance(v, float) else v for v in asdict(row).values()])
    return buf.getvalue()


def table_text(rows: list[SummaryRow], cfg: ExperimentConfig) -> str:
    header = ["attack", "learner", "accuracy", f"{cfg.criterion.value} gap", "poisoning rate"]
    body = [
        [r.attack, r.learner, f"{r.acc_mean:.3f} ± {r.acc_std:.3f}",
         f"{r.gap_mean:.3f} ± {r.gap_std:.3f}", f"{r.rate_mean:.4f}"]
        for r in rows
    ]
    widths = [max(len(line[i]) for line in [header, *body]) for i in range(len(header))]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [
        f"# seeds: {', '.join(map(str, cfg.seeds))}; n_samples: {cfg.data.n_samples}",
        f"# split: interleaved {cfg.data.train_fraction:.0%} train / rest test"
        " (the reference protocol does not state its split)",
        "# random baselines flip as many samples as zflip on the same seed",
        fmt.format(*header),
        fmt.format(*("-" * w for w in widths)),
        *(fmt.format(*line) for line in body),
    ]
    return "\n".join(lines) + "\n"
