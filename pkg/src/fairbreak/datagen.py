"""Seeded data generation.

Synthetic two-Gaussian data in the style of Zafar et al., where Z is drawn
from the posterior of the positive-class Gaussian at a rotated copy of x, and
small random discrete instances for property testing.

All randomness comes from ``numpy.random.default_rng`` (PCG64), seeded with
the configured integer, so outputs are reproducible across platforms.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .classifiers import LinearClassifier, ThresholdClassifier
from .dataset import LabeledDataset
from .distributions import DiscreteJointDistribution
from .errors import FormatError, SingularCovariance


@dataclass(frozen=True)
class SyntheticConfig:
    n_samples: int = 6000
    seed: int = 0
    mean1: tuple = (2.0, 2.0)
    cov1: tuple = ((5.0, 1.0), (1.0, 5.0))
    mean2: tuple = (-2.0, -2.0)
    cov2: tuple = ((10.0, 1.0), (1.0, 3.0))
    rotation: float = math.pi / 6
    # "row": x' = x R for row vectors x, as in the reference generator of
    # Zafar et al.; "column": x' = R x.
    rotation_convention: str = "row"
    train_fraction: float = 0.7

    def __post_init__(self):
        if self.n_samples < 2 or self.n_samples % 2:
            raise ValueError("n_samples must be even and >= 2")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.rotation_convention not in ("row", "column"):
            raise ValueError("rotation_convention must be 'row' or 'column'")

    @classmethod
    def from_json(cls, path) -> "SyntheticConfig":
        with open(path) as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise FormatError(f"bad config: {exc}") from exc
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "SyntheticConfig":
        if not isinstance(raw, dict):
            raise FormatError("config must be a JSON object")
        unknown = set(raw) - set(cls.__dataclass_fields__)
        if unknown:
            raise FormatError(f"unknown config fields {sorted(unknown)}")
        raw = dict(raw)
        for key in ("mean1", "mean2"):
            if key in raw:
                raw[key] = tuple(raw[key])
        for key in ("cov1", "cov2"):
            if key in raw:
                raw[key] = tuple(tuple(row) for row in raw[key])
        return cls(**raw)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def _cholesky(cov) -> np.ndarray:
    cov = np.asarray(cov, dtype=np.float64)
    if cov.shape != (2, 2) or not np.allclose(cov, cov.T):
        raise SingularCovariance("covariance must be a symmetric 2x2 matrix")
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise SingularCovariance("covariance is not positive definite") from exc


def gaussian_pdf(x: np.ndarray, mean, cov) -> np.ndarray:
    L = _cholesky(cov)
    diff = np.atleast_2d(x) - np.asarray(mean, dtype=np.float64)
    sol = np.linalg.solve(L, diff.T)
    log_det = 2.0 * np.log(np.diag(L)).sum()
    return np.exp(-0.5 * (sol**2).sum(axis=0) - 0.5 * log_det - math.log(2 * math.pi))


def rotation_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def interleaved_split(n: int, train_fraction: float) -> np.ndarray:
    """Boolean train mask spreading the train indices evenly over 0..n-1."""
    i = np.arange(n)
    return np.floor((i + 1) * train_fraction) > np.floor(i * train_fraction)


def generate_synthetic(cfg: SyntheticConfig = SyntheticConfig()):
    """Return ``(train, test)``; the first half of the samples has y=1."""
    rng = np.random.default_rng(cfg.seed)
    half = cfg.n_samples // 2
    L1, L2 = _cholesky(cfg.cov1), _cholesky(cfg.cov2)
    x_pos = np.asarray(cfg.mean1) + rng.standard_normal((half, 2)) @ L1.T
    x_neg = np.asarray(cfg.mean2) + rng.standard_normal((half, 2)) @ L2.T
    X = np.vstack([x_pos, x_neg])
    y = np.concatenate([np.ones(half, dtype=np.int8), np.zeros(half, dtype=np.int8)])
    R = rotation_matrix(cfg.rotation)
    X_rot = X @ R if cfg.rotation_convention == "row" else X @ R.T
    f1 = gaussian_pdf(X_rot, cfg.mean1, cfg.cov1)
    f2 = gaussian_pdf(X_rot, cfg.mean2, cfg.cov2)
    denom = f1 + f2
    # far tails underflow both densities; fall back to a fair coin there
    prob = np.divide(f1, denom, out=np.full_like(f1, 0.5), where=denom > 0)
    z = (rng.random(cfg.n_samples) < prob).astype(np.int8)
    train = interleaved_split(cfg.n_samples, cfg.train_fraction)
    data = LabeledDataset(X, y, z)
    return data.subset(train), data.subset(~train)


def random_discrete_instance(n_points: int, seed: int, dim: int = 2, min_mass: float = 0.0):
    """A random distribution with positive cell masses and a random classifier.

    The classifier is a random halfspace or a threshold on the first
    coordinate, placed between two projected support points so both labels
    occur whenever ``n_points >= 2``.
    """
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    rng = np.random.default_rng(seed)
    coords = rng.normal(size=(n_points, dim))
    mass = rng.random((n_points, 2, 2)) + min_mass
    mass /= mass.sum()
    d = DiscreteJointDistribution(coords, mass)
    if rng.random() < 0.5:
        w = rng.normal(size=dim)
        proj = np.sort(coords @ w)
        cut = _random_cut(proj, rng)
        h = LinearClassifier(tuple(w), -cut)
    else:
        proj = np.sort(coords[:, 0])
        h = ThresholdClassifier(_random_cut(proj, rng), "ge" if rng.random() < 0.5 else "le", dim=dim)
    return d, h


def _random_cut(sorted_vals: np.ndarray, rng) -> float:
    if sorted_vals.size == 1:
        return float(sorted_vals[0] + rng.choice([-1.0, 1.0]))
    j = rng.integers(0, sorted_vals.size - 1)
    return float(0.5 * (sorted_vals[j] + sorted_vals[j + 1]))
