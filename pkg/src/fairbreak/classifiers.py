"""Deterministic binary classifiers h: R^n -> {0, 1}.

Every classifier exposes ``dim`` and ``predict(X)`` where ``X`` has shape
``(m, dim)``; predictions are returned as an ``int8`` array of zeros and ones.
Randomized classifiers are deliberately not supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Protocol, Sequence

import numpy as np

from .errors import DimensionError, FormatError


class Classifier(Protocol):
    dim: int

    def predict(self, X: np.ndarray) -> np.ndarray: ...


def _as_matrix(X, dim: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != dim:
        raise DimensionError(f"expected features of dimension {dim}, got shape {X.shape}")
    return X


@dataclass(frozen=True)
class LinearClassifier:
    """Predicts 1 iff ``weights . x + bias >= 0``."""

    weights: tuple[float, ...]
    bias: float

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def dim(self) -> int:
        return len(self.weights)

    def scores(self, X) -> np.ndarray:
        X = _as_matrix(X, self.dim)
        return X @ np.asarray(self.weights) + self.bias

    def predict(self, X) -> np.ndarray:
        return (self.scores(X) >= 0).astype(np.int8)


@dataclass(frozen=True)
class ThresholdClassifier:
    """Thresholds one coordinate (``feature``, default the first).

    ``direction="ge"`` predicts 1 iff ``x[feature] >= threshold``;
    ``direction="le"`` predicts 1 iff ``x[feature] <= threshold``.
    Infinite thresholds give the two constant classifiers.
    """

    threshold: float
    direction: str = "ge"
    dim: int = 1
    feature: int = 0

    def __post_init__(self):
        if self.direction not in ("ge", "le"):
            raise ValueError(f"direction must be 'ge' or 'le', got {self.direction!r}")
        if not 0 <= self.feature < self.dim:
            raise DimensionError("feature index out of range")

    def predict(self, X) -> np.ndarray:
        col = _as_matrix(X, self.dim)[:, self.feature]
        if self.direction == "ge":
            return (col >= self.threshold).astype(np.int8)
        return (col <= self.threshold).astype(np.int8)


@dataclass(frozen=True)
class LookupClassifier:
    """Finite enumeration: explicit labels for a set of feature points.

    Points not in the table get ``default``. Used for Bayes classifiers and
    exhaustive hypothesis sets over a finite support.
    """

    dim: int
    table: Mapping[tuple[float, ...], int] = field(default_factory=dict)
    default: int = 0

    @classmethod
    def from_points(cls, coords: np.ndarray, labels: Sequence[int], default: int = 0):
        coords = np.asarray(coords, dtype=np.float64)
        table = {tuple(map(float, c)): int(l) for c, l in zip(coords, labels)}
        return cls(dim=coords.shape[1], table=table, default=default)

    def predict(self, X) -> np.ndarray:
        X = _as_matrix(X, self.dim)
        return np.array(
            [self.table.get(tuple(map(float, row)), self.default) for row in X], dtype=np.int8
        )


def constant_classifier(dim: int, label: int) -> LinearClassifier:
    return LinearClassifier(weights=(0.0,) * dim, bias=0.0 if label else -1.0)


# --- model file format -------------------------------------------------------
# one line of `key=value` pairs separated by "; "


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def dumps_model(h) -> str:
    if isinstance(h, LinearClassifier):
        w = ",".join(_fmt(v) for v in h.weights)
        return f"weights={w}; bias={_fmt(h.bias)}\n"
    if isinstance(h, ThresholdClassifier):
        return (
            f"threshold={_fmt(h.threshold)}; direction={h.direction}; "
            f"dim={h.dim}; feature={h.feature}\n"
        )
    raise TypeError(f"cannot serialize {type(h).__name__}")


def loads_model(text: str):
    fields = {}
    for part in text.strip().split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise FormatError(f"bad model field {part!r}")
        key, value = part.split("=", 1)
        fields[key.strip()] = value.strip()
    try:
        if "weights" in fields:
            weights = tuple(float(v) for v in fields["weights"].split(","))
            return LinearClassifier(weights=weights, bias=float(fields["bias"]))
        if "threshold" in fields:
            return ThresholdClassifier(
                threshold=float(fields["threshold"]),
                direction=fields.get("direction", "ge"),
                dim=int(fields.get("dim", 1)),
                feature=int(fields.get("feature", 0)),
            )
    except (KeyError, ValueError) as exc:
        raise FormatError(f"malformed model: {exc}") from exc
    raise FormatError("model file has neither weights nor threshold")


def save_model(h, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_model(h))


def load_model(path):
    with open(path) as fh:
        return loads_model(fh.read())
