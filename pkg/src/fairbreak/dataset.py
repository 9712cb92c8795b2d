"""Finite labeled samples (x, y, z) and their CSV format."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, FormatError


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    X: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __init__(self, X, y, z):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        y = np.asarray(y, dtype=np.int8).reshape(-1)
        z = np.asarray(z, dtype=np.int8).reshape(-1)
        if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
            raise DimensionError("dataset must be nonempty with feature dimension >= 1")
        if y.shape[0] != X.shape[0] or z.shape[0] != X.shape[0]:
            raise DimensionError("X, y and z must have the same number of rows")
        if not (np.isin(y, (0, 1)).all() and np.isin(z, (0, 1)).all()):
            raise ValueError("y and z must be binary")
        for name, a in (("X", X), ("y", y), ("z", z)):
            a = a.copy()
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.X.shape[0]

    def replace(self, *, y=None, z=None) -> "LabeledDataset":
        return LabeledDataset(self.X, self.y if y is None else y, self.z if z is None else z)

    def subset(self, idx) -> "LabeledDataset":
        return LabeledDataset(self.X[idx], self.y[idx], self.z[idx])

    def concat(self, other: "LabeledDataset") -> "LabeledDataset":
        return LabeledDataset(
            np.vstack([self.X, other.X]),
            np.concatenate([self.y, other.y]),
            np.concatenate([self.z, other.z]),
        )

    def __eq__(self, other):
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return (
            np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.z, other.z)
        )

    __hash__ = None

    def __repr__(self):
        return f"LabeledDataset(m={len(self)}, dim={self.dim})"


def save_dataset_csv(d: LabeledDataset, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*(f"x{j + 1}" for j in range(d.dim)), "y", "z"])
        for x, y, z in zip(d.X, d.y, d.z):
            w.writerow([*map(repr, map(float, x)), int(y), int(z)])


def load_dataset_csv(path) -> LabeledDataset:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError("empty dataset file")
    header = [h.strip() for h in rows[0]]
    n = len(header) - 2
    if n < 1 or header != [*(f"x{j + 1}" for j in range(n)), "y", "z"]:
        raise FormatError(f"bad header {header}")
    body = [r for r in rows[1:] if r]
    if not body:
        raise FormatError("dataset has no samples")
    try:
        X = np.array([[float(v) for v in r[:n]] for r in body])
        y = np.array([int(r[n]) for r in body])
        z = np.array([int(r[n + 1]) for r in body])
        if any(len(r) != n + 2 for r in body):
            raise ValueError("wrong number of columns")
        return LabeledDataset(X, y, z)
    except (ValueError, IndexError, DimensionError) as exc:
        raise FormatError(f"malformed dataset: {exc}") from exc
