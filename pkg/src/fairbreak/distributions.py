"""Finite-support joint distributions over (X, Y, Z) and flip-attack arithmetic.

A distribution is a table of point masses ``mass[i, y, z]`` attached to
support points ``coords[i]``. Continuous densities are represented by
discretizing them; every attack construction in this package is a per-point
mass transport, so it carries over to point masses unchanged.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import FormatError, InvalidFraction, InvalidMass, SupportMismatch

MASS_TOL = 1e-12
LOAD_TOL = 1e-9


class FlipKind(enum.Enum):
    GENERAL = "general"
    PURE_Y = "pure_y"
    PURE_Z = "pure_z"
    PURE_YZ = "pure_yz"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=a.dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DiscreteJointDistribution:
    """Point masses over a finite support in R^dim times {0,1} x {0,1}.

    ``mass`` has shape ``(k, 2, 2)`` and is indexed ``[point, y, z]``.
    """

    ids: np.ndarray
    coords: np.ndarray
    mass: np.ndarray

    def __init__(self, coords, mass, ids=None, *, check: bool = True):
        coords = np.asarray(coords, dtype=np.float64)
        if coords.ndim == 1:
            coords = coords.reshape(-1, 1)
        mass = np.asarray(mass, dtype=np.float64)
        if ids is None:
            ids = np.arange(coords.shape[0])
        ids = np.asarray(ids, dtype=np.int64)
        if coords.ndim != 2 or coords.shape[1] < 1:
            raise InvalidMass("coords must have shape (k, n) with n >= 1")
        if mass.shape != (coords.shape[0], 2, 2):
            raise InvalidMass(f"mass must have shape ({coords.shape[0]}, 2, 2), got {mass.shape}")
        if ids.shape != (coords.shape[0],) or len(set(ids.tolist())) != len(ids):
            raise InvalidMass("ids must be unique, one per support point")
        if check:
            if np.any(mass < 0) or not np.all(np.isfinite(mass)):
                raise InvalidMass("masses must be finite and nonnegative")
            total = mass.sum()
            if abs(total - 1.0) > MASS_TOL:
                raise InvalidMass(f"total mass {total!r} differs from 1 by more than {MASS_TOL}")
        object.__setattr__(self, "ids", _frozen(ids))
        object.__setattr__(self, "coords", _frozen(coords))
        object.__setattr__(self, "mass", _frozen(mass))

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    @property
    def n_points(self) -> int:
        return self.coords.shape[0]

    def x_marginal(self) -> np.ndarray:
        return self.mass.sum(axis=(1, 2))

    def prob(self, y=None, z=None) -> float:
        m = self.mass
        if y is not None:
            m = m[:, y : y + 1, :]
        if z is not None:
            m = m[:, :, z : z + 1]
        return float(m.sum())

    def index_of(self, point_id) -> int:
        hits = np.flatnonzero(self.ids == point_id)
        if hits.size == 0:
            raise KeyError(f"no support point with id {point_id}")
        return int(hits[0])

    def with_mass(self, mass) -> "DiscreteJointDistribution":
        """Same support, new mass table."""
        return DiscreteJointDistribution(self.coords, mass, self.ids)

    def same_support(self, other: "DiscreteJointDistribution") -> bool:
        return (
            self.coords.shape == other.coords.shape
            and np.array_equal(self.ids, other.ids)
            and np.array_equal(self.coords, other.coords)
        )

    def __eq__(self, other):
        if not isinstance(other, DiscreteJointDistribution):
            return NotImplemented
        return self.same_support(other) and np.array_equal(self.mass, other.mass)

    __hash__ = None

    def __repr__(self):
        return f"DiscreteJointDistribution(n_points={self.n_points}, dim={self.dim})"


def _check_support(d1, d2):
    if not d1.same_support(d2):
        raise SupportMismatch("distributions must share support points (ids and coords)")


def tv_distance(d1: DiscreteJointDistribution, d2: DiscreteJointDistribution) -> float:
    _check_support(d1, d2)
    return 0.5 * float(np.abs(d1.mass - d2.mass).sum())


def flip_predicates(base, other) -> dict[FlipKind, float]:
    """Largest per-point violation of each flipping-attack identity."""
    _check_support(base, other)
    a, b = base.mass, other.mass
    diff = b - a
    return {
        FlipKind.GENERAL: float(np.abs(diff.sum(axis=(1, 2))).max()),
        # fixed z, summed over y
        FlipKind.PURE_Y: float(np.abs(diff.sum(axis=1)).max()),
        # fixed y, summed over z
        FlipKind.PURE_Z: float(np.abs(diff.sum(axis=2)).max()),
        FlipKind.PURE_YZ: float(
            max(
                np.abs(diff[:, 0, 0] + diff[:, 1, 1]).max(),
                np.abs(diff[:, 0, 1] + diff[:, 1, 0]).max(),
            )
        ),
    }


def classify_flip(base, other, tol: float = 1e-12) -> set[FlipKind]:
    """Every flipping-attack label that ``other`` satisfies relative to ``base``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return {kind for kind, err in flip_predicates(base, other).items() if err <= tol}


def apply_z_flip(base, point_id, y: int, z: int, fraction: float) -> DiscreteJointDistribution:
    """Move ``fraction`` of the mass at ``(point, y, z)`` to ``(point, y, 1 - z)``."""
    if not 0.0 <= fraction <= 1.0:
        raise InvalidFraction(f"fraction must lie in [0, 1], got {fraction}")
    i = base.index_of(point_id)
    mass = np.array(base.mass)
    moved = fraction * mass[i, y, z]
    mass[i, y, z] -= moved
    mass[i, y, 1 - z] += moved
    return base.with_mass(mass)


def apply_y_flip(base, point_id, y: int, z: int, fraction: float) -> DiscreteJointDistribution:
    """Move ``fraction`` of the mass at ``(point, y, z)`` to ``(point, 1 - y, z)``."""
    if not 0.0 <= fraction <= 1.0:
        raise InvalidFraction(f"fraction must lie in [0, 1], got {fraction}")
    i = base.index_of(point_id)
    mass = np.array(base.mass)
    moved = fraction * mass[i, y, z]
    mass[i, y, z] -= moved
    mass[i, 1 - y, z] += moved
    return base.with_mass(mass)


# quadrant holding the (y, z) square of the four-square example: k = 3 - y + z - 2yz
_QUADRANT_SIGN = {1: (1, 1), 2: (-1, 1), 3: (-1, -1), 4: (1, -1)}


def example1_distribution(grid_resolution: int) -> DiscreteJointDistribution:
    """Four uniform squares of side 1/2, one per (y, z), discretized at cell centers.

    The square for (y, z) sits against the origin in quadrant
    ``3 - y + z - 2yz``; each square carries total mass 1/4, split evenly
    over ``grid_resolution**2`` cells.
    """
    if grid_resolution < 1:
        raise ValueError("grid_resolution must be >= 1")
    n = grid_resolution
    centers = (np.arange(n) + 0.5) * (0.5 / n)
    coords, masses = [], []
    for y, z in product((0, 1), (0, 1)):
        sx, sy = _QUADRANT_SIGN[3 - y + z - 2 * y * z]
        for cx, cy in product(centers, centers):
            coords.append((sx * cx, sy * cy))
            m = np.zeros((2, 2))
            m[y, z] = 0.25 / (n * n)
            masses.append(m)
    return DiscreteJointDistribution(np.array(coords), np.array(masses))


# --- CSV ---------------------------------------------------------------------

_MASS_COLUMNS = ("m_y0z0", "m_y0z1", "m_y1z0", "m_y1z1")


def save_distribution_csv(d: DiscreteJointDistribution, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", *(f"x{j + 1}" for j in range(d.dim)), *_MASS_COLUMNS])
        for pid, c, m in zip(d.ids, d.coords, d.mass):
            w.writerow([int(pid), *map(repr, map(float, c)), *map(repr, map(float, m.reshape(-1)))])


def load_distribution_csv(path) -> DiscreteJointDistribution:
    """Read the ``id,x1..xn,m_y0z0,m_y0z1,m_y1z0,m_y1z1`` format.

    Totals outside 1 +/- 1e-9 are rejected; accepted tables are renormalized.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError("empty distribution file")
    header = [h.strip() for h in rows[0]]
    n = len(header) - 5
    expected = ["id", *(f"x{j + 1}" for j in range(n)), *_MASS_COLUMNS]
    if n < 1 or header != expected:
        raise FormatError(f"bad header {header}")
    try:
        ids = [int(r[0]) for r in rows[1:]]
        coords = np.array([[float(v) for v in r[1 : 1 + n]] for r in rows[1:]])
        mass = np.array([[float(v) for v in r[1 + n :]] for r in rows[1:]]).reshape(-1, 2, 2)
    except (ValueError, IndexError) as exc:
        raise FormatError(f"malformed row: {exc}") from exc
    if not ids:
        raise FormatError("distribution has no support points")
    total = mass.sum()
    if abs(total - 1.0) > LOAD_TOL:
        raise FormatError(f"total mass {total} outside 1 +/- {LOAD_TOL}")
    return DiscreteJointDistribution(coords.reshape(len(ids), n), mass / total, ids)
