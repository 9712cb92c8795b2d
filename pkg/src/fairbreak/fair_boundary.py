"""Perfectly fair linear boundaries through a chosen anchor point (d = 2).

For group conditionals with densities, the probability that the half-plane
``{x : (x - a) . u(theta) >= 0}`` is labeled positive varies continuously in
``theta``. Turning the boundary by pi swaps the two half-planes, so the
difference ``H(theta) = F0(theta) - F1(theta)`` between two groups satisfies
``H(pi) = -H(0)`` and bisection on ``[0, pi]`` finds a root. Every anchor
gives its own fair classifier.

Group conditionals are Gaussian mixtures, for which half-plane masses have a
closed form through the standard normal CDF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .classifiers import LinearClassifier
from .errors import NoConvergence, SingularCovariance


@dataclass(frozen=True)
class GaussianMixture:
    """Weighted sum of bivariate Gaussians."""

    weights: tuple
    means: tuple
    covs: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        mu = np.asarray(self.means, dtype=np.float64)
        cov = np.asarray(self.covs, dtype=np.float64)
        k = w.size
        if w.ndim != 1 or k == 0 or mu.shape != (k, 2) or cov.shape != (k, 2, 2):
            raise ValueError("need k weights, k means of length 2 and k 2x2 covariances")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        for c in cov:
            if not np.allclose(c, c.T) or c[0, 0] <= 0 or np.linalg.det(c) <= 0:
                raise SingularCovariance("covariance must be symmetric positive definite")
        object.__setattr__(self, "weights", tuple(float(v) for v in w))
        object.__setattr__(self, "means", tuple(tuple(float(v) for v in m) for m in mu))
        object.__setattr__(self, "covs", tuple(tuple(tuple(float(v) for v in row) for row in c) for c in cov))

    @classmethod
    def single(cls, mean, cov) -> "GaussianMixture":
        return cls((1.0,), (tuple(mean),), (tuple(map(tuple, cov)),))

    def combine(self, other: "GaussianMixture", weight: float) -> "GaussianMixture":
        """``weight * self + (1 - weight) * other``.

        Mixing the Y=1 and Y=0 conditionals of a group this way gives the
        conditional of X given Z alone, as used for demographic parity.
        """
        if not 0.0 <= weight <= 1.0:
            raise ValueError("weight must lie in [0, 1]")
        ws = [weight * w for w in self.weights] + [(1.0 - weight) * w for w in other.weights]
        total = sum(ws)
        return GaussianMixture(
            tuple(w / total for w in ws), self.means + other.means, self.covs + other.covs
        )

    def sample(self, n: int, rng) -> np.ndarray:
        comp = rng.choice(len(self.weights), size=n, p=np.asarray(self.weights))
        out = np.empty((n, 2))
        for k, (mu, cov) in enumerate(zip(self.means, self.covs)):
            idx = np.flatnonzero(comp == k)
            L = np.linalg.cholesky(np.asarray(cov))
            out[idx] = np.asarray(mu) + rng.standard_normal((idx.size, 2)) @ L.T
        return out


def direction(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def halfplane_prob(g: GaussianMixture, theta: float, anchor) -> float:
    """Pr((X - anchor) . u >= 0) for X ~ g, with u = (cos theta, sin theta)."""
    u = direction(theta)
    a = np.asarray(anchor, dtype=np.float64)
    total = 0.0
    for w, mu, cov in zip(g.weights, g.means, g.covs):
        var = float(u @ np.asarray(cov) @ u)
        if var <= 0:
            raise SingularCovariance("zero variance along the boundary normal")
        total += w * float(ndtr((np.asarray(mu) - a) @ u / math.sqrt(var)))
    return total


@dataclass(frozen=True)
class FairBoundaryResult:
    theta: float
    anchor: tuple
    residual: float

    def classifier(self) -> LinearClassifier:
        """The classifier predicting 1 iff (x - anchor) . u(theta) >= 0."""
        u = direction(self.theta)
        return LinearClassifier(tuple(u), -float(u @ np.asarray(self.anchor)))


def find_fair_direction(
    g0: GaussianMixture,
    g1: GaussianMixture,
    anchor,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> FairBoundaryResult:
    """Bisect H(theta) = F0(theta) - F1(theta) on [0, pi] until |H| <= tol.

    ``g0`` and ``g1`` are the feature conditionals of the two groups given
    Y=1 (equal opportunity) or given only Z (demographic parity).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    anchor = tuple(float(v) for v in anchor)

    def H(theta):
        return halfplane_prob(g0, theta, anchor) - halfplane_prob(g1, theta, anchor)

    lo, h_lo = 0.0, H(0.0)
    if h_lo == 0.0:
        return FairBoundaryResult(0.0, anchor, 0.0)
    if abs(h_lo) <= tol:
        return FairBoundaryResult(0.0, anchor, h_lo)
    # H(pi) = -H(0) exactly in exact arithmetic; use the identity, not a fresh evaluation
    hi = math.pi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break  # interval exhausted at float resolution
        h_mid = H(mid)
        if abs(h_mid) <= tol:
            return FairBoundaryResult(mid, anchor, h_mid)
        if (h_mid > 0) == (h_lo > 0):
            lo, h_lo = mid, h_mid
        else:
            hi = mid
    raise NoConvergence(f"|H| > {tol} after {max_iter} bisection steps")


def analytic_gap(h: LinearClassifier, g0: GaussianMixture, g1: GaussianMixture, w0: float) -> float:
    """Fairness gap of a 2-D linear classifier under Gaussian-mixture groups.

    ``w0`` is the probability of group 0 within the conditioning event.
    """
    w = np.asarray(h.weights, dtype=np.float64)
    norm = float(np.linalg.norm(w))
    theta = math.atan2(w[1], w[0])
    # any point on the boundary serves as anchor
    anchor = -h.bias * w / norm**2
    f0, f1 = halfplane_prob(g0, theta, anchor), halfplane_prob(g1, theta, anchor)
    pooled = w0 * f0 + (1.0 - w0) * f1
    return max(abs(f0 - pooled), abs(f1 - pooled))
