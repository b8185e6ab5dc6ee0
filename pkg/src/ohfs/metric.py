"""Distances, similarity kernel and edge sparsification.

Everything that turns raw feature vectors into graph edge weights lives here:
the weighted L2 norm, the light-corrected image distance (minimum over the
raw, mean-subtracted and mean-ratio differences), the Gaussian similarity
``exp(-d^2 / (2 sigma^2))`` and the epsilon threshold that sparsifies it.

All functions are pure; the Metric classes are stateless apart from their
weight vector and safe to share across threads.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .backend import kernels


class ZeroMeanWarning(UserWarning):
    """Raised when the mean-ratio branch is skipped for a zero-mean vector."""


@dataclass(frozen=True)
class KernelParams:
    """Heat parameter sigma and sparsification threshold epsilon."""

    sigma: float = 0.025
    epsilon: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not 0 <= self.epsilon < 1:
            raise ValueError(f"epsilon must be in [0, 1), got {self.epsilon}")


def _check_pair(x, y, psi):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if x.shape != y.shape or x.shape != psi.shape or x.ndim != 1:
        raise ValueError(
            f"dimension mismatch: x{x.shape}, y{y.shape}, psi{psi.shape}"
        )
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("feature vectors must be finite")
    if (psi < 0).any() or not (psi > 0).any():
        raise ValueError("weights must be non-negative with at least one positive")
    return x, y, psi


def weighted_l2(x, y, psi):
    """sqrt(sum_k psi_k (x_k - y_k)^2)."""
    x, y, psi = _check_pair(x, y, psi)
    diff = x - y
    return float(np.sqrt(np.dot(psi, diff * diff)))


def face_distance(x, y, psi):
    """Light-corrected distance between two images.

    Minimum of the weighted L2 norms of the raw difference, the
    mean-subtracted difference and the mean-ratio difference, which makes the
    distance invariant to additive and multiplicative lighting changes.  The
    ratio branch is excluded (with a ZeroMeanWarning) when either mean is
    zero, since the remaining branches still give a well-defined minimum.
    """
    x, y, psi = _check_pair(x, y, psi)
    diff = x - y
    best = np.dot(psi, diff * diff)
    mx = x.mean()
    my = y.mean()
    diff_c = diff - (mx - my)
    best = min(best, np.dot(psi, diff_c * diff_c))
    if mx == 0.0 or my == 0.0:
        warnings.warn(
            "zero-mean input: mean-ratio branch excluded", ZeroMeanWarning
        )
    else:
        diff_r = x / mx - y / my
        best = min(best, np.dot(psi, diff_r * diff_r))
    return float(np.sqrt(max(best, 0.0)))


def similarity(d, params):
    """Gaussian kernel exp(-d^2 / (2 sigma^2)); accepts scalars or arrays."""
    d = np.asarray(d, dtype=float)
    w = np.exp(-(d * d) / (2.0 * params.sigma**2))
    return w if w.ndim else float(w)


def sparsify(w, epsilon):
    """Zero out similarities strictly below epsilon."""
    w = np.asarray(w, dtype=float)
    out = np.where(w < epsilon, 0.0, w)
    return out if out.ndim else float(out)


def uniform_weights(dim):
    return np.ones(dim)


def radial_center_weights(side, rho=0.5):
    """Per-pixel weights for a side x side image, flattened row-major.

    Gaussian falloff exp(-r^2 / (2 rho^2)) with r the pixel's distance from
    the image center in units of the half-side, so center pixels weigh most.
    """
    if side < 1:
        raise ValueError("side must be >= 1")
    coords = np.arange(side, dtype=float)
    mid = (side - 1) / 2.0
    half = max(side / 2.0, 1.0)
    gy, gx = np.meshgrid(coords, coords, indexing="ij")
    r_sq = ((gy - mid) ** 2 + (gx - mid) ** 2) / half**2
    return np.exp(-r_sq / (2.0 * rho**2)).ravel()


class _WeightedMetric:
    """Common machinery for weighted-L2-based dissimilarities.

    Scalar calls compute explicit differences (exact zero for identical
    inputs); matrix paths go through the selected kernel backend.
    """

    correct_light = False

    def __init__(self, weights=None):
        self.weights = None if weights is None else np.ascontiguousarray(weights, dtype=float)
        if self.weights is not None and (
            (self.weights < 0).any() or not (self.weights > 0).any()
        ):
            raise ValueError("weights must be non-negative with at least one positive")

    def _psi(self, dim):
        if self.weights is None:
            return np.ones(dim)
        if self.weights.shape[0] != dim:
            raise ValueError(
                f"metric configured for dimension {self.weights.shape[0]}, got {dim}"
            )
        return self.weights

    def pairwise_sq(self, X, Y):
        X = np.ascontiguousarray(X, dtype=float)
        Y = np.ascontiguousarray(Y, dtype=float)
        return kernels.pairwise_sq_weighted(X, Y, self._psi(X.shape[1]), self.correct_light)

    def rowwise_sq(self, x, Y):
        x = np.ascontiguousarray(x, dtype=float)
        Y = np.ascontiguousarray(Y, dtype=float)
        return kernels.rowwise_sq_weighted(x, Y, self._psi(x.shape[0]), self.correct_light)

    def pairwise(self, X, Y):
        return np.sqrt(self.pairwise_sq(X, Y))

    def rowwise(self, x, Y):
        return np.sqrt(self.rowwise_sq(x, Y))


class EuclideanMetric(_WeightedMetric):
    """Plain (optionally weighted) L2 distance for generic feature streams."""

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        return weighted_l2(x, y, self._psi(x.shape[0]))


class FaceMetric(_WeightedMetric):
    """Light-corrected image distance.

    Not a true metric (the triangle inequality can fail across branches), but
    it is symmetric, non-negative and zero on identical inputs, which is all
    the quantizer and graph construction require.
    """

    correct_light = True

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        return face_distance(x, y, self._psi(x.shape[0]))

    @classmethod
    def for_image(cls, side, rho=0.5):
        return cls(radial_center_weights(side, rho))
