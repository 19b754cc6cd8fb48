"""Estimation error metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compositional import log_softmax
from .errors import ConfigError, DimensionError, DomainError

ORTHONORMAL_TOL = 1e-6


@dataclass(frozen=True)
class SpectralSummary:
    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray


def _pair(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def frob_error(z_hat, z_star) -> float:
    """Squared Frobenius error divided by the number of rows."""
    z_hat, z_star = _pair(z_hat, z_star)
    d = z_hat - z_star
    return float(np.sum(d * d) / z_hat.shape[0])


def kl_rowwise(z_star, z_hat) -> float:
    """Mean over rows of KL(softmax(z_star) || softmax(z_hat))."""
    z_star, z_hat = _pair(z_star, z_hat)
    lp = log_softmax(z_star)
    lq = log_softmax(z_hat)
    kl = np.sum(np.exp(lp) * (lp - lq), axis=1)
    return float(np.maximum(kl, 0.0).mean())


def _check_orthonormal(v, name):
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        v = v[:, np.newaxis]
    k = v.shape[1]
    dev = np.abs(v.T @ v - np.eye(k)).max() if k else 0.0
    if dev > ORTHONORMAL_TOL:
        raise DomainError(f"{name} columns are not orthonormal (max deviation {dev:.3g})")
    return v


def sin_theta_sq(v_hat, v_star) -> float:
    """Squared Frobenius sin-theta distance between two column spaces.

    Uses ``k - ||v_hat^T v_star||_F^2``, which equals the sum of squared
    sines of the principal angles for orthonormal frames.
    """
    v_hat = _check_orthonormal(v_hat, "v_hat")
    v_star = _check_orthonormal(v_star, "v_star")
    if v_hat.shape != v_star.shape:
        raise DimensionError(f"shape mismatch: {v_hat.shape} vs {v_star.shape}")
    k = v_hat.shape[1]
    value = k - float(np.sum((v_hat.T @ v_star) ** 2))
    return min(max(value, 0.0), float(k))


def top_k_svd(z, k: int) -> SpectralSummary:
    """Leading ``k`` singular triplets with a deterministic sign.

    Each right vector is flipped so that its largest-magnitude entry is
    positive (first such entry on ties); the left vector follows.
    """
    z = np.asarray(z, dtype=float)
    if not 1 <= k <= min(z.shape):
        raise ConfigError(f"k must lie in [1, {min(z.shape)}], got {k}")
    u, s, vt = np.linalg.svd(z, full_matrices=False)
    u, s, v = u[:, :k].copy(), s[:k].copy(), vt[:k].T.copy()
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.where(v[idx, np.arange(k)] < 0, -1.0, 1.0)
    return SpectralSummary(s, u * signs, v * signs)
