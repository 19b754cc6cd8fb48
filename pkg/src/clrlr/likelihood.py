"""Scaled negative multinomial log-likelihood in CLR coordinates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compositional import as_counts, softmax_inv
from .errors import ConfigError, DimensionError


@dataclass(frozen=True)
class Objective:
    loss: float
    penalty: float
    total: float


def _check_shapes(z, w):
    z = np.asarray(z, dtype=float)
    if z.shape != w.shape:
        raise DimensionError(f"Z has shape {z.shape} but W has shape {w.shape}")
    return z


def _logsumexp_rows(z):
    m = z.max(axis=1)
    return m + np.log(np.exp(z - m[:, None]).sum(axis=1))


def neg_loglik(z, w) -> float:
    r"""Negative log-likelihood averaged over all reads.

    .. math::
       \frac{1}{N} \sum_i \Big[ N_i \log \sum_j e^{z_{ij}} - \sum_j W_{ij} z_{ij} \Big]

    Accepts any real matrix; each row may be shifted by a constant
    without changing the value.
    """
    w = as_counts(w)
    z = _check_shapes(z, w)
    per_row = w.row_totals * _logsumexp_rows(z) - (w.values * z).sum(axis=1)
    return float(per_row.sum() / w.grand_total)


def grad_neg_loglik(z, w) -> np.ndarray:
    """Gradient of :func:`neg_loglik`; every row sums to zero."""
    w = as_counts(w)
    z = _check_shapes(z, w)
    g = w.row_totals[:, None] * softmax_inv(z) - w.values
    return g / w.grand_total


def line_search_gap(z_new, y_old, w, L: float, *, f_y=None, grad_y=None) -> float:
    """Error of the quadratic model with curvature ``L`` around ``y_old``.

    Nonpositive values mean the step to ``z_new`` is acceptable. ``f_y``
    and ``grad_y`` may be passed to avoid recomputation inside a
    backtracking loop.
    """
    if not L > 0:
        raise ConfigError(f"L must be positive, got {L!r}")
    w = as_counts(w)
    z_new = _check_shapes(z_new, w)
    y_old = _check_shapes(y_old, w)
    if f_y is None:
        f_y = neg_loglik(y_old, w)
    if grad_y is None:
        grad_y = grad_neg_loglik(y_old, w)
    d = z_new - y_old
    return float(neg_loglik(z_new, w) - f_y - np.sum(d * grad_y) - 0.5 * L * np.sum(d * d))


def nuclear_norm(z) -> float:
    return float(np.linalg.svd(np.asarray(z, dtype=float), compute_uv=False).sum())


def objective(z, w, lam: float, *, singular_values=None) -> Objective:
    loss = neg_loglik(z, w)
    nuc = float(np.sum(singular_values)) if singular_values is not None else nuclear_norm(z)
    penalty = lam * nuc
    return Objective(loss=loss, penalty=penalty, total=loss + penalty)
