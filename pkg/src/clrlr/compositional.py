"""Transforms between counts, compositions and CLR coordinates.

Matrices are plain ``numpy`` arrays with one sample per row. Only the count
matrix gets its own container, because the row totals and grand total are
needed everywhere downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError, DomainError

#: Default pseudo-count used to floor zero reads.
DEFAULT_PSEUDOCOUNT = 0.5


@dataclass(frozen=True)
class CountMatrix:
    """Nonnegative integer read counts, ``n`` samples by ``p`` taxa."""

    values: np.ndarray
    row_totals: np.ndarray = field(init=False, repr=False)
    grand_total: int = field(init=False)

    def __post_init__(self):
        w = np.asarray(self.values)
        if w.ndim != 2:
            raise DimensionError(f"count matrix must be 2-D, got shape {w.shape}")
        n, p = w.shape
        if n < 1 or p < 2:
            raise DimensionError(f"need n >= 1 and p >= 2, got n={n}, p={p}")
        if not np.issubdtype(w.dtype, np.integer):
            if not np.all(np.isfinite(w)) or np.any(w != np.round(w)):
                bad = np.argwhere(~np.isfinite(w) | (w != np.round(w)))[0]
                raise DomainError(f"non-integer count at {tuple(int(i) for i in bad)}")
        w = w.astype(np.int64)
        if np.any(w < 0):
            bad = np.argwhere(w < 0)[0]
            raise DomainError(f"negative count at {tuple(int(i) for i in bad)}")
        w.setflags(write=False)
        totals = w.sum(axis=1)
        totals.setflags(write=False)
        object.__setattr__(self, "values", w)
        object.__setattr__(self, "row_totals", totals)
        object.__setattr__(self, "grand_total", int(totals.sum()))

    @property
    def shape(self):
        return self.values.shape

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]


def as_counts(w) -> CountMatrix:
    return w if isinstance(w, CountMatrix) else CountMatrix(np.asarray(w))


def _as_2d(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[np.newaxis, :]
    if x.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {x.shape}")
    return x


def clr(x) -> np.ndarray:
    """Centered log-ratio transform of a composition matrix.

    Parameters
    ----------
    x : array_like, shape (n, p) or (p,)
        Strictly positive rows. Rows are not required to sum to one since
        the transform is scale invariant.

    Returns
    -------
    z : ndarray, shape (n, p)
        ``log x`` minus its row mean; each row sums to zero.
    """
    x = _as_2d(x)
    if np.any(~(x > 0)):
        i, j = np.argwhere(~(x > 0))[0]
        raise DomainError(f"clr requires strictly positive entries; x[{i}, {j}] = {float(x[i, j])!r}")
    lx = np.log(x)
    return lx - lx.mean(axis=1, keepdims=True)


def log_softmax(z) -> np.ndarray:
    z = _as_2d(z)
    m = z.max(axis=1, keepdims=True)
    shifted = z - m
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def softmax_inv(z) -> np.ndarray:
    """Inverse CLR (row-wise softmax) with max-shifted exponentials.

    Parameters
    ----------
    z : array_like, shape (n, p) or (p,)
        Finite CLR coordinates. Zero row sums are not enforced because the
        softmax is invariant to per-row shifts.

    Returns
    -------
    x : ndarray, shape (n, p)
        Row-stochastic composition matrix.
    """
    z = _as_2d(z)
    if not np.all(np.isfinite(z)):
        i, j = np.argwhere(~np.isfinite(z))[0]
        raise DomainError(f"non-finite entry at ({i}, {j})")
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def softmax_jacobian(z_row) -> np.ndarray:
    """Jacobian ``diag(s) - s s^T`` of the softmax at a single row."""
    z_row = np.asarray(z_row, dtype=float)
    if z_row.ndim != 1:
        raise DimensionError("softmax_jacobian takes a single row vector")
    s = softmax_inv(z_row)[0]
    return np.diag(s) - np.outer(s, s)


def zero_replace(w, a: float = DEFAULT_PSEUDOCOUNT) -> np.ndarray:
    """Floor counts at ``a`` and normalise each row.

    Computes ``max(W_ij, a) / sum_j max(W_ij, a)``. Rows with no count
    below ``a`` are plain proportions; an all-zero row becomes uniform.
    """
    if not a > 0:
        raise ConfigError(f"pseudo-count must be positive, got {a!r}")
    w = as_counts(w)
    floored = np.maximum(w.values.astype(float), a)
    return floored / floored.sum(axis=1, keepdims=True)
