"""Comparison estimators: zero replacement and its rank truncation."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .compositional import DEFAULT_PSEUDOCOUNT, as_counts, clr, zero_replace
from .errors import ConfigError
from .likelihood import objective
from .solver import Estimate


class BaselineTag(enum.Enum):
    ZERO_REPLACEMENT = "zr"
    TRUNCATED_SVT = "svt"


@dataclass(frozen=True)
class BaselineKind:
    tag: BaselineTag
    rank: Optional[int] = None

    def __post_init__(self):
        if self.tag is BaselineTag.TRUNCATED_SVT and (self.rank is None or self.rank < 1):
            raise ConfigError("truncated SVT baseline needs rank >= 1")


def zr_estimate(w, a: float = DEFAULT_PSEUDOCOUNT) -> Estimate:
    """CLR of the zero-replaced proportions."""
    w = as_counts(w)
    z = clr(zero_replace(w, a))
    s = np.linalg.svd(z, compute_uv=False)
    return Estimate(z, objective(z, w, 0.0, singular_values=s), s)


def svt_estimate(w, rank: int, a: float = DEFAULT_PSEUDOCOUNT) -> Estimate:
    """Best rank-``rank`` approximation of :func:`zr_estimate`."""
    w = as_counts(w)
    if not 1 <= rank <= min(w.shape):
        raise ConfigError(f"rank must lie in [1, {min(w.shape)}], got {rank}")
    z = clr(zero_replace(w, a))
    u, s, vt = np.linalg.svd(z, full_matrices=False)
    if rank < s.size:
        s = s.copy()
        s[rank:] = 0.0
        z = (u[:, :rank] * s[:rank]) @ vt[:rank]
    return Estimate(z, objective(z, w, 0.0, singular_values=s), s)


def baseline_estimate(w, kind: BaselineKind) -> Estimate:
    if kind.tag is BaselineTag.ZERO_REPLACEMENT:
        return zr_estimate(w)
    return svt_estimate(w, kind.rank)
