"""Accelerated proximal gradient solver for the nuclear-norm penalised fit.

Each start is initialised at the zero-replacement CLR estimate plus a
small centred perturbation. Iterations take a proximal step from the
extrapolated point ``Y``::

    Z_k = SVT(Y_{k-1} - grad(Y_{k-1}) / L_k, lam / L_k)
    Y_k = Z_k + (k - 1) / (k + rho - 1) * (Z_k - Z_{k-1})

with ``L_k`` grown by ``gamma_L`` until the quadratic model upper-bounds
the loss. Both the gradient and the thresholded SVD keep ``1_p`` in the
row null space, so iterates stay centred without projection.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from ._parallel import ordered_map
from .compositional import DEFAULT_PSEUDOCOUNT, as_counts, clr, zero_replace
from .errors import ConfigError, NumericError
from .likelihood import Objective, grad_neg_loglik, neg_loglik, objective

log = logging.getLogger(__name__)

RANK_RTOL = 1e-8
#: Iterations between attempts to shrink the curvature estimate.
L_DECREASE_PERIOD = 10
#: Backtracking gives up once L exceeds this bound.
L_MAX = 1e300


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters of the proximal gradient solver.

    ``lam`` is the nuclear-norm weight. ``rho`` is the friction in the
    momentum weight and must be at least 4.5.
    """

    lam: float = 0.0
    gamma_L: float = 1.5
    L0: float = 1.0
    rho: float = 5.0
    eps_gap: float = 1e-7
    max_iters: int = 10_000
    perturb_sigma: float = 1e-3
    n_starts: int = 4
    seed: int = 0
    pseudocount: float = DEFAULT_PSEUDOCOUNT

    def __post_init__(self):
        if not self.lam >= 0:
            raise ConfigError(f"lam must be >= 0, got {self.lam!r}")
        if not self.gamma_L > 1:
            raise ConfigError(f"gamma_L must exceed 1, got {self.gamma_L!r}")
        if not self.L0 > 0:
            raise ConfigError(f"L0 must be positive, got {self.L0!r}")
        if not self.rho >= 4.5:
            raise ConfigError(f"friction rho must be >= 4.5, got {self.rho!r}")
        if not self.eps_gap > 0:
            raise ConfigError(f"eps_gap must be positive, got {self.eps_gap!r}")
        if int(self.max_iters) < 1:
            raise ConfigError("max_iters must be >= 1")
        if not self.perturb_sigma >= 0:
            raise ConfigError("perturb_sigma must be >= 0")
        if int(self.n_starts) < 1:
            raise ConfigError("n_starts must be >= 1")
        if not self.pseudocount > 0:
            raise ConfigError("pseudocount must be positive")

    def with_lambda(self, lam: float) -> "SolverConfig":
        return replace(self, lam=float(lam))


@dataclass(frozen=True)
class IterRecord:
    iteration: int
    objective: float
    loss: float
    nuclear_norm: float
    L: float
    gap: float
    rank: int


@dataclass
class SolveTrace:
    records: list = field(default_factory=list)
    reason: str = ""
    start_index: int = 0

    @property
    def iterations(self) -> int:
        return len(self.records)


@dataclass
class Estimate:
    z_hat: np.ndarray
    objective: Objective
    singular_values: np.ndarray
    trace: Optional[SolveTrace] = None
    lam: float = 0.0

    @property
    def nuclear_norm(self) -> float:
        return float(self.singular_values.sum())

    @property
    def rank(self) -> int:
        return numerical_rank(self.singular_values)


def numerical_rank(singular_values, rtol: float = RANK_RTOL) -> int:
    s = np.asarray(singular_values)
    if s.size == 0 or s[0] <= 0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


def _svd(m):
    try:
        return np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        finite = bool(np.all(np.isfinite(m)))
        report = f"shape={m.shape}, finite={finite}"
        if finite:
            report += f", frobenius={np.linalg.norm(m):.6g}, max|m|={np.abs(m).max():.6g}"
        raise NumericError(f"SVD failed to converge ({report})") from exc


def svt_prox(m, tau: float, *, return_singular_values: bool = False):
    """Singular value soft-thresholding.

    Solves ``argmin_Z 0.5 * ||Z - m||_F^2 + tau * ||Z||_*``.

    Parameters
    ----------
    m : array_like, shape (n, p)
    tau : float
        Threshold, nonnegative.
    return_singular_values : bool
        Also return the (descending) singular values of the result.
    """
    if not tau >= 0:
        raise ConfigError(f"threshold must be >= 0, got {tau!r}")
    m = np.asarray(m, dtype=float)
    if tau == 0:
        out = m.copy()
        if return_singular_values:
            return out, np.linalg.svd(m, compute_uv=False)
        return out
    u, s, vt = _svd(m)
    s = np.maximum(s - tau, 0.0)
    keep = np.count_nonzero(s)
    out = (u[:, :keep] * s[:keep]) @ vt[:keep]
    if return_singular_values:
        return out, s
    return out


def _start_rng(seed: int, start_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), int(start_index)]))


def initialize(w, cfg: SolverConfig, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Zero-replacement CLR estimate plus a centred Gaussian perturbation."""
    w = as_counts(w)
    z0 = clr(zero_replace(w, cfg.pseudocount))
    if cfg.perturb_sigma == 0:
        return z0
    if rng is None:
        rng = _start_rng(cfg.seed, 0)
    noise = rng.normal(0.0, cfg.perturb_sigma, size=z0.shape)
    return z0 + (noise - noise.mean(axis=1, keepdims=True))


def _run_start(w, cfg: SolverConfig, z0: np.ndarray, start_index: int, callback=None) -> Estimate:
    lam = cfg.lam
    trace = SolveTrace(start_index=start_index)

    s0 = np.linalg.svd(z0, compute_uv=False)
    best = Estimate(z0, objective(z0, w, lam, singular_values=s0), s0, trace, lam)

    z_prev = z0
    y = z0
    L = cfg.L0
    for k in range(1, cfg.max_iters + 1):
        if k % L_DECREASE_PERIOD == 0:
            L = L / cfg.gamma_L
        f_y = neg_loglik(y, w)
        g_y = grad_neg_loglik(y, w)
        while True:
            z, s = svt_prox(y - g_y / L, lam / L, return_singular_values=True)
            d = z - y
            gap = neg_loglik(z, w) - f_y - np.sum(d * g_y) - 0.5 * L * np.sum(d * d)
            if gap <= 0:
                break
            if not np.isfinite(gap):
                trace.reason = "numeric-error"
                raise NumericError(f"non-finite line-search gap at iteration {k}", trace)
            L *= cfg.gamma_L
            if L > L_MAX:
                trace.reason = "numeric-error"
                raise NumericError(f"line search diverged at iteration {k} (L={L:.3g})", trace)

        obj = objective(z, w, lam, singular_values=s)
        if not np.isfinite(obj.total):
            trace.reason = "numeric-error"
            raise NumericError(f"non-finite objective at iteration {k}", trace)
        trace.records.append(
            IterRecord(k, obj.total, obj.loss, float(s.sum()), float(L), float(gap), numerical_rank(s))
        )
        if callback is not None:
            callback(k, z)
        if obj.total <= best.objective.total:
            best = Estimate(z, obj, s, trace, lam)

        y = z + (k - 1) / (k + cfg.rho - 1) * (z - z_prev)
        z_prev = z
        if abs(gap) <= cfg.eps_gap:
            trace.reason = "gap-converged"
            break
    else:
        trace.reason = "max-iters"
    return best


def solve(w, cfg: SolverConfig, *, callback: Optional[Callable[[int, np.ndarray], None]] = None,
          threads: Optional[int] = None) -> Estimate:
    """Fit the nuclear-norm penalised multinomial model at a fixed ``lam``.

    Runs ``cfg.n_starts`` perturbed starts and keeps the one with the
    lowest penalised objective (ties go to the lower start index). The
    returned iterate is the best one seen along the winning path, so its
    objective never exceeds that of its starting point.

    Parameters
    ----------
    w : CountMatrix or array_like
    cfg : SolverConfig
    callback : callable, optional
        Called as ``callback(k, z)`` after every accepted step. Passing a
        callback forces the starts to run sequentially.
    threads : int, optional
        Worker threads for the starts; defaults to ``CLRLR_THREADS``.

    Raises
    ------
    NumericError
        If the objective or line search becomes non-finite.
    """
    w = as_counts(w)

    def run(index):
        if cfg.n_starts == 1 and cfg.perturb_sigma == 0:
            z0 = initialize(w, cfg)
        else:
            z0 = initialize(w, cfg, _start_rng(cfg.seed, index))
        return _run_start(w, cfg, z0, index, callback)

    results = ordered_map(run, range(cfg.n_starts), threads=1 if callback is not None else threads)
    winner = min(results, key=lambda e: (e.objective.total, e.trace.start_index))
    log.debug("lam=%g: start %d won after %d iterations (%s)", cfg.lam,
              winner.trace.start_index, winner.trace.iterations, winner.trace.reason)
    return winner
