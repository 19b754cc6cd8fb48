"""Data-driven selection of the nuclear-norm weight.

The search starts from ``lam = loss(Z0)`` at the unperturbed
zero-replacement estimate and tracks the balance criterion
``loss / nuc + nuc / loss`` of each penalised solution. An improvement
multiplies ``lam`` by ``gamma_lambda``; a worsening moves ``lam`` to the
geometric mean of itself and the best ``lam`` so far. The search stops
once consecutive criterion values agree to a relative ``eps_rel``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

from .compositional import as_counts
from .errors import ConfigError, DomainError
from .likelihood import neg_loglik, nuclear_norm
from .solver import Estimate, SolverConfig, initialize, solve

log = logging.getLogger(__name__)

#: Penalised solutions with a smaller nuclear norm count as the zero matrix.
ZERO_NUC_TOL = 1e-10


@dataclass(frozen=True)
class TuneConfig:
    max_rounds: int = 100
    eps_rel: float = 1e-3
    gamma_lambda: float = 1.5
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if not self.gamma_lambda > 1:
            raise ConfigError(f"gamma_lambda must exceed 1, got {self.gamma_lambda!r}")
        if not self.eps_rel > 0:
            raise ConfigError(f"eps_rel must be positive, got {self.eps_rel!r}")
        if int(self.max_rounds) < 1:
            raise ConfigError("max_rounds must be >= 1")


@dataclass(frozen=True)
class TuneRecord:
    round: int
    lam: float
    R_value: float
    objective: float
    nuclear_norm: float
    loss: float
    accepted: bool


@dataclass
class TuneTrace:
    records: list = field(default_factory=list)
    lambda_auto: float = float("nan")
    initial_R: float = float("nan")
    reason: str = ""

    def __len__(self):
        return len(self.records)


def balance_criterion(loss: float, nuc: float) -> float:
    """``loss / nuc + nuc / loss``; equals 2 exactly when the two terms balance."""
    if not (loss > 0 and nuc > 0):
        raise DomainError(f"balance criterion needs positive loss and nuclear norm, got {loss!r}, {nuc!r}")
    return loss / nuc + nuc / loss


def _relative_change(R: float, r: float) -> float:
    if math.isinf(R) or math.isinf(r):
        return 0.0 if R == r else 1.0
    return abs(R - r) / (R + r)


def auto_tune(w, cfg: TuneConfig = TuneConfig()) -> tuple:
    """Select ``lam`` by the balance criterion and return the fit there.

    Returns
    -------
    estimate : Estimate
        Solution at ``trace.lambda_auto``.
    trace : TuneTrace
        One record per solved ``lam``.

    Notes
    -----
    While no ``lam`` has yet improved on the starting criterion, a
    worsening round divides ``lam`` by ``gamma_lambda`` instead of taking a
    geometric mean with itself (which would repeat the same ``lam``).
    This is what lets the search recover from a starting value that
    thresholds every singular value away.
    """
    w = as_counts(w)
    z0 = initialize(w, replace(cfg.solver, perturb_sigma=0.0))
    loss0 = neg_loglik(z0, w)
    R = balance_criterion(loss0, nuclear_norm(z0))

    lam = loss0
    lam_auto = lam
    accepted_any = False
    trace = TuneTrace(initial_R=R)
    solved = {}

    def fit(value):
        if value not in solved:
            solved[value] = solve(w, cfg.solver.with_lambda(value))
        return solved[value]

    for k in range(1, cfg.max_rounds + 1):
        est = fit(lam)
        nuc = est.nuclear_norm
        r = balance_criterion(est.objective.loss, nuc) if nuc >= ZERO_NUC_TOL else math.inf

        if _relative_change(R, r) <= cfg.eps_rel:
            trace.records.append(TuneRecord(k, lam, r, est.objective.total, nuc, est.objective.loss, True))
            lam_auto = lam
            trace.reason = "converged"
            break

        improved = R > r
        trace.records.append(TuneRecord(k, lam, r, est.objective.total, nuc, est.objective.loss, improved))
        if improved:
            R = r
            lam_auto = lam
            accepted_any = True
            lam = lam * cfg.gamma_lambda
        elif accepted_any:
            lam = math.sqrt(lam * lam_auto)
        else:
            lam = lam / cfg.gamma_lambda
        log.debug("round %d: lam=%.6g r=%.6g R=%.6g", k, trace.records[-1].lam, r, R)
    else:
        trace.reason = "max-rounds"

    trace.lambda_auto = lam_auto
    return fit(lam_auto), trace
