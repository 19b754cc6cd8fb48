"""Low-rank estimation of centered log-ratio matrices from count data."""

from .compositional import (
    CountMatrix,
    clr,
    softmax_inv,
    softmax_jacobian,
    zero_replace,
)
from .errors import (
    ConfigError,
    DimensionError,
    DomainError,
    NumericError,
    ParseError,
)
from .likelihood import (
    Objective,
    grad_neg_loglik,
    line_search_gap,
    neg_loglik,
    objective,
)
from .solver import Estimate, SolverConfig, SolveTrace, initialize, solve, svt_prox
from .autotune import TuneConfig, TuneTrace, auto_tune, balance_criterion
from .baselines import svt_estimate, zr_estimate
from .metrics import frob_error, kl_rowwise, sin_theta_sq, top_k_svd
from .simulation import SimInstance, SimScenario, gen_counts, gen_z_approx, gen_z_exact, simulate

__version__ = "0.1.0"
