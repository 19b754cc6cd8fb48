import math

import numpy as np
import pytest

from clrlr import CountMatrix, DomainError, SimScenario, SolverConfig, TuneConfig, auto_tune, balance_criterion, simulate
from clrlr.errors import ConfigError


def test_balance_examples():
    assert balance_criterion(2.0, 2.0) == 2.0
    assert balance_criterion(4.0, 1.0) == 4.25
    assert balance_criterion(0.3, 7.0) == balance_criterion(7.0, 0.3)


@pytest.mark.parametrize("args", [(0.0, 1.0), (1.0, 0.0), (-1.0, 2.0)])
def test_balance_rejects_nonpositive(args):
    with pytest.raises(DomainError):
        balance_criterion(*args)


def test_tune_config_validation():
    with pytest.raises(ConfigError):
        TuneConfig(gamma_lambda=1.0)
    with pytest.raises(ConfigError):
        TuneConfig(eps_rel=0.0)


@pytest.fixture(scope="module")
def tuned():
    inst = simulate(SimScenario(n=30, p=12, r=3, gamma=2, seed=4))
    cfg = TuneConfig(solver=SolverConfig(n_starts=1))
    est, trace = auto_tune(inst.counts, cfg)
    return inst, cfg, est, trace


def test_trace_shape(tuned):
    _, cfg, est, trace = tuned
    assert 1 <= len(trace) <= cfg.max_rounds + 1
    assert all(r.lam > 0 for r in trace.records)
    assert trace.reason in ("converged", "max-rounds")
    assert est.lam == trace.lambda_auto


def test_starts_from_zero_replacement_loss(tuned):
    inst, _, _, trace = tuned
    from clrlr import clr, neg_loglik, zero_replace
    assert trace.records[0].lam == neg_loglik(clr(zero_replace(inst.counts)), inst.counts)


def test_lambda_auto_has_minimal_criterion(tuned):
    _, cfg, _, trace = tuned
    best = min(r.R_value for r in trace.records)
    chosen = [r.R_value for r in trace.records if r.lam == trace.lambda_auto]
    assert chosen
    # the early stop may accept a value within eps_rel of the running best
    assert min(chosen) <= best * (1 + 2 * cfg.eps_rel)


def test_update_rules_replay(tuned):
    _, cfg, _, trace = tuned
    g = cfg.gamma_lambda
    R = trace.initial_R
    lam_auto = trace.records[0].lam
    accepted = False
    for prev, nxt in zip(trace.records, trace.records[1:]):
        r = prev.R_value
        if R > r:
            R, lam_auto, accepted = r, prev.lam, True
            assert nxt.lam == pytest.approx(prev.lam * g, rel=1e-15)
        elif accepted:
            assert nxt.lam == pytest.approx(math.sqrt(prev.lam * lam_auto), rel=1e-15)
            # bisection halves the log distance to the best lambda
            assert abs(math.log(nxt.lam / lam_auto)) == pytest.approx(abs(math.log(prev.lam / lam_auto)) / 2)
        else:
            assert nxt.lam == pytest.approx(prev.lam / g, rel=1e-15)


def test_deterministic(tuned):
    inst, cfg, est, trace = tuned
    est2, trace2 = auto_tune(inst.counts, cfg)
    assert trace2.records == trace.records
    np.testing.assert_array_equal(est2.z_hat, est.z_hat)


def test_respects_round_budget():
    inst = simulate(SimScenario(n=20, p=8, r=2, gamma=1, seed=1))
    _, trace = auto_tune(inst.counts, TuneConfig(max_rounds=3, solver=SolverConfig(n_starts=1)))
    assert len(trace) <= 3
    assert trace.reason in ("converged", "max-rounds")
