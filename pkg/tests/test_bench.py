import numpy as np
import pytest

from clrlr import SimScenario, SolverConfig, TuneConfig
from clrlr.bench import METRICS, run_bench
from clrlr.cli import main
from clrlr.io import read_rows

TINY = SimScenario(n=20, p=10, r=3, seed=13)
FAST = TuneConfig(solver=SolverConfig(n_starts=1))


@pytest.fixture(scope="module")
def report():
    return run_bench(TINY, replicates=2, gammas=[1, 2], tune=FAST)


def test_records_layout(report):
    assert len(report.records) == 2 * 2 * 3
    assert report.cells() == [("exact", 20, 10, 1), ("exact", 20, 10, 2)]
    for rec in report.records:
        assert np.isnan(rec.metrics["sin_theta_k20"])
        for k in (1, 2, 3):
            assert 0 <= rec.metrics[f"sin_theta_k{k}"] <= k
        assert rec.metrics["frob_error"] >= 0 and rec.metrics["kl_rowwise"] >= 0


def test_aggregates_are_means(report):
    header, rows = report.table()
    for row in rows:
        cell = tuple(row[:4])
        for metric in ("frob_error", "kl_rowwise", "sin_theta_k1"):
            for est in ("nuc", "zr", "svt"):
                values = [r.metrics[metric] for r in report.records
                          if (r.regime, r.n, r.p, r.gamma) == cell and r.estimator == est]
                assert row[header.index(f"{metric}_{est}")] == pytest.approx(np.mean(values), abs=1e-12)


def test_parallel_matches_serial(report):
    again = run_bench(TINY, replicates=2, gammas=[1, 2], tune=FAST, threads=3)
    def rows(rep):
        return [[repr(v) for v in r.row()] for r in rep.records]

    assert rows(again) == rows(report)


def test_cli_bench_outputs(tmp_path):
    scen = tmp_path / "tiny.txt"
    scen.write_text("n = 20\np = 10\nr = 3\nseed = 13\n")
    out = tmp_path / "bench"
    assert main(["bench", str(scen), "--replicates", "2", "--n-starts", "1", "--scatter",
                 "--out-dir", str(out)]) == 0
    report = read_rows(out / "report.csv")
    assert len(report) == 1 and int(report[0]["replicates"]) == 2
    records = read_rows(out / "records.csv")
    assert len(records) == 6
    mean = np.mean([float(r["frob_error"]) for r in records if r["estimator"] == "zr"])
    assert float(report[0]["frob_error_zr"]) == pytest.approx(mean, abs=1e-12)
    scatter = read_rows(out / "scatter.csv")
    assert len(scatter) == 200 and set(scatter[0]) == {"z_star", "nuc", "zr", "svt"}


def test_unknown_estimator():
    from clrlr.errors import ConfigError
    with pytest.raises(ConfigError):
        run_bench(TINY, replicates=1, estimators=["mle"])
