"""End-to-end CLI exercises on small workloads."""

import csv
import json

import pytest

from batchbandit.cli import main
from batchbandit.environment import ExperimentSpec, TrendSpec
from batchbandit.harness import McPlan
from batchbandit.policies import PolicySpec


@pytest.fixture
def spec_file(tmp_path):
    spec = ExperimentSpec(n=12, T=3, seed=5, policy=PolicySpec(variant="thompson"))
    path = tmp_path / "spec.json"
    path.write_text(spec.dumps(), encoding="utf-8")
    return path


@pytest.fixture
def plan_file(tmp_path):
    spec = ExperimentSpec(n=12, T=3, seed=5,
                          trend=TrendSpec(variant="constant", beta0=0.0, beta1=0.0))
    plan = McPlan(spec=spec, estimators=("ols", "bols"), reps=50,
                  cutoff_draws=100_000)
    path = tmp_path / "plan.json"
    path.write_text(json.dumps(plan.to_json()), encoding="utf-8")
    return path


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_simulate_writes_trajectory_and_reports(spec_file, tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(spec_file), "--out", str(out)]) == 0
    doc = json.loads((out / "trajectory.json").read_text(encoding="utf-8"))
    assert len(doc["batches"]) == 3
    rows = read_csv(out / "reports.csv")
    assert rows[0] == ["estimator", "t", "estimate", "scale", "statistic",
                       "valid", "reason"]
    assert any(r[0] == "bols_batch" for r in rows[1:])


def test_simulate_seed_override_changes_data(spec_file, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    main(["simulate", "--config", str(spec_file), "--out", str(out1)])
    main(["simulate", "--config", str(spec_file), "--out", str(out2),
          "--seed", "999"])
    d1 = json.loads((out1 / "trajectory.json").read_text(encoding="utf-8"))
    d2 = json.loads((out2 / "trajectory.json").read_text(encoding="utf-8"))
    assert d1["batches"][0]["rewards"] != d2["batches"][0]["rewards"]


def test_mc_summary_and_raw(plan_file, tmp_path):
    out = tmp_path / "mc"
    assert main(["mc", "--config", str(plan_file), "--out", str(out),
                 "--reps", "40", "--raw"]) == 0
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["reps"] == 40
    assert set(summary["estimators"]) == {"ols", "bols"}
    rows = read_csv(out / "raw_statistics.csv")
    assert rows[0] == ["rep", "estimator", "statistic"]
    assert len(rows) > 1


def test_calibrate_writes_cutoffs(plan_file, tmp_path):
    out = tmp_path / "cal"
    assert main(["calibrate", "--config", str(plan_file), "--out", str(out),
                 "--reps", "60"]) == 0
    cutoffs = json.loads((out / "cutoffs.json").read_text(encoding="utf-8"))
    assert set(cutoffs) == {"ols", "bols"}
    assert all(v > 0 for v in cutoffs.values())


def test_figure_runs(tmp_path):
    out = tmp_path / "fig"
    assert main(["figure", "zstat_hist", "--out", str(out), "--reps", "50",
                 "--seed", "3"]) == 0
    assert (out / "zstat_hist.csv").exists()


def test_bands_from_logged_trajectory(spec_file, tmp_path):
    out = tmp_path / "sim"
    main(["simulate", "--config", str(spec_file), "--out", str(out)])
    bout = tmp_path / "bands"
    assert main(["bands", "--config", str(out / "trajectory.json"),
                 "--out", str(bout), "--alpha", "0.05"]) == 0
    rows = read_csv(bout / "bands.csv")
    assert rows[0] == ["t", "lo", "hi"]
    for row in rows[1:]:
        assert float(row[1]) <= float(row[2])
