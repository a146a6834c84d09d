"""Monte Carlo experiment engine.

Runs seeded replications of a batched-bandit experiment, evaluates the
requested estimators and tests on each trajectory, and aggregates rejection
rates, coverage, and invalid-batch frequencies. Replications are the unit
of parallel work; every per-replication quantity is a pure function of
(root seed, replication index), and aggregation is sum-based, so results do
not depend on worker count or scheduling.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import estimators as est
from . import inference as inf
from .environment import ExperimentSpec, Trajectory, TrendSpec, generate_trajectory
from .streams import child_sequence

ESTIMATOR_NAMES = ("ols", "bols", "wdecorrelated", "awaipw", "snbound", "bols_nste")
STATISTIC_ESTIMATORS = ("ols", "bols", "wdecorrelated", "awaipw", "bols_nste")
NULL_SEED_TAG = 7_001  # offset stream for internal null-calibration runs


@dataclass
class McPlan:
    """One Monte Carlo experiment: spec, estimator set, and run options."""

    spec: ExperimentSpec
    estimators: tuple = ESTIMATOR_NAMES
    reps: int = 10_000
    alpha: float = 0.05
    calibration: str = "theoretical_cutoffs"
    delta0: float = 0.0
    bands: bool = False
    workers: int = 1
    raw: bool = False
    lambda_reps: int = 1000
    cutoff_draws: int = 1_000_000
    t1_augmentation: str = "zero"

    def __post_init__(self):
        self.estimators = tuple(self.estimators)
        unknown = set(self.estimators) - set(ESTIMATOR_NAMES)
        if unknown:
            raise ValueError(f"unknown estimators: {sorted(unknown)}")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if self.calibration not in ("theoretical_cutoffs", "null_calibrated"):
            raise ValueError(f"unknown calibration mode {self.calibration!r}")

    def to_json(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "estimators": list(self.estimators),
            "reps": self.reps,
            "alpha": self.alpha,
            "calibration": self.calibration,
            "delta0": self.delta0,
            "bands": self.bands,
            "workers": self.workers,
            "raw": self.raw,
            "lambda_reps": self.lambda_reps,
            "cutoff_draws": self.cutoff_draws,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "McPlan":
        doc = dict(doc)
        doc["spec"] = ExperimentSpec.from_json(doc["spec"])
        if "estimators" in doc:
            doc["estimators"] = tuple(doc["estimators"])
        return cls(**doc)


@dataclass
class RepOutcome:
    """Everything one replication contributes to the aggregate."""

    rep: int
    results: dict
    reports: dict
    invalid_batches: int
    bands_cover: Optional[bool] = None


@dataclass
class EstimatorSummary:
    reject_rate: float
    mc_se: float
    invalid_rate: float
    cutoff: Optional[float] = None


@dataclass
class McSummary:
    """Aggregated Monte Carlo results for one plan."""

    reps: int
    alpha: float
    estimators: dict          # name -> EstimatorSummary
    invalid_batch_freq: float
    wall_clock: float
    coverage: Optional[float] = None
    coverage_se: Optional[float] = None
    raw_statistics: Optional[dict] = None   # name -> np.ndarray when requested

    def to_json(self) -> dict:
        doc = {
            "reps": self.reps,
            "alpha": self.alpha,
            "invalid_batch_freq": self.invalid_batch_freq,
            "wall_clock_sec": self.wall_clock,
            "estimators": {
                name: {"reject_rate": s.reject_rate, "mc_se": s.mc_se,
                       "invalid_rate": s.invalid_rate, "cutoff": s.cutoff}
                for name, s in self.estimators.items()
            },
        }
        if self.coverage is not None:
            doc["coverage"] = self.coverage
            doc["coverage_se"] = self.coverage_se
        return doc


def binomial_se(p_hat: float, reps: int) -> float:
    return math.sqrt(p_hat * (1.0 - p_hat) / reps)


def run_replication(spec: ExperimentSpec, rep: int, alpha: float,
                    estimators: Sequence[str] = ESTIMATOR_NAMES,
                    delta0: float = 0.0,
                    lam: Optional[float] = None,
                    cutoffs: Optional[dict] = None,
                    bands: bool = False,
                    cutoff_draws: int = 1_000_000,
                    t1_augmentation: str = "zero") -> RepOutcome:
    """Generate one trajectory and evaluate every requested estimator.

    Estimator failures (an arm never pulled, a degenerate batch) are
    reported through validity flags; the replication itself never aborts.
    ``cutoffs`` overrides the theoretical critical values per estimator.
    """
    cutoffs = cutoffs or {}
    traj = generate_trajectory(spec, rep=rep)
    known = spec.sigma_known
    results: dict = {}
    reports: dict = {}

    pooled_var = None
    if not known:
        try:
            pooled_var = est.pooled_sigma2(traj)
        except ValueError:
            pooled_var = None

    def overall_sigma2():
        # scalar variance for pooled statistics; average of the schedule
        if known:
            if isinstance(spec.noise_sigma2, tuple):
                return float(np.mean(spec.noise_sigma2))
            return float(spec.noise_sigma2)
        return pooled_var

    batch_ests = est.batch_estimates(traj, with_sigma2=not known)
    invalid_batches = sum(1 for b in batch_ests if not b.valid)

    if "ols" in estimators:
        var = overall_sigma2()
        if var is None:
            fit = est.pooled_ols(traj)
            reports["ols"] = est.EstimateReport.invalid(
                "ols", "variance unavailable", estimate=fit.delta)
        else:
            reports["ols"] = est.ols_z_statistic(traj, delta0, var)
        rep_ = reports["ols"]
        if rep_.valid:
            results["ols"] = inf.normal_test(rep_.statistic, alpha,
                                             cutoff=cutoffs.get("ols"))

    if "bols" in estimators:
        kept = [b for b in batch_ests if b.valid]
        comb = sum(b.delta_hat for b in kept) / len(kept) if kept else math.nan
        try:
            sigma2 = overall_sigma2() if known else None
            results["bols"] = inf.bols_combined_test(
                batch_ests, delta0, alpha, sigma2=sigma2,
                draws=cutoff_draws, cutoff=cutoffs.get("bols"))
            reports["bols"] = est.EstimateReport(
                estimator="bols", estimate=comb,
                scale=math.nan, statistic=results["bols"].statistic,
                df_hint=None if known else spec.n - 2)
        except ValueError as e:
            reports["bols"] = est.EstimateReport.invalid("bols", str(e), estimate=comb)

    if "bols_nste" in estimators:
        try:
            sigma2 = overall_sigma2() if known else None
            results["bols_nste"] = inf.global_null_test(
                batch_ests, alpha, sigma2=sigma2,
                draws=cutoff_draws, cutoff=cutoffs.get("bols_nste"))
            reports["bols_nste"] = est.EstimateReport(
                estimator="bols_nste", estimate=math.nan, scale=math.nan,
                statistic=results["bols_nste"].statistic,
                df_hint=None if known else spec.n - 2)
        except ValueError as e:
            reports["bols_nste"] = est.EstimateReport.invalid("bols_nste", str(e))

    if "wdecorrelated" in estimators:
        if lam is None:
            raise ValueError("wdecorrelated requires a precomputed lambda")
        var = overall_sigma2()
        reports["wdecorrelated"] = est.w_decorrelated_report(
            traj, lam, delta0, sigma2=var)
        rep_ = reports["wdecorrelated"]
        if rep_.valid:
            results["wdecorrelated"] = inf.normal_test(
                rep_.statistic, alpha, cutoff=cutoffs.get("wdecorrelated"))

    if "awaipw" in estimators:
        reports["awaipw"] = est.aw_aipw_report(traj, delta0,
                                               t1_augmentation=t1_augmentation)
        rep_ = reports["awaipw"]
        if rep_.valid:
            results["awaipw"] = inf.normal_test(rep_.statistic, alpha,
                                                cutoff=cutoffs.get("awaipw"))

    if "snbound" in estimators:
        var = overall_sigma2()
        sn = est.sn_bound_test(traj, alpha, sigma2=var) if var is not None \
            else est.SnBound(valid=False, reason="variance unavailable")
        reports["snbound"] = est.EstimateReport(
            estimator="snbound",
            estimate=sn.beta1 - sn.beta0 if sn.valid else math.nan,
            scale=math.nan, statistic=math.nan,
            valid=sn.valid, reason=sn.reason)
        if sn.valid:
            results["snbound"] = inf.TestResult(
                statistic=math.nan, cutoff=math.nan, alpha=alpha,
                reject=sn.reject, method="sn_bound")

    bands_cover = None
    if bands:
        try:
            sigma2 = overall_sigma2() if known else None
            band_set = inf.simultaneous_bands(batch_ests, alpha, sigma2=sigma2)
            bands_cover = band_set.contains(spec.true_margins())
        except ValueError:
            bands_cover = None

    return RepOutcome(rep=rep, results=results, reports=reports,
                      invalid_batches=invalid_batches, bands_cover=bands_cover)


def _prepare_lambda(plan: McPlan) -> Optional[float]:
    if "wdecorrelated" not in plan.estimators:
        return None
    seed = int(child_sequence(plan.spec.seed, NULL_SEED_TAG, 1).generate_state(1)[0])
    return est.select_lambda(plan.spec, reps=plan.lambda_reps, root_seed=seed)


def _run_range(plan: McPlan, lam: Optional[float], cutoffs: Optional[dict],
               lo: int, hi: int) -> dict:
    """Aggregate outcomes for replications [lo, hi); sum-based and order-free."""
    agg = {
        "reject": {name: 0 for name in plan.estimators},
        "count": {name: 0 for name in plan.estimators},
        "invalid": {name: 0 for name in plan.estimators},
        "invalid_batches": 0,
        "cover": 0,
        "cover_count": 0,
        "stats": {name: {} for name in plan.estimators} if plan.raw else None,
    }
    for rep in range(lo, hi):
        out = run_replication(
            plan.spec, rep, plan.alpha, estimators=plan.estimators,
            delta0=plan.delta0, lam=lam, cutoffs=cutoffs, bands=plan.bands,
            cutoff_draws=plan.cutoff_draws, t1_augmentation=plan.t1_augmentation)
        agg["invalid_batches"] += out.invalid_batches
        for name in plan.estimators:
            rep_report = out.reports.get(name)
            if rep_report is None or not rep_report.valid:
                agg["invalid"][name] += 1
                continue
            agg["count"][name] += 1
            if out.results[name].reject:
                agg["reject"][name] += 1
            if plan.raw:
                agg["stats"][name][rep] = out.results[name].statistic
        if out.bands_cover is not None:
            agg["cover_count"] += 1
            agg["cover"] += int(out.bands_cover)
    return agg


def _merge(a: dict, b: dict) -> dict:
    for key in ("reject", "count", "invalid"):
        for name, v in b[key].items():
            a[key][name] += v
    a["invalid_batches"] += b["invalid_batches"]
    a["cover"] += b["cover"]
    a["cover_count"] += b["cover_count"]
    if a["stats"] is not None:
        for name, d in b["stats"].items():
            a["stats"][name].update(d)
    return a


def monte_carlo(plan: McPlan, cutoffs: Optional[dict] = None) -> McSummary:
    """Run the plan. With calibration == "null_calibrated", first simulate the
    zero-margin twin of the spec and replace the cutoff of every estimator
    whose theoretical cutoff over-rejects by more than 2 Monte Carlo SEs."""
    start = time.monotonic()
    lam = _prepare_lambda(plan)

    if cutoffs is None and plan.calibration == "null_calibrated":
        cutoffs = _calibrate_inflated(plan, lam)

    chunks = _split(plan.reps, plan.workers)
    if plan.workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            futures = [pool.submit(_run_range, plan, lam, cutoffs, lo, hi)
                       for lo, hi in chunks]
            agg = None
            for f in futures:
                agg = f.result() if agg is None else _merge(agg, f.result())
    else:
        agg = _run_range(plan, lam, cutoffs, 0, plan.reps)

    summaries = {}
    for name in plan.estimators:
        cnt = agg["count"][name]
        rate = agg["reject"][name] / cnt if cnt else math.nan
        summaries[name] = EstimatorSummary(
            reject_rate=rate,
            mc_se=binomial_se(rate, cnt) if cnt else math.nan,
            invalid_rate=agg["invalid"][name] / plan.reps,
            cutoff=None if cutoffs is None else cutoffs.get(name))
    coverage = coverage_se = None
    if plan.bands and agg["cover_count"]:
        coverage = agg["cover"] / agg["cover_count"]
        coverage_se = binomial_se(coverage, agg["cover_count"])
    raw = None
    if plan.raw:
        raw = {name: np.array([v for _, v in sorted(d.items())])
               for name, d in agg["stats"].items()}
    return McSummary(
        reps=plan.reps, alpha=plan.alpha, estimators=summaries,
        invalid_batch_freq=agg["invalid_batches"] / (plan.reps * plan.spec.T),
        wall_clock=time.monotonic() - start,
        coverage=coverage, coverage_se=coverage_se, raw_statistics=raw)


def _split(reps: int, workers: int) -> list[tuple[int, int]]:
    if workers <= 1:
        return [(0, reps)]
    size = math.ceil(reps / workers)
    return [(lo, min(lo + size, reps)) for lo in range(0, reps, size)]


def null_twin(plan: McPlan) -> McPlan:
    """Zero-margin version of the plan on an independent seed stream."""
    null_seed = int(child_sequence(plan.spec.seed, NULL_SEED_TAG, 0).generate_state(1)[0])
    null_spec = replace(plan.spec, trend=plan.spec.trend.null_version(), seed=null_seed)
    return replace(plan, spec=null_spec, calibration="theoretical_cutoffs",
                   raw=True, bands=False)


def calibrate_cutoffs(null_plan: McPlan) -> dict:
    """Empirical (1 - alpha) critical values from a zero-margin run.

    Returns |statistic| quantiles for the two-sided estimators and the upper
    quantile of the quadratic statistic; the self-normalized bound has no
    statistic to calibrate.
    """
    margins = null_plan.spec.true_margins()
    if np.any(margins != 0.0):
        raise ValueError("calibration requires a zero-margin trend")
    wanted = tuple(n for n in null_plan.estimators if n in STATISTIC_ESTIMATORS)
    plan = replace(null_plan, estimators=wanted, raw=True, bands=False)
    summary = monte_carlo(plan)
    cutoffs = {}
    for name in wanted:
        stats = summary.raw_statistics[name]
        if stats.size == 0:
            continue
        if plan.alpha >= 1.0:
            cutoffs[name] = 0.0
        elif name == "bols_nste":
            cutoffs[name] = float(np.quantile(stats, 1.0 - plan.alpha))
        else:
            cutoffs[name] = float(np.quantile(np.abs(stats), 1.0 - plan.alpha))
    return cutoffs


def _calibrate_inflated(plan: McPlan, lam: Optional[float]) -> dict:
    """Cutoff overrides for estimators whose null rejection rate is inflated."""
    null_plan = null_twin(plan)
    wanted = tuple(n for n in plan.estimators if n in STATISTIC_ESTIMATORS)
    null_plan = replace(null_plan, estimators=wanted)
    summary = monte_carlo(null_plan)
    cutoffs = {}
    for name in wanted:
        s = summary.estimators[name]
        if math.isnan(s.reject_rate):
            continue
        if s.reject_rate > plan.alpha + 2.0 * binomial_se(plan.alpha, null_plan.reps):
            stats = summary.raw_statistics[name]
            if name == "bols_nste":
                cutoffs[name] = float(np.quantile(stats, 1.0 - plan.alpha))
            else:
                cutoffs[name] = float(np.quantile(np.abs(stats), 1.0 - plan.alpha))
    return cutoffs


# ---------------------------------------------------------------------------
# Figure-reproduction experiments
# ---------------------------------------------------------------------------

FIGURES = ("zstat_hist", "undercoverage_sweep", "type1_stationary",
           "power_stationary", "nonstationary_baseline", "nste_power")

UNDERCOVERAGE_MARGINS = (0.0, 0.05, 0.1, 0.2, 0.3, 0.5)
UNDERCOVERAGE_NS = (25, 50, 100)
T_GRID = (2, 5, 10, 25)


def _write_csv(path, header, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _thompson_spec(n, T, trend, seed, clip=(0.1, 0.9), sigma_known=False):
    from .policies import PolicySpec
    return ExperimentSpec(n=n, T=T, clip_lo=clip[0], clip_hi=clip[1],
                          sigma_known=sigma_known, trend=trend,
                          policy=PolicySpec(variant="thompson"), seed=seed)


def _egreedy_spec(n, T, trend, seed, clip=(0.1, 0.9), sigma_known=False):
    from .policies import PolicySpec
    return ExperimentSpec(n=n, T=T, clip_lo=clip[0], clip_hi=clip[1],
                          sigma_known=sigma_known, trend=trend,
                          policy=PolicySpec(variant="epsilon_greedy", epsilon=0.1),
                          seed=seed)


def reproduce_figure(name: str, reps: int, out_dir: str, seed: int = 0,
                     alpha: float = 0.05, workers: int = 1,
                     margins: Sequence[float] = UNDERCOVERAGE_MARGINS,
                     ns: Sequence[int] = UNDERCOVERAGE_NS,
                     t_grid: Sequence[int] = T_GRID) -> list[str]:
    """Emit the plot-ready data behind one named experiment. Returns paths."""
    if name not in FIGURES:
        raise ValueError(f"unknown figure {name!r}; choose from {FIGURES}")
    zero = TrendSpec(variant="constant", beta0=0.0, beta1=0.0)
    # Stationary alternative: arm-0 mean 0.25, arm-1 mean 0 (margin -0.25).
    alt = TrendSpec(variant="constant", beta0=0.25, beta1=0.0)
    paths = []

    if name == "zstat_hist":
        spec = _thompson_spec(100, 25, zero, seed, clip=(0.05, 0.95), sigma_known=True)
        plan = McPlan(spec=spec, estimators=("ols",), reps=reps, alpha=alpha,
                      raw=True, workers=workers)
        summary = monte_carlo(plan)
        z = summary.raw_statistics["ols"]
        paths.append(_write_csv(os.path.join(out_dir, "zstat_samples.csv"),
                                ["rep", "z"], list(enumerate(z.tolist()))))
        counts, edges = np.histogram(z, bins=80, range=(-6.0, 6.0))
        rows = [(edges[i], edges[i + 1], int(counts[i])) for i in range(len(counts))]
        paths.append(_write_csv(os.path.join(out_dir, "zstat_hist.csv"),
                                ["bin_lo", "bin_hi", "count"], rows))
        meta = {"type1": summary.estimators["ols"].reject_rate,
                "reps": reps, "tail_mass_above_1.96": float((np.abs(z) > 1.96).mean())}
        mpath = os.path.join(out_dir, "zstat_meta.json")
        with open(mpath, "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2)
        paths.append(mpath)

    elif name == "undercoverage_sweep":
        rows = []
        for margin in margins:
            trend = TrendSpec(variant="constant", beta0=0.0, beta1=margin)
            for n in ns:
                spec = _thompson_spec(n, 25, trend, seed, clip=(0.05, 0.95),
                                      sigma_known=True)
                cov = ols_ci_coverage(spec, reps, alpha, workers=workers)
                rows.append((margin, n, cov, binomial_se(cov, reps), reps))
        paths.append(_write_csv(os.path.join(out_dir, "undercoverage_sweep.csv"),
                                ["margin", "n", "coverage", "se", "reps"], rows))

    elif name in ("type1_stationary", "power_stationary"):
        trend = zero if name == "type1_stationary" else alt
        calibration = "theoretical_cutoffs" if name == "type1_stationary" \
            else "null_calibrated"
        rows = []
        for maker, label in ((_thompson_spec, "thompson"), (_egreedy_spec, "epsilon_greedy")):
            for T in t_grid:
                spec = maker(25, T, trend, seed)
                plan = McPlan(spec=spec, reps=reps, alpha=alpha, workers=workers,
                              estimators=("ols", "bols", "wdecorrelated",
                                          "awaipw", "snbound"),
                              calibration=calibration)
                summary = monte_carlo(plan)
                for ename, s in summary.estimators.items():
                    rows.append((label, T, ename, s.reject_rate, s.mc_se,
                                 s.invalid_rate))
        paths.append(_write_csv(
            os.path.join(out_dir, f"{name}.csv"),
            ["policy", "T", "estimator", "reject_rate", "se", "invalid_rate"], rows))

    elif name == "nonstationary_baseline":
        rows = []
        for baseline in ("quadratic", "sinusoidal"):
            for margin, phase in ((0.0, "type1"), (0.25, "power")):
                trend = TrendSpec(variant="baseline_shift", margin=margin,
                                  baseline=baseline, amplitude=1.0)
                for T in t_grid:
                    spec = _thompson_spec(25, T, trend, seed)
                    plan = McPlan(spec=spec, reps=reps, alpha=alpha, workers=workers,
                                  estimators=("ols", "bols", "awaipw"),
                                  calibration="null_calibrated" if phase == "power"
                                  else "theoretical_cutoffs")
                    summary = monte_carlo(plan)
                    for ename, s in summary.estimators.items():
                        rows.append((baseline, phase, T, ename, s.reject_rate,
                                     s.mc_se, s.invalid_rate))
        paths.append(_write_csv(
            os.path.join(out_dir, "nonstationary_baseline.csv"),
            ["baseline", "phase", "T", "estimator", "reject_rate", "se",
             "invalid_rate"], rows))

    elif name == "nste_power":
        rows = []
        for shape in ("quadratic", "sinusoidal"):
            for T in t_grid:
                deltas = _margin_trend(shape, T, amplitude=0.25)
                trend = TrendSpec(variant="explicit",
                                  pairs=[(0.0, d) for d in deltas])
                spec = _thompson_spec(25, T, trend, seed)
                plan = McPlan(spec=spec, reps=reps, alpha=alpha, workers=workers,
                              estimators=("bols", "bols_nste", "awaipw"))
                summary = monte_carlo(plan)
                for ename, s in summary.estimators.items():
                    rows.append((shape, T, ename, s.reject_rate, s.mc_se,
                                 s.invalid_rate))
        paths.append(_write_csv(
            os.path.join(out_dir, "nste_power.csv"),
            ["margin_trend", "T", "estimator", "reject_rate", "se",
             "invalid_rate"], rows))

    return paths


def _margin_trend(shape: str, T: int, amplitude: float) -> list[float]:
    span = max(T - 1, 1)
    if shape == "quadratic":
        return [amplitude * (1.0 - ((t - 1) / span) ** 2) for t in range(1, T + 1)]
    return [amplitude * math.sin(2.0 * math.pi * (t - 1) / T) for t in range(1, T + 1)]


def ols_ci_coverage(spec: ExperimentSpec, reps: int, alpha: float,
                    workers: int = 1) -> float:
    """Coverage of the normal-approximation CI for the pooled OLS margin."""
    true_margin = float(spec.true_margins()[0])
    plan = McPlan(spec=spec, estimators=("ols",), reps=reps, alpha=alpha,
                  delta0=true_margin, workers=workers)
    summary = monte_carlo(plan)
    # CI covers the truth exactly when the test centered at it accepts.
    return 1.0 - summary.estimators["ols"].reject_rate


# ---------------------------------------------------------------------------
# Report / raw output serialization
# ---------------------------------------------------------------------------

def reports_csv_rows(reports_by_batch: Sequence, pooled_reports: Sequence) -> list:
    """Flat rows (estimator, t, estimate, scale, statistic, valid, reason)."""
    rows = []
    for b in reports_by_batch:
        rows.append(("bols_batch", b.t, b.delta_hat, b.scale if b.valid else "",
                     "", int(b.valid), b.reason or ""))
    for r in pooled_reports:
        rows.append((r.estimator, "", r.estimate, r.scale, r.statistic,
                     int(r.valid), r.reason or ""))
    return rows


def write_raw_statistics(path: str, raw: dict) -> str:
    rows = []
    for name in sorted(raw):
        for i, v in enumerate(raw[name]):
            rows.append((i, name, v))
    return _write_csv(path, ["rep", "estimator", "statistic"], rows)
