"""Margin estimators and scale factors for batched bandit data.

Provides the pooled OLS estimator and its Z-statistic, per-batch OLS
(the building block of the batch-combined tests), the W-decorrelated
estimator with both recursive and closed-form weights, the adaptively
weighted AIPW estimator, the self-normalized martingale bound test, and
the pooled / per-batch noise-variance estimators.

Sign convention: every margin estimate targets delta = beta1 - beta0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .environment import ExperimentSpec, Trajectory, generate_trajectory
from .streams import stream


@dataclass
class EstimateReport:
    """Standardized output of a margin estimator.

    ``statistic`` equals ``scale * (estimate - hypothesized)`` whenever the
    report is valid; ``df_hint`` carries the per-batch degrees of freedom
    when Student-t referencing applies.
    """

    estimator: str
    estimate: float = math.nan
    scale: float = math.nan
    statistic: float = math.nan
    df_hint: Optional[int] = None
    valid: bool = True
    reason: Optional[str] = None

    @classmethod
    def invalid(cls, estimator: str, reason: str,
                estimate: float = math.nan) -> "EstimateReport":
        # a point estimate may exist even when no statistic can be formed
        return cls(estimator=estimator, estimate=estimate, valid=False, reason=reason)


@dataclass
class BatchEstimate:
    """Per-batch OLS margin estimate and its standardization ingredients."""

    t: int
    delta_hat: float = math.nan
    n0: int = 0
    n1: int = 0
    sigma2_hat: Optional[float] = None
    valid: bool = True
    reason: Optional[str] = None

    @property
    def n(self) -> int:
        return self.n0 + self.n1

    @property
    def scale(self) -> float:
        """sqrt(N0*N1/n), the known-variance standardizing factor (times 1/sigma)."""
        return math.sqrt(self.n0 * self.n1 / self.n)


@dataclass
class PooledOls:
    beta0: float = math.nan
    beta1: float = math.nan
    delta: float = math.nan
    n0: int = 0
    n1: int = 0
    valid: bool = True
    reason: Optional[str] = None


def _pooled_sums(traj: Trajectory):
    n0 = n1 = 0
    s0 = s1 = 0.0
    for b in traj.batches:
        k1 = b.n1
        r1 = float((b.rewards * b.actions).sum())
        n1 += k1
        n0 += b.n - k1
        s1 += r1
        s0 += float(b.rewards.sum()) - r1
    return n0, n1, s0, s1


def pooled_ols(traj: Trajectory) -> PooledOls:
    """Pooled per-arm reward means; the margin estimate is their difference."""
    n0, n1, s0, s1 = _pooled_sums(traj)
    if n0 == 0 or n1 == 0:
        return PooledOls(n0=n0, n1=n1, valid=False, reason="empty arm")
    b0 = s0 / n0
    b1 = s1 / n1
    return PooledOls(beta0=b0, beta1=b1, delta=b1 - b0, n0=n0, n1=n1)


def ols_z_statistic(traj: Trajectory, delta: float, sigma2: float) -> EstimateReport:
    """Z-statistic of the pooled OLS margin: sqrt(N1*N0/(T*n*sigma2)) * (diff - delta)."""
    fit = pooled_ols(traj)
    if not fit.valid:
        return EstimateReport.invalid("ols", fit.reason)
    if sigma2 <= 0.0:
        return EstimateReport.invalid("ols", "nonpositive variance", estimate=fit.delta)
    T = len(traj.batches)
    n = traj.spec.n
    scale = math.sqrt(fit.n1 * fit.n0 / (T * n * sigma2))
    return EstimateReport(estimator="ols", estimate=fit.delta, scale=scale,
                          statistic=scale * (fit.delta - delta))


def pooled_sigma2(traj: Trajectory) -> float:
    """Residual variance around the pooled arm means, divisor n*T - 2."""
    fit = pooled_ols(traj)
    nT = sum(b.n for b in traj.batches)
    if not fit.valid or nT < 3:
        raise ValueError("pooled variance needs both arms pulled and n*T >= 3")
    ss = 0.0
    for b in traj.batches:
        fitted = np.where(b.actions == 1, fit.beta1, fit.beta0)
        ss += float(((b.rewards - fitted) ** 2).sum())
    return ss / (nT - 2)


def bols_batch(b, with_sigma2: bool = True) -> BatchEstimate:
    """Within-batch OLS margin estimate (arm-1 mean minus arm-0 mean)."""
    n1 = b.n1
    n0 = b.n - n1
    if n0 == 0 or n1 == 0:
        return BatchEstimate(t=b.t, n0=n0, n1=n1, valid=False, reason="empty arm in batch")
    s1 = float((b.rewards * b.actions).sum())
    s0 = float(b.rewards.sum()) - s1
    est = BatchEstimate(t=b.t, delta_hat=s1 / n1 - s0 / n0, n0=n0, n1=n1)
    if with_sigma2 and b.n >= 3:
        est.sigma2_hat = batch_sigma2(b)
    return est


def batch_sigma2(b) -> float:
    """Within-batch residual variance around the per-arm means, divisor n - 2."""
    n1 = b.n1
    n0 = b.n - n1
    if b.n < 3 or n0 == 0 or n1 == 0:
        raise ValueError("batch variance needs n >= 3 and both arms pulled")
    s1 = float((b.rewards * b.actions).sum())
    s0 = float(b.rewards.sum()) - s1
    fitted = np.where(b.actions == 1, s1 / n1, s0 / n0)
    return float(((b.rewards - fitted) ** 2).sum()) / (b.n - 2)


def batch_estimates(traj: Trajectory, with_sigma2: bool = True) -> list[BatchEstimate]:
    return [bols_batch(b, with_sigma2=with_sigma2) for b in traj.batches]


# ---------------------------------------------------------------------------
# W-decorrelated estimator
# ---------------------------------------------------------------------------

def _flatten(traj: Trajectory):
    actions = np.concatenate([b.actions for b in traj.batches])
    rewards = np.concatenate([b.rewards for b in traj.batches])
    return actions.astype(np.int64), rewards


def w_weights_closed_form(actions: np.ndarray, lam: float):
    """Decorrelation weights per arm for one-hot two-arm regressors.

    With r = 1/(lam + 1), the arm-1 weight of sample i is
    r * A_i * (1 - r)^(pulls of arm 1 before i), and symmetrically for arm 0:
    later pulls of the same arm are geometrically down-weighted.
    """
    if lam <= 0.0:
        raise ValueError("lambda must be positive")
    a = np.asarray(actions, dtype=np.int64)
    r = 1.0 / (lam + 1.0)
    prior1 = np.cumsum(a) - a
    prior0 = np.cumsum(1 - a) - (1 - a)
    w1 = r * a * (1.0 - r) ** prior1
    w0 = r * (1 - a) * (1.0 - r) ** prior0
    return w0, w1


def w_weights_recursive(actions: np.ndarray, lam: float):
    """Reference implementation of the weight recursion.

    Runs the defining update W_i = (I - sum_{j<i} W_j x_j^T) x_i / (lam + |x_i|^2)
    column by column; kept independent of the closed form so the two can be
    checked against each other.
    """
    if lam <= 0.0:
        raise ValueError("lambda must be positive")
    a = np.asarray(actions, dtype=np.int64)
    n = a.size
    w0 = np.zeros(n)
    w1 = np.zeros(n)
    acc = np.zeros((2, 2))  # sum_j W_j x_j^T
    eye = np.eye(2)
    for i in range(n):
        x = np.array([1.0 - a[i], float(a[i])])
        w = (eye - acc) @ x / (lam + x @ x)
        w0[i], w1[i] = w
        acc += np.outer(w, x)
    return w0, w1


@dataclass
class WDecorrelated:
    beta0: float = math.nan
    beta1: float = math.nan
    delta: float = math.nan
    var0: float = math.nan
    var1: float = math.nan
    valid: bool = True
    reason: Optional[str] = None


def w_decorrelated(traj: Trajectory, lam: float,
                   sigma2: Optional[float] = None) -> WDecorrelated:
    """OLS plus the decorrelating correction, with per-arm variance proxies.

    ``sigma2`` defaults to the pooled residual variance estimate. The
    variance proxy of arm k is sigma2 * sum_i W_{k,i}^2, which standardizes
    the estimate for standard-normal referencing.
    """
    fit = pooled_ols(traj)
    if not fit.valid:
        return WDecorrelated(valid=False, reason=fit.reason)
    if sigma2 is None:
        sigma2 = pooled_sigma2(traj)
    actions, rewards = _flatten(traj)
    w0, w1 = w_weights_closed_form(actions, lam)
    resid = rewards - np.where(actions == 1, fit.beta1, fit.beta0)
    b1 = fit.beta1 + float(w1 @ resid)
    b0 = fit.beta0 + float(w0 @ resid)
    return WDecorrelated(beta0=b0, beta1=b1, delta=b1 - b0,
                         var0=sigma2 * float(w0 @ w0),
                         var1=sigma2 * float(w1 @ w1))


def w_decorrelated_report(traj: Trajectory, lam: float, delta: float = 0.0,
                          sigma2: Optional[float] = None) -> EstimateReport:
    res = w_decorrelated(traj, lam, sigma2=sigma2)
    if not res.valid:
        return EstimateReport.invalid("wdecorrelated", res.reason)
    var = res.var0 + res.var1
    if var <= 0.0:
        return EstimateReport.invalid("wdecorrelated", "zero variance proxy",
                                      estimate=res.delta)
    scale = 1.0 / math.sqrt(var)
    return EstimateReport(estimator="wdecorrelated", estimate=res.delta, scale=scale,
                          statistic=scale * (res.delta - delta))


def select_lambda(spec: ExperimentSpec, reps: int = 1000,
                  root_seed: Optional[int] = None) -> float:
    """Tuning constant for the decorrelation: simulate null trajectories and
    take the 1/(nT) empirical quantile of min-arm-count / log(nT).

    For one-hot two-arm regressors the design Gram matrix is diagonal with
    entries (N0, N1), so its minimum eigenvalue is the smaller pooled count.
    """
    if reps < 100:
        raise ValueError("lambda selection needs at least 100 replications")
    null_spec = replace(spec, trend=spec.trend.null_version())
    seed = spec.seed if root_seed is None else root_seed
    null_spec = replace(null_spec, seed=seed)
    nT = spec.n * spec.T
    vals = np.empty(reps)
    for rep in range(reps):
        traj = generate_trajectory(null_spec, rep=rep)
        n0, n1, _, _ = _pooled_sums(traj)
        vals[rep] = min(n0, n1)
    return float(np.quantile(vals / math.log(nT), 1.0 / nT))


# ---------------------------------------------------------------------------
# Adaptively weighted AIPW estimator
# ---------------------------------------------------------------------------

@dataclass
class AwAipw:
    beta0: float = math.nan
    beta1: float = math.nan
    delta: float = math.nan
    v0: float = math.nan
    v1: float = math.nan
    c01: float = math.nan
    valid: bool = True
    reason: Optional[str] = None

    @property
    def variance(self) -> float:
        return self.v0 + self.v1 + 2.0 * self.c01


def aw_aipw(traj: Trajectory, t1_augmentation: str = "zero") -> AwAipw:
    """Adaptively weighted AIPW margin estimator with sqrt-propensity weights.

    Each sample's pseudo-outcome for arm k combines the inverse-propensity
    term with an augmentation by the running arm-k mean over *prior* batches.
    ``t1_augmentation`` fixes the undefined running mean at t = 1: "zero"
    (default) uses 0, "within_batch" uses the first batch's own arm mean.
    """
    if t1_augmentation not in ("zero", "within_batch"):
        raise ValueError("t1_augmentation must be 'zero' or 'within_batch'")
    num1 = num0 = den1 = den0 = 0.0
    y1_all, y0_all, w_pi = [], [], []
    hist_n1 = hist_n0 = 0
    hist_s1 = hist_s0 = 0.0
    for b in traj.batches:
        pi = b.propensity
        if not 0.0 < pi < 1.0:
            return AwAipw(valid=False, reason="propensity on the boundary")
        a = b.actions.astype(float)
        if hist_n1 > 0:
            mu1 = hist_s1 / hist_n1
        elif t1_augmentation == "within_batch" and b.n1 > 0:
            mu1 = float((b.rewards * a).sum()) / b.n1
        else:
            mu1 = 0.0
        if hist_n0 > 0:
            mu0 = hist_s0 / hist_n0
        elif t1_augmentation == "within_batch" and b.n0 > 0:
            mu0 = float((b.rewards * (1.0 - a)).sum()) / b.n0
        else:
            mu0 = 0.0
        y1 = (a / pi) * b.rewards + (1.0 - a / pi) * mu1
        y0 = ((1.0 - a) / (1.0 - pi)) * b.rewards + (1.0 - (1.0 - a) / (1.0 - pi)) * mu0
        sw1 = math.sqrt(pi)
        sw0 = math.sqrt(1.0 - pi)
        num1 += sw1 * float(y1.sum())
        num0 += sw0 * float(y0.sum())
        den1 += sw1 * b.n
        den0 += sw0 * b.n
        y1_all.append(y1)
        y0_all.append(y0)
        w_pi.append(np.full(b.n, pi))
        s1 = float((b.rewards * a).sum())
        hist_n1 += b.n1
        hist_n0 += b.n0
        hist_s1 += s1
        hist_s0 += float(b.rewards.sum()) - s1
    beta1 = num1 / den1
    beta0 = num0 / den0
    y1 = np.concatenate(y1_all)
    y0 = np.concatenate(y0_all)
    pi = np.concatenate(w_pi)
    v1 = float((pi * (y1 - beta1) ** 2).sum()) / den1 ** 2
    v0 = float(((1.0 - pi) * (y0 - beta0) ** 2).sum()) / den0 ** 2
    c01 = -float((np.sqrt(pi * (1.0 - pi)) * (y1 - beta1) * (y0 - beta0)).sum()) / (den1 * den0)
    return AwAipw(beta0=beta0, beta1=beta1, delta=beta1 - beta0, v0=v0, v1=v1, c01=c01)


def aw_aipw_report(traj: Trajectory, delta: float = 0.0,
                   t1_augmentation: str = "zero") -> EstimateReport:
    res = aw_aipw(traj, t1_augmentation=t1_augmentation)
    if not res.valid:
        return EstimateReport.invalid("awaipw", res.reason)
    var = res.variance
    if not var > 0.0:
        return EstimateReport.invalid("awaipw", "nonpositive variance estimate",
                                      estimate=res.delta)
    scale = 1.0 / math.sqrt(var)
    return EstimateReport(estimator="awaipw", estimate=res.delta, scale=scale,
                          statistic=scale * (res.delta - delta))


# ---------------------------------------------------------------------------
# Self-normalized martingale bound
# ---------------------------------------------------------------------------

@dataclass
class SnBound:
    reject: bool = False
    beta0: float = math.nan
    beta1: float = math.nan
    radius0: float = math.nan
    radius1: float = math.nan
    valid: bool = True
    reason: Optional[str] = None


def sn_radius(count: int, delta: float, sigma2: float) -> float:
    """High-probability confidence radius for one arm's pooled mean."""
    if count <= 0:
        raise ValueError("radius needs at least one pull")
    return math.sqrt(sigma2 * (1.0 + count) / count ** 2
                     * (1.0 + 2.0 * math.log(2.0 * math.sqrt(1.0 + count) / delta)))


def sn_bound_test(traj: Trajectory, delta_conf: float,
                  sigma2: Optional[float] = None) -> SnBound:
    """Reject a zero margin when the two arms' confidence bounds separate."""
    if not 0.0 < delta_conf < 1.0:
        raise ValueError("confidence level must lie in (0, 1)")
    fit = pooled_ols(traj)
    if not fit.valid:
        return SnBound(valid=False, reason=fit.reason)
    if sigma2 is None:
        sigma2 = pooled_sigma2(traj)
    c0 = sn_radius(fit.n0, delta_conf, sigma2)
    c1 = sn_radius(fit.n1, delta_conf, sigma2)
    reject = (fit.beta1 + c1 <= fit.beta0 - c0) or (fit.beta0 + c0 <= fit.beta1 - c1)
    return SnBound(reject=reject, beta0=fit.beta0, beta1=fit.beta1,
                   radius0=c0, radius1=c1)
