"""Test statistics, critical values, and confidence bands for batched data.

The batch-combined statistic aggregates per-batch standardized margin
estimates; with estimated per-batch variances its null distribution is a
scaled sum of independent Student-t variables, so the cutoffs are obtained
by seeded Monte Carlo and cached. Degenerate batches (an arm unpulled) are
excluded and the effective number of batches reduced accordingly.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats as sps

from .estimators import BatchEstimate
from .gaussian import norm_cdf, norm_ppf

METHODS = ("normal", "t_combination", "chi_sq_combination", "bonferroni_band", "sn_bound")

CUTOFF_SEED = 202_406  # default stream for simulated cutoffs
_cutoff_cache: dict = {}
_cache_lock = threading.Lock()


@dataclass
class TestResult:
    statistic: float
    cutoff: float
    alpha: float
    reject: bool
    method: str
    p_value: Optional[float] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class BandSet:
    """Simultaneous per-batch confidence intervals for the margin."""

    t_index: list[int]
    lower: list[float]
    upper: list[float]
    alpha: float
    excluded: int = 0

    def contains(self, margins: Sequence[float]) -> bool:
        """True when every retained batch's interval covers its true margin."""
        return all(lo <= margins[t - 1] <= hi
                   for t, lo, hi in zip(self.t_index, self.lower, self.upper))

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "excluded": self.excluded,
                "bands": [{"t": t, "lo": lo, "hi": hi}
                          for t, lo, hi in zip(self.t_index, self.lower, self.upper)]}


def _valid(batches: Sequence[BatchEstimate], need_sigma2: bool) -> list[BatchEstimate]:
    kept = []
    for b in batches:
        if not b.valid:
            continue
        if need_sigma2 and (b.sigma2_hat is None or b.sigma2_hat <= 0.0):
            continue
        kept.append(b)
    return kept


def _terms(batches: Sequence[BatchEstimate], c: float,
           sigma2: Optional[float]) -> np.ndarray:
    """Per-batch standardized deviations sqrt(N0*N1/(n*var)) * (delta_hat - c)."""
    kept = _valid(batches, need_sigma2=sigma2 is None)
    if not kept:
        raise ValueError("no valid batches")
    if sigma2 is not None and sigma2 <= 0.0:
        raise ValueError("variance must be positive")
    out = np.empty(len(kept))
    for i, b in enumerate(kept):
        var = sigma2 if sigma2 is not None else b.sigma2_hat
        out[i] = math.sqrt(b.n0 * b.n1 / (b.n * var)) * (b.delta_hat - c)
    return out


def bols_combined_statistic(batches: Sequence[BatchEstimate], c: float = 0.0,
                            sigma2: Optional[float] = None) -> float:
    """(1/sqrt(T)) * sum of per-batch standardized margin deviations.

    ``sigma2`` fixes a known noise variance for every batch; None uses each
    batch's own estimate, which is what makes the statistic robust to
    variance non-stationarity.
    """
    terms = _terms(batches, c, sigma2)
    return float(terms.sum() / math.sqrt(terms.size))


def global_null_statistic(batches: Sequence[BatchEstimate],
                          sigma2: Optional[float] = None) -> float:
    """Quadratic statistic for H0: every batch margin is zero.

    Known variance: sum of squared standardized margins (chi-squared with T
    degrees of freedom under the null). Estimated variance: the mean of the
    squared per-batch t-statistics, referenced to a simulated cutoff.
    """
    terms = _terms(batches, 0.0, sigma2)
    if sigma2 is not None:
        return float((terms ** 2).sum())
    return float((terms ** 2).mean())


def _simulated_cutoff(kind: str, n: int, T: int, alpha: float,
                      draws: int, seed: int) -> float:
    key = (kind, n, T, alpha, draws, seed)
    with _cache_lock:
        if key in _cutoff_cache:
            return _cutoff_cache[key]
    df = n - 2
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(n, T)))
    samples = np.empty(draws)
    pos = 0
    step = max(1, 2_000_000 // T)
    while pos < draws:
        m = min(step, draws - pos)
        y = rng.standard_t(df, size=(m, T))
        if kind == "abs_mean":
            samples[pos:pos + m] = np.abs(y.sum(axis=1)) / math.sqrt(T)
        else:  # mean of squares
            samples[pos:pos + m] = (y ** 2).mean(axis=1)
        pos += m
    cut = float(np.quantile(samples, 1.0 - alpha))
    with _cache_lock:
        _cutoff_cache[key] = cut
    return cut


def t_combination_cutoff(n: int, T: int, alpha: float, draws: int = 1_000_000,
                         seed: int = CUTOFF_SEED) -> float:
    """Two-sided cutoff for the combined statistic with estimated variances.

    Simulates |(1/sqrt(T)) sum of T i.i.d. t_(n-2) draws| and returns its
    (1-alpha) quantile; deterministic for a given seed and cached.
    """
    if n < 4:
        raise ValueError("Student-t referencing needs n >= 4")
    if draws < 10_000:
        raise ValueError("too few draws for a stable cutoff")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    return _simulated_cutoff("abs_mean", n, T, alpha, draws, seed)


def t_square_cutoff(n: int, T: int, alpha: float, draws: int = 1_000_000,
                    seed: int = CUTOFF_SEED) -> float:
    """Upper-alpha cutoff for the mean of T squared t_(n-2) draws."""
    if n < 4:
        raise ValueError("Student-t referencing needs n >= 4")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    return _simulated_cutoff("mean_sq", n, T, alpha, draws, seed)


def chi_sq_cutoff(T: int, alpha: float) -> float:
    return float(sps.chi2.ppf(1.0 - alpha, df=T))


def bols_combined_test(batches: Sequence[BatchEstimate], c: float, alpha: float,
                       sigma2: Optional[float] = None, draws: int = 1_000_000,
                       seed: int = CUTOFF_SEED,
                       cutoff: Optional[float] = None) -> TestResult:
    """Two-sided test of a constant margin using the combined statistic."""
    stat = bols_combined_statistic(batches, c, sigma2)
    if cutoff is None and sigma2 is not None:
        return normal_test(stat, alpha)
    if cutoff is None:
        kept = len(_valid(batches, need_sigma2=True))
        n = next(b.n for b in batches if b.valid)
        cutoff = t_combination_cutoff(n, kept, alpha, draws, seed)
    return TestResult(statistic=stat, cutoff=cutoff, alpha=alpha,
                      reject=abs(stat) > cutoff, method="t_combination")


def global_null_test(batches: Sequence[BatchEstimate], alpha: float,
                     sigma2: Optional[float] = None, draws: int = 1_000_000,
                     seed: int = CUTOFF_SEED,
                     cutoff: Optional[float] = None) -> TestResult:
    """Test of zero margin in every batch against any-batch alternatives."""
    stat = global_null_statistic(batches, sigma2)
    if cutoff is None:
        if sigma2 is not None:
            kept = len(_valid(batches, need_sigma2=False))
            cutoff = chi_sq_cutoff(kept, alpha)
        else:
            kept = len(_valid(batches, need_sigma2=True))
            n = next(b.n for b in batches if b.valid)
            cutoff = t_square_cutoff(n, kept, alpha, draws, seed)
    return TestResult(statistic=stat, cutoff=cutoff, alpha=alpha,
                      reject=stat > cutoff, method="chi_sq_combination")


def simultaneous_bands(batches: Sequence[BatchEstimate], alpha: float,
                       sigma2: Optional[float] = None) -> BandSet:
    """Bonferroni-corrected per-batch margin intervals with joint coverage.

    Half-width of batch t is z_(1-alpha/(2T)) * sqrt(var_t * n / (N0*N1)).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    kept = _valid(batches, need_sigma2=sigma2 is None)
    if not kept:
        raise ValueError("no valid batches")
    T = len(kept)
    z = norm_ppf(1.0 - alpha / (2.0 * T))
    t_index, lower, upper = [], [], []
    for b in kept:
        var = sigma2 if sigma2 is not None else b.sigma2_hat
        half = z * math.sqrt(var * b.n / (b.n0 * b.n1))
        t_index.append(b.t)
        lower.append(b.delta_hat - half)
        upper.append(b.delta_hat + half)
    return BandSet(t_index=t_index, lower=lower, upper=upper, alpha=alpha,
                   excluded=len(batches) - T)


def normal_test(statistic: float, alpha: float,
                cutoff: Optional[float] = None) -> TestResult:
    """Two-sided standard-normal referencing with strict rejection at the cutoff.

    alpha = 1 degenerates to cutoff 0 (reject any nonzero statistic).
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    if cutoff is None:
        cutoff = 0.0 if alpha == 1.0 else norm_ppf(1.0 - alpha / 2.0)
    p = 2.0 * (1.0 - norm_cdf(abs(statistic)))
    return TestResult(statistic=statistic, cutoff=cutoff, alpha=alpha,
                      reject=abs(statistic) > cutoff, method="normal", p_value=p)
