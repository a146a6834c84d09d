"""Action-probability rules for two-arm batched bandits.

Each rule maps the pooled history of completed batches to the probability of
pulling arm 1 in the next batch. The harness composes every rule with the
clipping constraint so the returned propensity always stays inside
[clip_lo, clip_hi], which is what makes post-experiment inference possible.

All functions are pure; there is no internal state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .gaussian import norm_cdf

VARIANTS = ("epsilon_greedy", "thompson", "ucb")


@dataclass
class PolicySpec:
    """Which bandit algorithm to run and its parameters.

    ``delta`` (UCB confidence level) defaults to 1/(n*T) at simulation time
    when left as None. ``clip_lo``/``clip_hi`` may be left as None and
    inherited from the experiment that embeds this spec.
    """

    variant: str = "thompson"
    epsilon: float = 0.1
    prior_mean: float = 0.0
    prior_var: float = 1.0
    model_var: float = 1.0
    delta: Optional[float] = None
    clip_lo: Optional[float] = None
    clip_hi: Optional[float] = None
    first_batch_prob: float = 0.5

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown policy variant {self.variant!r}")
        if self.variant == "epsilon_greedy" and not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.variant == "thompson":
            if self.prior_var <= 0.0 or self.model_var <= 0.0:
                raise ValueError("thompson prior_var and model_var must be positive")
        if self.delta is not None and not 0.0 < self.delta < 1.0:
            raise ValueError("ucb delta must lie in (0, 1)")
        if self.clip_lo is not None and self.clip_hi is not None:
            _check_clip(self.clip_lo, self.clip_hi)
        if not 0.0 <= self.first_batch_prob <= 1.0:
            raise ValueError("first_batch_prob must be a probability")

    def with_clip(self, lo: float, hi: float) -> "PolicySpec":
        return replace(self, clip_lo=lo, clip_hi=hi)

    def to_json(self) -> dict:
        doc = {"variant": self.variant}
        if self.variant == "epsilon_greedy":
            doc["epsilon"] = self.epsilon
        elif self.variant == "thompson":
            doc.update(prior_mean=self.prior_mean, prior_var=self.prior_var,
                       model_var=self.model_var)
        elif self.variant == "ucb" and self.delta is not None:
            doc["delta"] = self.delta
        if self.clip_lo is not None:
            doc["clip_lo"] = self.clip_lo
        if self.clip_hi is not None:
            doc["clip_hi"] = self.clip_hi
        doc["first_batch_prob"] = self.first_batch_prob
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "PolicySpec":
        known = {"variant", "epsilon", "prior_mean", "prior_var", "model_var",
                 "delta", "clip_lo", "clip_hi", "first_batch_prob"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown PolicySpec fields: {sorted(unknown)}")
        return cls(**doc)


@dataclass
class HistorySummary:
    """Per-arm pull counts and reward sums over completed batches."""

    n0: int = 0
    n1: int = 0
    reward_sum0: float = 0.0
    reward_sum1: float = 0.0

    def update(self, n0: int, n1: int, reward_sum0: float, reward_sum1: float) -> None:
        self.n0 += int(n0)
        self.n1 += int(n1)
        self.reward_sum0 += float(reward_sum0)
        self.reward_sum1 += float(reward_sum1)

    def add_batch(self, batch) -> None:
        """Accumulate a BatchRecord-like object (actions/rewards arrays)."""
        a = batch.actions
        r = batch.rewards
        n1 = int(a.sum())
        s1 = float((r * a).sum())
        self.update(len(a) - n1, n1, float(r.sum()) - s1, s1)


def _check_clip(lo: float, hi: float) -> None:
    if not 0.0 < lo <= hi < 1.0:
        raise ValueError(f"clip bounds must satisfy 0 < lo <= hi < 1, got [{lo}, {hi}]")


def clip_prob(p: float, lo: float, hi: float) -> float:
    """Clamp an action probability into [lo, hi]."""
    _check_clip(lo, hi)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    return min(hi, max(lo, p))


def epsilon_greedy_prob(h: HistorySummary, epsilon: float,
                        first_batch_prob: float = 0.5) -> float:
    """Pre-clipping arm-1 probability for epsilon-greedy.

    1 - eps/2 when the pooled arm-1 mean strictly exceeds the pooled arm-0
    mean, eps/2 otherwise (ties included). Falls back to first_batch_prob
    while either arm has no pulls.
    """
    if h.n0 == 0 or h.n1 == 0:
        return first_batch_prob
    if h.reward_sum1 / h.n1 > h.reward_sum0 / h.n0:
        return 1.0 - epsilon / 2.0
    return epsilon / 2.0


def thompson_prob(h: HistorySummary, prior_var: float, model_var: float,
                  prior_mean: float = 0.0) -> float:
    """Pre-clipping posterior probability that arm 1 beats arm 0.

    Independent Normal(prior_mean, prior_var) priors on the arm means with
    Normal(mean, model_var) rewards give conjugate posteriors; with unit
    prior variance the posterior mean of arm k reduces to
    sum_rewards_k / (model_var + pulls_k). Defined for any history,
    including zero pulls.
    """
    if prior_var <= 0.0 or model_var <= 0.0:
        raise ValueError("prior_var and model_var must be positive")

    def posterior(n, s):
        precision = 1.0 / prior_var + n / model_var
        mean = (prior_mean / prior_var + s / model_var) / precision
        return mean, 1.0 / precision

    m1, v1 = posterior(h.n1, h.reward_sum1)
    m0, v0 = posterior(h.n0, h.reward_sum0)
    return norm_cdf((m1 - m0) / math.sqrt(v1 + v0))


def ucb_prob(h: HistorySummary, delta: float, pi_hi: float,
             first_batch_prob: float = 0.5) -> float:
    """Pre-clipping arm-1 probability for UCB.

    Upper confidence bound per arm is mean + sqrt(2*log(1/delta)/pulls),
    infinite for an unpulled arm; arm 1 gets pi_hi when its bound strictly
    exceeds arm 0's, else 1 - pi_hi.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if h.n0 == 0 and h.n1 == 0:
        return first_batch_prob
    bonus = 2.0 * math.log(1.0 / delta)
    u1 = math.inf if h.n1 == 0 else h.reward_sum1 / h.n1 + math.sqrt(bonus / h.n1)
    u0 = math.inf if h.n0 == 0 else h.reward_sum0 / h.n0 + math.sqrt(bonus / h.n0)
    return pi_hi if u1 > u0 else 1.0 - pi_hi


def propensity(spec: PolicySpec, h: HistorySummary, n: int, T: int) -> float:
    """Post-clipping arm-1 probability for the next batch under ``spec``."""
    if spec.clip_lo is None or spec.clip_hi is None:
        raise ValueError("policy clip bounds are unset")
    if spec.variant == "epsilon_greedy":
        p = epsilon_greedy_prob(h, spec.epsilon, spec.first_batch_prob)
    elif spec.variant == "thompson":
        p = thompson_prob(h, spec.prior_var, spec.model_var, spec.prior_mean)
    else:
        delta = spec.delta if spec.delta is not None else 1.0 / (n * T)
        p = ucb_prob(h, delta, spec.clip_hi, spec.first_batch_prob)
    return clip_prob(p, spec.clip_lo, spec.clip_hi)
