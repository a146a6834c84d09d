"""Contextual K-arm batch generation and the per-batch margin statistic.

Rewards follow reward = context . beta[arm] + noise with a fixed intercept
coordinate. Per-batch, per-arm OLS fits feed a standardized margin statistic
between two arms whose stacked coordinates are asymptotically standard
normal and independent across batches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .gaussian import norm_cdf
from .streams import stream

EIG_FLOOR_SCALE = 1e-8  # relative floor for matrix square roots and solves


@dataclass
class ContextBatch:
    """One batch of contexts, actions, rewards, and the probabilities used."""

    t: int
    contexts: np.ndarray       # n x d, first column fixed at 1
    actions: np.ndarray        # n, values in 0..K-1
    rewards: np.ndarray        # n
    probabilities: np.ndarray  # n x K, per-context action probabilities

    def __post_init__(self):
        self.contexts = np.asarray(self.contexts, dtype=float)
        self.actions = np.asarray(self.actions, dtype=np.int64)
        self.rewards = np.asarray(self.rewards, dtype=float)
        self.probabilities = np.asarray(self.probabilities, dtype=float)
        n = self.contexts.shape[0]
        if not (self.actions.size == n and self.rewards.size == n
                and self.probabilities.shape[0] == n):
            raise ValueError("context/action/reward/probability lengths disagree")
        K = self.probabilities.shape[1]
        if self.actions.min(initial=0) < 0 or self.actions.max(initial=0) >= K:
            raise ValueError("action out of range")

    @property
    def n(self) -> int:
        return self.contexts.shape[0]

    @property
    def d(self) -> int:
        return self.contexts.shape[1]

    @property
    def num_arms(self) -> int:
        return self.probabilities.shape[1]


@dataclass
class ArmGram:
    """Per-arm Gram matrix sum(c c^T) and moment vector sum(c * reward)."""

    gram: np.ndarray
    moment: np.ndarray

    @classmethod
    def empty(cls, d: int) -> "ArmGram":
        return cls(gram=np.zeros((d, d)), moment=np.zeros(d))

    @classmethod
    def from_batch(cls, batch: ContextBatch, k: int) -> "ArmGram":
        mask = batch.actions == k
        C = batch.contexts[mask]
        return cls(gram=C.T @ C, moment=C.T @ batch.rewards[mask])

    def add(self, other: "ArmGram") -> None:
        self.gram += other.gram
        self.moment += other.moment


@dataclass
class ArmOls:
    beta: np.ndarray
    gram: np.ndarray
    valid: bool = True
    reason: Optional[str] = None
    condition_number: float = math.nan


def per_arm_ols(batch: ContextBatch, k: int) -> ArmOls:
    """Solve the arm-k normal equations from one batch."""
    g = ArmGram.from_batch(batch, k)
    d = batch.d
    eigvals = np.linalg.eigvalsh(g.gram)
    floor = EIG_FLOOR_SCALE * max(np.trace(g.gram), 1.0) / d
    if eigvals[0] <= floor:
        cond = math.inf if eigvals[0] <= 0 else float(eigvals[-1] / eigvals[0])
        return ArmOls(beta=np.full(d, np.nan), gram=g.gram, valid=False,
                      reason="singular arm Gram matrix", condition_number=cond)
    beta = np.linalg.solve(g.gram, g.moment)
    return ArmOls(beta=beta, gram=g.gram,
                  condition_number=float(eigvals[-1] / eigvals[0]))


def inv_sqrt_psd(M: np.ndarray, floor_scale: float = EIG_FLOOR_SCALE):
    """Inverse symmetric square root via eigendecomposition.

    Returns (matrix, ok); ok is False when any eigenvalue falls below the
    relative floor floor_scale * trace(M) / d.
    """
    d = M.shape[0]
    vals, vecs = np.linalg.eigh(0.5 * (M + M.T))
    floor = floor_scale * max(np.trace(M), 0.0) / d
    if vals[0] <= floor:
        return np.full_like(M, np.nan), False
    return (vecs / np.sqrt(vals)) @ vecs.T, True


@dataclass
class ContextStat:
    """Standardized margin statistic between two arms for one batch."""

    t: int
    statistic: np.ndarray
    delta_hat: np.ndarray
    valid: bool = True
    reason: Optional[str] = None


def contextual_bols_statistic(batch: ContextBatch, x: int, y: int,
                              delta: np.ndarray, sigma2: float) -> ContextStat:
    """M^(-1/2) ((beta_x - beta_y) - delta) / sigma with M = Gx^-1 + Gy^-1.

    Stacked over batches, the coordinates are asymptotically i.i.d. standard
    normal under the true margin, which is what the tests exercise.
    """
    d = batch.d
    delta = np.asarray(delta, dtype=float)
    fit_x = per_arm_ols(batch, x)
    fit_y = per_arm_ols(batch, y)
    if not (fit_x.valid and fit_y.valid):
        reason = fit_x.reason if not fit_x.valid else fit_y.reason
        return ContextStat(t=batch.t, statistic=np.full(d, np.nan),
                           delta_hat=np.full(d, np.nan), valid=False, reason=reason)
    M = np.linalg.inv(fit_x.gram) + np.linalg.inv(fit_y.gram)
    root, ok = inv_sqrt_psd(M)
    if not ok:
        return ContextStat(t=batch.t, statistic=np.full(d, np.nan),
                           delta_hat=np.full(d, np.nan), valid=False,
                           reason="eigenvalue below tolerance")
    diff = fit_x.beta - fit_y.beta
    return ContextStat(t=batch.t, statistic=root @ (diff - delta) / math.sqrt(sigma2),
                       delta_hat=diff)


# ---------------------------------------------------------------------------
# Context generation and policies
# ---------------------------------------------------------------------------

@dataclass
class ContextualPolicySpec:
    """Contextual action-probability rule with conditional clipping.

    thompson -- per-arm Normal(0, prior_var * I) priors; the per-context
                probability that an arm is best is computed in closed form
                for K = 2 and by posterior sampling otherwise.
    fixed    -- constant probability vector for every context.
    """

    variant: str = "thompson"
    prior_var: float = 1.0
    model_var: float = 1.0
    clip_lo: float = 0.1
    clip_hi: float = 0.9
    fixed_probs: Optional[Sequence[float]] = None
    posterior_draws: int = 256

    def __post_init__(self):
        if self.variant not in ("thompson", "fixed"):
            raise ValueError(f"unknown contextual policy {self.variant!r}")
        if not 0.0 < self.clip_lo <= self.clip_hi < 1.0:
            raise ValueError("clip bounds must satisfy 0 < lo <= hi < 1")
        if self.variant == "fixed" and self.fixed_probs is None:
            raise ValueError("fixed policy requires fixed_probs")


def clip_renormalize(probs: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Clamp each arm's probability to [lo, hi], then renormalize rows."""
    clipped = np.clip(probs, lo, hi)
    return clipped / clipped.sum(axis=-1, keepdims=True)


class ContextualPolicy:
    """Stateful wrapper: accumulates per-arm Grams across completed batches."""

    def __init__(self, spec: ContextualPolicySpec, d: int, K: int):
        self.spec = spec
        self.d = d
        self.K = K
        self.grams = [ArmGram.empty(d) for _ in range(K)]

    def update(self, batch: ContextBatch) -> None:
        for k in range(self.K):
            self.grams[k].add(ArmGram.from_batch(batch, k))

    def _posteriors(self):
        s = self.spec
        means, covs = [], []
        for g in self.grams:
            precision = (s.model_var / s.prior_var) * np.eye(self.d) + g.gram
            cov = s.model_var * np.linalg.inv(precision)
            means.append(np.linalg.solve(precision, g.moment))
            covs.append(cov)
        return means, covs

    def probabilities(self, contexts: np.ndarray,
                      rng: Optional[np.random.Generator] = None) -> np.ndarray:
        s = self.spec
        n = contexts.shape[0]
        if s.variant == "fixed":
            base = np.tile(np.asarray(s.fixed_probs, dtype=float), (n, 1))
            return clip_renormalize(base, s.clip_lo, s.clip_hi)
        means, covs = self._posteriors()
        if self.K == 2:
            shift = contexts @ (means[1] - means[0])
            spread = np.einsum("ij,jk,ik->i", contexts, covs[0] + covs[1], contexts)
            p1 = norm_cdf(shift / np.sqrt(np.maximum(spread, 1e-300)))
            base = np.column_stack([1.0 - p1, p1])
        else:
            if rng is None:
                raise ValueError("posterior sampling for K > 2 needs an rng")
            m = s.posterior_draws
            draws = np.empty((m, self.K, self.d))
            for k in range(self.K):
                draws[:, k, :] = rng.multivariate_normal(means[k], covs[k], size=m)
            scores = np.einsum("nd,mkd->nmk", contexts, draws)
            best = scores.argmax(axis=2)
            base = np.stack([(best == k).mean(axis=1) for k in range(self.K)], axis=1)
        return clip_renormalize(base, s.clip_lo, s.clip_hi)


def generate_context_batch(t: int, betas: np.ndarray, policy: ContextualPolicy,
                           sigma2: float, u: float, n: int,
                           rng: np.random.Generator) -> ContextBatch:
    """Draw one contextual batch under the policy's current state.

    ``betas`` is K x d. Contexts have a fixed intercept coordinate and the
    remaining d-1 coordinates i.i.d. Uniform(-u, u).
    """
    betas = np.asarray(betas, dtype=float)
    K, d = betas.shape
    contexts = np.ones((n, d))
    if d > 1:
        contexts[:, 1:] = rng.uniform(-u, u, size=(n, d - 1))
    probs = policy.probabilities(contexts, rng=rng)
    cum = np.cumsum(probs, axis=1)
    udraw = rng.random(n)
    actions = (udraw[:, None] >= cum).sum(axis=1)
    signal = np.einsum("nd,nd->n", contexts, betas[actions])
    rewards = signal + rng.standard_normal(n) * math.sqrt(sigma2)
    return ContextBatch(t=t, contexts=contexts, actions=actions,
                        rewards=rewards, probabilities=probs)


def generate_context_trajectory(betas_per_batch: np.ndarray,
                                policy_spec: ContextualPolicySpec,
                                sigma2: float, u: float, n: int,
                                seed: int, rep: int = 0) -> list[ContextBatch]:
    """T contextual batches with the policy state carried across batches."""
    betas_per_batch = np.asarray(betas_per_batch, dtype=float)
    T, K, d = betas_per_batch.shape
    policy = ContextualPolicy(policy_spec, d=d, K=K)
    batches = []
    for t in range(1, T + 1):
        rng = stream(seed, rep, t)
        batch = generate_context_batch(t, betas_per_batch[t - 1], policy,
                                       sigma2, u, n, rng)
        batches.append(batch)
        policy.update(batch)
    return batches
