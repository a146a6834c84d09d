"""Domain types and reward-generating environments for batched bandits.

An experiment runs T batches of n simultaneous arm pulls. Within a batch
actions are i.i.d. Bernoulli(propensity) and rewards follow the two-arm
linear model reward = (1-A)*beta0_t + A*beta1_t + noise. Arm means may
drift from batch to batch (non-stationary baseline and/or margin).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import policies as pol
from .streams import stream

TREND_VARIANTS = ("constant", "explicit", "baseline_shift")
BASELINE_KINDS = ("quadratic", "sinusoidal", "explicit")


@dataclass
class TrendSpec:
    """Per-batch arm means (beta0_t, beta1_t).

    constant        -- both means fixed across batches.
    explicit        -- caller supplies all T pairs.
    baseline_shift  -- a moving baseline with the margin held exactly at
                       ``margin``: beta1_t - beta0_t == margin for every t.
    """

    variant: str = "constant"
    beta0: float = 0.0
    beta1: float = 0.0
    pairs: Optional[Sequence[Sequence[float]]] = None
    margin: float = 0.0
    baseline: str = "quadratic"
    amplitude: float = 1.0
    period: Optional[float] = None
    baseline_values: Optional[Sequence[float]] = None

    def __post_init__(self):
        if self.variant not in TREND_VARIANTS:
            raise ValueError(f"unknown trend variant {self.variant!r}")
        if self.variant == "explicit" and not self.pairs:
            raise ValueError("explicit trend requires pairs")
        if self.variant == "baseline_shift":
            if self.baseline not in BASELINE_KINDS:
                raise ValueError(f"unknown baseline kind {self.baseline!r}")
            if self.baseline == "explicit" and not self.baseline_values:
                raise ValueError("explicit baseline requires baseline_values")

    def null_version(self) -> "TrendSpec":
        """Zero-margin twin of this trend (baselines preserved)."""
        if self.variant == "constant":
            return replace(self, beta1=self.beta0)
        if self.variant == "explicit":
            return replace(self, pairs=[(b0, b0) for b0, _ in self.pairs])
        return replace(self, margin=0.0)

    def to_json(self) -> dict:
        doc = {"variant": self.variant}
        if self.variant == "constant":
            doc.update(beta0=self.beta0, beta1=self.beta1)
        elif self.variant == "explicit":
            doc["pairs"] = [list(map(float, p)) for p in self.pairs]
        else:
            doc.update(margin=self.margin, baseline=self.baseline,
                       amplitude=self.amplitude)
            if self.period is not None:
                doc["period"] = self.period
            if self.baseline_values is not None:
                doc["baseline_values"] = list(map(float, self.baseline_values))
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "TrendSpec":
        return cls(**doc)


def _exact_shift_pair(base: float, margin: float) -> tuple[float, float]:
    """Pair (beta0, beta1) near ``base`` with beta1 - beta0 == margin.

    Exact equality holds whenever the margin is representable as a float
    difference at the baseline's magnitude (true for dyadic margins like
    0.25 at any sane baseline). Otherwise the closest pair is returned,
    off by at most one ulp of the baseline.
    """
    b0, b1 = base, base + margin
    for _ in range(4):
        if b1 - b0 == margin:
            return b0, b1
        b0 = b1 - margin
        if b1 - b0 == margin:
            return b0, b1
        b1 = b0 + margin
    # No exact pair exists in this binade; nudge by single ulps as a last try.
    for k in range(1, 3):
        for cand in (math.nextafter(b0, b0 - k), math.nextafter(b0, b0 + k)):
            if b1 - cand == margin:
                return cand, b1
    return b0, b1


def build_trend(spec: TrendSpec, T: int) -> list[tuple[float, float]]:
    """Materialize per-batch mean pairs (beta0_t, beta1_t) for t = 1..T."""
    if T < 1:
        raise ValueError("T must be at least 1")
    if spec.variant == "constant":
        return [(spec.beta0, spec.beta1)] * T
    if spec.variant == "explicit":
        if len(spec.pairs) != T:
            raise ValueError(f"explicit trend has {len(spec.pairs)} pairs, expected {T}")
        return [(float(b0), float(b1)) for b0, b1 in spec.pairs]

    if spec.baseline == "explicit":
        if len(spec.baseline_values) != T:
            raise ValueError(
                f"explicit baseline has {len(spec.baseline_values)} values, expected {T}")
        bases = [float(b) for b in spec.baseline_values]
    elif spec.baseline == "quadratic":
        # Decreasing from `amplitude` at t=1 to 0 at t=T.
        span = max(T - 1, 1)
        bases = [spec.amplitude * (1.0 - ((t - 1) / span) ** 2) for t in range(1, T + 1)]
    else:
        period = spec.period if spec.period is not None else float(T)
        bases = [spec.amplitude * math.sin(2.0 * math.pi * (t - 1) / period)
                 for t in range(1, T + 1)]
    return [_exact_shift_pair(b, spec.margin) for b in bases]


def gaussian_noise(rng: np.random.Generator, n: int, sigma2: float) -> np.ndarray:
    return rng.standard_normal(n) * math.sqrt(sigma2)


NoiseFn = Callable[[np.random.Generator, int, float], np.ndarray]


@dataclass
class ExperimentSpec:
    """Full description of one batched-bandit experiment."""

    n: int = 25
    T: int = 25
    num_arms: int = 2
    clip_lo: float = 0.1
    clip_hi: float = 0.9
    noise_sigma2: Union[float, Sequence[float]] = 1.0
    sigma_known: bool = False
    trend: TrendSpec = field(default_factory=TrendSpec)
    policy: pol.PolicySpec = field(default_factory=pol.PolicySpec)
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("batch size n must be at least 2")
        if not self.sigma_known and self.n < 3:
            raise ValueError("n >= 3 required when the noise variance is estimated")
        if self.T < 1:
            raise ValueError("T must be at least 1")
        if not 0.0 < self.clip_lo <= self.clip_hi < 1.0:
            raise ValueError("clip bounds must satisfy 0 < lo <= hi < 1")
        sig = self.noise_sigma2
        if isinstance(sig, (int, float)):
            if sig < 0.0:
                raise ValueError("noise variance must be nonnegative")
        else:
            if len(sig) != self.T:
                raise ValueError("per-batch noise schedule must have length T")
            if any(s < 0.0 for s in sig):
                raise ValueError("noise variances must be nonnegative")
            self.noise_sigma2 = tuple(float(s) for s in sig)
        # The policy inherits the experiment clip bounds unless it pins its
        # own, in which case they must agree.
        if self.policy.clip_lo is None or self.policy.clip_hi is None:
            self.policy = self.policy.with_clip(self.clip_lo, self.clip_hi)
        elif (self.policy.clip_lo, self.policy.clip_hi) != (self.clip_lo, self.clip_hi):
            raise ValueError("policy clip bounds disagree with experiment clip bounds")

    def sigma2_at(self, t: int) -> float:
        """Noise variance for batch t (1-based)."""
        if isinstance(self.noise_sigma2, tuple):
            return self.noise_sigma2[t - 1]
        return float(self.noise_sigma2)

    def mean_pairs(self) -> list[tuple[float, float]]:
        return build_trend(self.trend, self.T)

    def true_margins(self) -> np.ndarray:
        return np.array([b1 - b0 for b0, b1 in self.mean_pairs()])

    def to_json(self) -> dict:
        sig = self.noise_sigma2
        return {
            "n": self.n,
            "T": self.T,
            "num_arms": self.num_arms,
            "clip_lo": self.clip_lo,
            "clip_hi": self.clip_hi,
            "noise_sigma2": list(sig) if isinstance(sig, tuple) else sig,
            "sigma_known": self.sigma_known,
            "trend": self.trend.to_json(),
            "policy": self.policy.to_json(),
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ExperimentSpec":
        doc = dict(doc)
        if "trend" in doc:
            doc["trend"] = TrendSpec.from_json(doc["trend"])
        if "policy" in doc:
            doc["policy"] = pol.PolicySpec.from_json(doc["policy"])
        return cls(**doc)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "ExperimentSpec":
        return cls.from_json(json.loads(text))


@dataclass
class BatchRecord:
    """Actions, rewards, and the propensity used to draw one batch."""

    t: int
    propensity: float
    actions: np.ndarray
    rewards: np.ndarray

    def __post_init__(self):
        self.actions = np.asarray(self.actions, dtype=np.int8)
        self.rewards = np.asarray(self.rewards, dtype=float)
        if self.actions.shape != self.rewards.shape:
            raise ValueError("actions and rewards must have equal length")

    @property
    def n(self) -> int:
        return self.actions.size

    @property
    def n1(self) -> int:
        return int(self.actions.sum())

    @property
    def n0(self) -> int:
        return self.n - self.n1

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "propensity": self.propensity,
            "actions": self.actions.tolist(),
            "rewards": self.rewards.tolist(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "BatchRecord":
        return cls(t=doc["t"], propensity=doc["propensity"],
                   actions=np.array(doc["actions"]), rewards=np.array(doc["rewards"]))


@dataclass
class Trajectory:
    """Ordered batches 1..T plus the spec that produced them."""

    spec: ExperimentSpec
    batches: list[BatchRecord]

    def __post_init__(self):
        if [b.t for b in self.batches] != list(range(1, len(self.batches) + 1)):
            raise ValueError("batch indices must run 1..T without gaps")

    def to_json(self) -> dict:
        return {"spec": self.spec.to_json(),
                "batches": [b.to_json() for b in self.batches]}

    @classmethod
    def from_json(cls, doc: dict) -> "Trajectory":
        return cls(spec=ExperimentSpec.from_json(doc["spec"]),
                   batches=[BatchRecord.from_json(b) for b in doc["batches"]])


def generate_batch(t: int, propensity: float, means: tuple[float, float],
                   sigma2: float, n: int, rng: np.random.Generator,
                   noise: NoiseFn = gaussian_noise) -> BatchRecord:
    """Draw one batch: i.i.d. Bernoulli(propensity) actions, linear-model rewards."""
    if not 0.0 <= propensity <= 1.0:
        raise ValueError("propensity must be a probability")
    if sigma2 < 0.0:
        raise ValueError("noise variance must be nonnegative")
    beta0, beta1 = means
    actions = (rng.random(n) < propensity).astype(np.int8)
    base = np.where(actions == 1, beta1, beta0)
    rewards = base + noise(rng, n, sigma2)
    return BatchRecord(t=t, propensity=float(propensity), actions=actions, rewards=rewards)


def generate_trajectory(spec: ExperimentSpec, rep: int = 0,
                        noise: NoiseFn = gaussian_noise) -> Trajectory:
    """Run the configured policy for T batches under replication ``rep``.

    Batch t draws from the stream keyed (seed, rep, t), so trajectories are
    reproducible for any execution order of replications.
    """
    pairs = spec.mean_pairs()
    history = pol.HistorySummary()
    batches = []
    for t in range(1, spec.T + 1):
        pi_t = pol.propensity(spec.policy, history, spec.n, spec.T)
        rng = stream(spec.seed, rep, t)
        batch = generate_batch(t, pi_t, pairs[t - 1], spec.sigma2_at(t),
                               spec.n, rng, noise)
        batches.append(batch)
        history.add_batch(batch)
    return Trajectory(spec=spec, batches=batches)
