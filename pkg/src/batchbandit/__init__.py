"""Batched-bandit simulation and post-experiment inference toolkit."""

from .environment import (BatchRecord, ExperimentSpec, Trajectory, TrendSpec,
                          build_trend, generate_batch, generate_trajectory)
from .policies import (HistorySummary, PolicySpec, clip_prob,
                       epsilon_greedy_prob, propensity, thompson_prob, ucb_prob)

__all__ = [
    "BatchRecord", "ExperimentSpec", "Trajectory", "TrendSpec",
    "build_trend", "generate_batch", "generate_trajectory",
    "HistorySummary", "PolicySpec", "clip_prob", "epsilon_greedy_prob",
    "propensity", "thompson_prob", "ucb_prob",
]

__version__ = "0.1.0"
