"""Action-probability rules: clipping, formulas, fallbacks, and the
non-concentration behaviour that motivates the whole toolkit."""

import numpy as np
import pytest

from batchbandit.environment import ExperimentSpec, TrendSpec, generate_trajectory
from batchbandit.policies import (HistorySummary, PolicySpec, clip_prob,
                                  epsilon_greedy_prob, propensity,
                                  thompson_prob, ucb_prob)


def hist(n0=0, n1=0, s0=0.0, s1=0.0):
    return HistorySummary(n0=n0, n1=n1, reward_sum0=s0, reward_sum1=s1)


class TestClip:
    def test_clamps_high(self):
        assert clip_prob(0.99, 0.1, 0.9) == 0.9

    def test_interior_point_unchanged(self):
        assert clip_prob(0.5, 0.1, 0.9) == 0.5

    def test_clamps_low(self):
        assert clip_prob(0.0, 0.05, 0.95) == 0.05

    def test_rejects_inverted_bounds(self):
        with pytest.raises(ValueError):
            clip_prob(0.5, 0.9, 0.1)

    def test_rejects_degenerate_zero_one(self):
        with pytest.raises(ValueError):
            clip_prob(0.5, 0.0, 0.9)
        with pytest.raises(ValueError):
            clip_prob(0.5, 0.1, 1.0)


class TestEpsilonGreedy:
    def test_better_arm_one(self):
        h = hist(n0=2, n1=2, s0=0.0, s1=2.0)  # means 0 and 1
        assert epsilon_greedy_prob(h, 0.1) == pytest.approx(0.95)

    def test_tie_takes_otherwise_branch(self):
        h = hist(n0=2, n1=2, s0=2.0, s1=2.0)
        assert epsilon_greedy_prob(h, 0.1) == pytest.approx(0.05)

    def test_empty_history_default(self):
        assert epsilon_greedy_prob(hist(), 0.1) == 0.5

    def test_one_empty_arm_default(self):
        assert epsilon_greedy_prob(hist(n0=3, s0=1.0), 0.1) == 0.5

    def test_shift_invariance(self):
        # adding a constant to all rewards cannot flip the mean comparison
        h = hist(n0=4, n1=6, s0=1.0, s1=9.0)
        shifted = hist(n0=4, n1=6, s0=1.0 + 4 * 7.5, s1=9.0 + 6 * 7.5)
        assert epsilon_greedy_prob(h, 0.2) == epsilon_greedy_prob(shifted, 0.2)


class TestThompson:
    def test_empty_history_is_half(self):
        assert thompson_prob(hist(), 1.0, 1.0) == pytest.approx(0.5)

    def test_closed_form_posterior(self):
        # one pull per arm, reward sums (1, 0): posterior mean diff 0.5,
        # posterior variance 1/2 + 1/2 = 1
        h = hist(n0=1, n1=1, s0=0.0, s1=1.0)
        assert thompson_prob(h, 1.0, 1.0) == pytest.approx(0.6914624612740131, abs=1e-9)

    def test_composes_with_clip(self):
        h = hist(n0=50, n1=50, s0=0.0, s1=500.0)
        p = thompson_prob(h, 1.0, 1.0)
        assert p > 0.99
        assert clip_prob(p, 0.1, 0.9) == 0.9

    def test_monotone_in_arm1_rewards(self):
        probs = [thompson_prob(hist(n0=5, n1=5, s0=2.0, s1=s), 1.0, 1.0)
                 for s in np.linspace(-3.0, 6.0, 25)]
        assert all(b >= a for a, b in zip(probs, probs[1:]))

    def test_rejects_bad_variances(self):
        with pytest.raises(ValueError):
            thompson_prob(hist(), 0.0, 1.0)


class TestUcb:
    def test_unpulled_arm_is_infinite(self):
        assert ucb_prob(hist(n0=3, s0=3.0), 0.1, 0.9) == 0.9

    def test_equal_counts_mean_decides(self):
        h = hist(n0=4, n1=4, s0=0.0, s1=4.0)
        assert ucb_prob(h, 0.1, 0.9) == 0.9

    def test_both_unpulled_default(self):
        assert ucb_prob(hist(), 0.1, 0.9) == 0.5

    def test_tie_takes_low_branch(self):
        h = hist(n0=4, n1=4, s0=2.0, s1=2.0)
        assert ucb_prob(h, 0.1, 0.9) == pytest.approx(0.1)


class TestPropensityDispatch:
    @pytest.mark.parametrize("variant", ["epsilon_greedy", "thompson", "ucb"])
    def test_always_inside_clip_range(self, variant):
        spec = PolicySpec(variant=variant, clip_lo=0.2, clip_hi=0.7)
        rng = np.random.default_rng(7)
        for _ in range(200):
            h = hist(n0=int(rng.integers(0, 50)), n1=int(rng.integers(0, 50)),
                     s0=float(rng.normal(0, 10)), s1=float(rng.normal(0, 10)))
            p = propensity(spec, h, n=25, T=10)
            assert 0.2 <= p <= 0.7

    def test_requires_clip_bounds(self):
        with pytest.raises(ValueError):
            propensity(PolicySpec(variant="thompson"), hist(), 25, 10)

    def test_json_round_trip(self):
        spec = PolicySpec(variant="epsilon_greedy", epsilon=0.2,
                          clip_lo=0.1, clip_hi=0.9, first_batch_prob=0.5)
        assert PolicySpec.from_json(spec.to_json()) == spec


class TestNonConcentration:
    """Second-batch Thompson propensity under zero vs. unit margin."""

    N = 10_000
    REPS = 2000

    def _second_batch_probs(self, margin):
        trend = TrendSpec(variant="constant", beta0=0.0, beta1=margin)
        spec = ExperimentSpec(n=self.N, T=1, clip_lo=0.05, clip_hi=0.95,
                              sigma_known=True, trend=trend,
                              policy=PolicySpec(variant="thompson"), seed=99)
        pre, post = np.empty(self.REPS), np.empty(self.REPS)
        for rep in range(self.REPS):
            traj = generate_trajectory(spec, rep=rep)
            h = HistorySummary()
            h.add_batch(traj.batches[0])
            p = thompson_prob(h, 1.0, 1.0)
            pre[rep] = p
            post[rep] = clip_prob(p, 0.05, 0.95)
        return pre, post

    def test_zero_margin_probabilities_spread_out(self):
        pre, _ = self._second_batch_probs(0.0)
        assert pre.std() > 0.2  # approaches Uniform(0,1), sd ~= 0.289

    def test_unit_margin_probabilities_pin_to_ceiling(self):
        _, post = self._second_batch_probs(1.0)
        assert (post == 0.95).mean() >= 0.95
