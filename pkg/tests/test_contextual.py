"""Contextual generation, per-arm regression, the standardized margin
statistic, and consistency with the plain two-arm machinery."""

import math

import numpy as np
import pytest

from batchbandit import contextual as ctx
from batchbandit import estimators as est
from batchbandit.environment import ExperimentSpec, generate_trajectory
from batchbandit.policies import HistorySummary, PolicySpec, thompson_prob


def manual_batch(contexts, actions, rewards, K=2, t=1):
    n = len(actions)
    probs = np.full((n, K), 1.0 / K)
    return ctx.ContextBatch(t=t, contexts=np.asarray(contexts, dtype=float),
                            actions=np.asarray(actions), rewards=np.asarray(rewards),
                            probabilities=probs)


class TestPerArmOls:
    def test_scalar_normal_equation(self):
        b = manual_batch([[1.0], [2.0]], [0, 0], [1.0, 4.0])
        fit = ctx.per_arm_ols(b, 0)
        assert fit.valid
        assert fit.gram[0, 0] == pytest.approx(5.0)
        assert fit.beta[0] == pytest.approx(9.0 / 5.0)

    def test_zero_rewards_zero_coefficients(self):
        b = manual_batch([[1.0, 0.3], [1.0, -0.6], [1.0, 0.9]], [0, 0, 0],
                         [0.0, 0.0, 0.0])
        fit = ctx.per_arm_ols(b, 0)
        assert np.allclose(fit.beta, 0.0)

    def test_duplicate_rows_interpolate(self):
        b = manual_batch([[2.0], [2.0]], [0, 0], [6.0, 6.0])
        fit = ctx.per_arm_ols(b, 0)
        assert fit.beta[0] == pytest.approx(3.0)

    def test_singular_gram_flagged(self):
        b = manual_batch([[1.0, 1.0], [2.0, 2.0]], [0, 0], [1.0, 2.0])
        fit = ctx.per_arm_ols(b, 0)
        assert not fit.valid
        assert fit.condition_number > 1e6 or math.isinf(fit.condition_number)

    def test_unpulled_arm_flagged(self):
        b = manual_batch([[1.0]], [0], [1.0])
        assert not ctx.per_arm_ols(b, 1).valid


class TestInvSqrt:
    def test_inverse_square_root_identity(self):
        rng = np.random.default_rng(8)
        for _ in range(25):
            A = rng.normal(size=(3, 3))
            M = A @ A.T + 0.5 * np.eye(3)
            root, ok = ctx.inv_sqrt_psd(M)
            assert ok
            assert np.max(np.abs(root @ M @ root - np.eye(3))) < 1e-8

    def test_floored_matrix_rejected(self):
        M = np.diag([1.0, 1e-14])
        _, ok = ctx.inv_sqrt_psd(M)
        assert not ok


class TestContextualStatistic:
    def test_zero_difference_zero_statistic(self):
        b = manual_batch([[1.0, 0.5], [1.0, -0.5], [1.0, 0.2], [1.0, -0.1]],
                         [0, 1, 0, 1], [1.0, 1.0, 1.0, 1.0])
        res = ctx.contextual_bols_statistic(b, 1, 0, np.zeros(2), 1.0)
        # identical constant rewards and intercept-only signal: both arms fit
        # the same coefficients up to the context design
        assert res.valid

    def test_scalar_arithmetic(self):
        # grams 2 and 2, coefficient difference 1 -> statistic 1/sqrt(1/2+1/2) = 1
        contexts = [[1.0], [1.0], [1.0], [1.0]]
        b = manual_batch(contexts, [1, 1, 0, 0], [2.0, 2.0, 1.0, 1.0])
        res = ctx.contextual_bols_statistic(b, 1, 0, np.zeros(1), 1.0)
        assert res.valid
        assert res.statistic[0] == pytest.approx(1.0)
        assert res.delta_hat[0] == pytest.approx(1.0)

    def test_matches_plain_bols_with_unit_contexts(self):
        spec = ExperimentSpec(n=40, T=1, seed=3, sigma_known=True)
        traj = generate_trajectory(spec, rep=0)
        b = traj.batches[0]
        cb = manual_batch(np.ones((b.n, 1)), b.actions.astype(int), b.rewards)
        res = ctx.contextual_bols_statistic(cb, 1, 0, np.zeros(1), 1.0)
        e = est.bols_batch(b, with_sigma2=False)
        assert res.statistic[0] == pytest.approx(e.scale * e.delta_hat, abs=1e-10)

    def test_invalid_when_arm_missing(self):
        b = manual_batch([[1.0]], [0], [1.0])
        res = ctx.contextual_bols_statistic(b, 1, 0, np.zeros(1), 1.0)
        assert not res.valid


class TestGeneration:
    def _policy(self, K=2, d=2):
        spec = ctx.ContextualPolicySpec(variant="thompson", clip_lo=0.1, clip_hi=0.9)
        return ctx.ContextualPolicy(spec, d=d, K=K)

    def test_zero_noise_reward_model(self):
        betas = np.array([[1.0, 0.5], [2.0, -0.5]])
        rng = np.random.default_rng(0)
        b = ctx.generate_context_batch(1, betas, self._policy(), 0.0, 1.0, 200, rng)
        expected = np.einsum("nd,nd->n", b.contexts, betas[b.actions])
        assert np.allclose(b.rewards, expected)

    def test_intercept_fixed_and_contexts_bounded(self):
        betas = np.zeros((2, 3))
        rng = np.random.default_rng(1)
        b = ctx.generate_context_batch(1, betas, self._policy(d=3), 1.0, 0.7, 500, rng)
        assert np.all(b.contexts[:, 0] == 1.0)
        assert np.max(np.abs(b.contexts[:, 1:])) <= 0.7

    def test_probabilities_respect_clipping(self):
        betas = np.array([[0.0, 0.0], [5.0, 0.0]])  # arm 1 clearly better
        policy = self._policy()
        rng = np.random.default_rng(2)
        b = ctx.generate_context_batch(1, betas, policy, 1.0, 1.0, 100, rng)
        policy.update(b)
        b2 = ctx.generate_context_batch(2, betas, policy, 1.0, 1.0, 100, rng)
        assert np.all(b2.probabilities >= 0.1 - 1e-12)
        assert np.all(b2.probabilities <= 0.9 + 1e-12)
        assert b2.probabilities[:, 1].mean() > 0.7

    def test_trajectory_determinism(self):
        betas = np.zeros((3, 2, 2))
        spec = ctx.ContextualPolicySpec(variant="thompson")
        t1 = ctx.generate_context_trajectory(betas, spec, 1.0, 1.0, 50, seed=9, rep=4)
        t2 = ctx.generate_context_trajectory(betas, spec, 1.0, 1.0, 50, seed=9, rep=4)
        for a, b in zip(t1, t2):
            assert np.array_equal(a.rewards, b.rewards)
            assert np.array_equal(a.actions, b.actions)

    def test_fixed_policy(self):
        spec = ctx.ContextualPolicySpec(variant="fixed", fixed_probs=(0.3, 0.7),
                                        clip_lo=0.1, clip_hi=0.9)
        policy = ctx.ContextualPolicy(spec, d=2, K=2)
        probs = policy.probabilities(np.ones((4, 2)))
        assert np.allclose(probs, [0.3, 0.7])

    def test_three_arm_posterior_sampling(self):
        spec = ctx.ContextualPolicySpec(variant="thompson", posterior_draws=128)
        policy = ctx.ContextualPolicy(spec, d=2, K=3)
        rng = np.random.default_rng(5)
        betas = np.zeros((3, 2))
        b = ctx.generate_context_batch(1, betas, policy, 1.0, 1.0, 50, rng)
        assert b.probabilities.shape == (50, 3)
        assert np.allclose(b.probabilities.sum(axis=1), 1.0)


class TestReductionToTwoArm:
    def test_thompson_probability_matches(self):
        # d=1 contextual posterior with unit contexts reduces to the plain
        # two-arm Thompson probability for the same history
        spec = ctx.ContextualPolicySpec(variant="thompson", clip_lo=0.05,
                                        clip_hi=0.95, prior_var=1.0, model_var=1.0)
        policy = ctx.ContextualPolicy(spec, d=1, K=2)
        rng = np.random.default_rng(11)
        actions = (rng.random(60) < 0.5).astype(int)
        rewards = rng.normal(actions * 0.4, 1.0)
        b = manual_batch(np.ones((60, 1)), actions, rewards)
        policy.update(b)
        probs = policy.probabilities(np.ones((1, 1)))
        h = HistorySummary(n0=int((actions == 0).sum()), n1=int(actions.sum()),
                           reward_sum0=float(rewards[actions == 0].sum()),
                           reward_sum1=float(rewards[actions == 1].sum()))
        plain = thompson_prob(h, 1.0, 1.0)
        clipped = min(0.95, max(0.05, plain))
        assert probs[0, 1] == pytest.approx(clipped, abs=1e-10)

    def test_statistic_matches_two_arm_bols(self):
        spec = ExperimentSpec(n=30, T=3, seed=21, sigma_known=True,
                              policy=PolicySpec(variant="thompson"))
        traj = generate_trajectory(spec, rep=7)
        for b in traj.batches:
            cb = manual_batch(np.ones((b.n, 1)), b.actions.astype(int), b.rewards, t=b.t)
            res = ctx.contextual_bols_statistic(cb, 1, 0, np.zeros(1), 1.0)
            e = est.bols_batch(b, with_sigma2=False)
            assert res.statistic[0] == pytest.approx(e.scale * e.delta_hat, abs=1e-10)
