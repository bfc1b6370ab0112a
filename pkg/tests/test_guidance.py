# -*- coding: utf-8 -*-
"""
引导层单元测试

测试目标:
1. ε / Θ 调度与学习率退火
2. 乘积重加权: 示例值、退化情形、归一化
3. 参考分布与符号损失
4. 奖励机塑形: 训练奖励与上报奖励分离
5. 配置校验
"""
import numpy as np
import pytest


def _uniform(n=5):
    from app.nn.distribution import distribution_from_logits
    return distribution_from_logits(np.zeros(n))


# ─── 调度 ──────────────────────────────────────────────────────────


class TestSchedule:
    """调度"""

    def test_epsilon_decay(self):
        """默认 (1, 0.4, 0, 2.5): 开始 1，一半 0.5，结束 0"""
        from app.guidance.product import ProductConfig
        from app.guidance.schedule import epsilon_at
        cfg = ProductConfig(time_scale=2.5)
        assert epsilon_at(0.0, cfg) == pytest.approx(1.0)
        assert epsilon_at(0.5, cfg) == pytest.approx(0.5)
        assert epsilon_at(1.0, cfg) == pytest.approx(0.0)

    def test_epsilon_floor(self):
        """不低于 ε_f"""
        from app.guidance.product import ProductConfig
        from app.guidance.schedule import epsilon_at
        cfg = ProductConfig(eps_final=0.4, time_scale=2.5)
        assert epsilon_at(0.9, cfg) == pytest.approx(0.4)

    def test_epsilon_monotone(self):
        """随进度单调不增"""
        from app.guidance.product import ProductConfig
        from app.guidance.schedule import epsilon_at
        cfg = ProductConfig(eps_final=0.2, time_scale=2.5)
        values = [epsilon_at(p, cfg) for p in np.linspace(0.0, 1.0, 50)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_theta_constant_and_decay(self):
        """Θ 常数模式直接返回，衰减模式同 ε"""
        from app.guidance.schedule import theta_at
        from app.guidance.symloss import SymLossConfig
        assert theta_at(0.7, SymLossConfig(theta=0.25)) == 0.25
        assert theta_at(0.5, SymLossConfig(time_scale=2.5)) == pytest.approx(0.5)

    def test_lr_schedule(self):
        """学习率线性退火: 中点为一半，结束为 0"""
        from app.ppo.trainer import lr_schedule
        assert lr_schedule(0, 1000, 3e-4) == pytest.approx(3e-4)
        assert lr_schedule(500, 1000, 3e-4) == pytest.approx(1.5e-4)
        assert lr_schedule(1000, 1000, 3e-4) == 0.0


# ─── 乘积重加权 ────────────────────────────────────────────────────


class TestProduct:
    """乘积重加权"""

    def test_example(self):
        """均匀 5 动作，1 个被蕴含，λ = ε = 1 → 1/3 与 1/6"""
        from app.guidance.product import reweighted_distribution
        mask = np.array([False, False, True, False, False])
        dist = reweighted_distribution(_uniform(), mask, 1.0, 1.0)
        np.testing.assert_allclose(dist.probs, [1 / 6, 1 / 6, 1 / 3, 1 / 6, 1 / 6])
        assert dist.probs.sum() == pytest.approx(1.0)

    def test_zero_weight_returns_same(self):
        """ε = 0 时原样返回"""
        from app.guidance.product import reweighted_distribution
        dist = _uniform()
        assert reweighted_distribution(dist, [True, False, False, False, False], 1.0, 0.0) is dist

    def test_uniform_mask_unchanged(self):
        """掩码全 0 或全 1 时分布不变"""
        from app.guidance.product import reweighted_distribution
        from app.nn.distribution import distribution_from_logits
        dist = distribution_from_logits(np.array([[0.3, -1.0, 2.0], [1.0, 1.0, 0.0]]))
        mask = np.array([[True, True, True], [False, False, False]])
        out = reweighted_distribution(dist, mask, 1.0, 1.0)
        np.testing.assert_allclose(out.probs, dist.probs)

    def test_batch_rows_independent(self):
        """批量时逐行重加权，全同行保持原样"""
        from app.guidance.product import reweighted_distribution
        from app.nn.distribution import distribution_from_logits
        dist = distribution_from_logits(np.zeros((2, 5)))
        mask = np.array([[False, False, True, False, False], [False] * 5])
        out = reweighted_distribution(dist, mask, 1.0, 1.0)
        np.testing.assert_allclose(out.probs[0], [1 / 6, 1 / 6, 1 / 3, 1 / 6, 1 / 6])
        np.testing.assert_allclose(out.probs[1], np.full(5, 0.2))
        np.testing.assert_allclose(out.probs.sum(axis=-1), 1.0)

    def test_entropy_consistent(self):
        """熵与概率一致"""
        from app.guidance.product import reweighted_distribution
        from app.nn.distribution import distribution_from_logits
        dist = distribution_from_logits(np.array([0.5, 1.0, -2.0, 0.0]))
        out = reweighted_distribution(dist, [True, False, True, False], 0.5, 0.8)
        assert float(out.entropy) == pytest.approx(float(-(out.probs * np.log(out.probs)).sum()))

    @pytest.mark.parametrize("seed", range(20))
    def test_fuzz_normalized_and_monotone(self, seed):
        """随机 logits / 掩码: 归一化误差 ≤ 1e-9，被蕴含质量随 λ·ε 单调不减"""
        from app.guidance.product import reweighted_distribution
        from app.nn.distribution import distribution_from_logits
        rng = np.random.default_rng(seed)
        dist = distribution_from_logits(rng.normal(scale=3.0, size=(8, 5)))
        mask = rng.random((8, 5)) < 0.4
        previous = (dist.probs * mask).sum(axis=-1)
        for eps in (0.1, 0.3, 0.6, 1.0):
            out = reweighted_distribution(dist, mask, 1.0, eps)
            assert np.max(np.abs(out.probs.sum(axis=-1) - 1.0)) <= 1e-9
            mass = (out.probs * mask).sum(axis=-1)
            assert np.all(mass >= previous - 1e-12)
            previous = mass

    @pytest.mark.parametrize("kwargs", [
        {"lam": 0.0},
        {"lam": 1.5},
        {"eps_initial": 0.1, "eps_final": 0.2},
        {"eps_rate": -0.1},
    ])
    def test_invalid_config(self, kwargs):
        from app.errors import ConfigError
        from app.guidance.product import ProductConfig
        with pytest.raises(ConfigError):
            ProductConfig(**kwargs).validate()


# ─── 符号损失 ──────────────────────────────────────────────────────


class TestSymLoss:
    """参考分布与符号损失"""

    def test_reference_example(self):
        """η = 0.9，5 个中 1 个被蕴含 → 0.9/1.3"""
        from app.guidance.symloss import reference_distribution
        ref = reference_distribution([False, True, False, False, False], 0.9)
        assert ref.probs[1] == pytest.approx(0.9 / 1.3)
        assert ref.probs[0] == pytest.approx(0.1 / 1.3)

    def test_reference_half_is_uniform(self):
        """η = 0.5 → 均匀"""
        from app.guidance.symloss import reference_distribution
        ref = reference_distribution([True, False, False, True, False], 0.5)
        np.testing.assert_allclose(ref.probs, np.full(5, 0.2))

    @pytest.mark.parametrize("eta", [1e-6, 0.1, 0.5, 0.9, 1 - 1e-6])
    def test_reference_strictly_positive(self, eta):
        """η ∈ (0, 1) 时每个动作概率都 > 0 (不是屏蔽)"""
        from app.guidance.symloss import reference_distribution
        ref = reference_distribution([[True, False, False, False, False], [True] * 5, [False] * 5], eta)
        assert np.all(ref.probs > 0.0)
        np.testing.assert_allclose(ref.probs.sum(axis=-1), 1.0)

    def test_symbolic_loss_uses_reference_ratio(self):
        """π_θ = π_ref 时 L_sym = mean(Â)"""
        from app.guidance.symloss import reference_distribution, symbolic_loss
        ref = reference_distribution([[True, False, False]] * 2, 0.9)
        actions = np.array([0, 2])
        logp = ref.log_prob(actions)
        assert symbolic_loss(logp, logp, [1.0, 3.0], 0.2) == pytest.approx(2.0)

    @pytest.mark.parametrize("seed", range(20))
    def test_symbolic_loss_matches_scalar_loop(self, seed):
        """随机 batch: L_sym 等于逐元素 min(ρ_sym·Â, clip(ρ_sym)·Â) 的均值 (1e-12)，ρ_sym = π_θ / π_ref"""
        from app.guidance.symloss import reference_distribution, symbolic_loss
        from app.nn.distribution import distribution_from_logits
        rng = np.random.default_rng(seed)
        batch, n_actions = 16, 5
        logits = rng.normal(size=(batch, n_actions))
        mask = rng.random((batch, n_actions)) < 0.4
        actions = rng.integers(0, n_actions, size=batch)
        adv = rng.normal(size=batch)
        eta, clip = 0.9, 0.2

        policy = distribution_from_logits(logits)
        ref = reference_distribution(mask, eta)
        total = 0.0
        for row in range(batch):
            exp_logits = [float(np.exp(x - logits[row].max())) for x in logits[row]]
            p_new = exp_logits[actions[row]] / sum(exp_logits)
            weights = [eta if m else 1.0 - eta for m in mask[row]]
            p_ref = weights[actions[row]] / sum(weights)
            ratio = p_new / p_ref
            total += min(ratio * adv[row], min(max(ratio, 1.0 - clip), 1.0 + clip) * adv[row])
        loss = symbolic_loss(policy.log_prob(actions), ref.log_prob(actions), adv, clip)
        assert abs(loss - total / batch) <= 1e-12

    @pytest.mark.parametrize("kwargs", [
        {"eta": 1.0},
        {"eta": 0.0},
        {"theta": -0.5},
        {"theta_initial": 0.1, "theta_final": 0.5},
    ])
    def test_invalid_config(self, kwargs):
        from app.errors import ConfigError
        from app.guidance.symloss import SymLossConfig
        with pytest.raises(ConfigError):
            SymLossConfig(**kwargs).validate()


# ─── 奖励机塑形 ────────────────────────────────────────────────────


class TestRMShaping:
    """奖励机塑形"""

    def test_entailed_action_bonus(self):
        """基础 0，被蕴含 → 训练 0.01，上报 0"""
        from app.guidance.rm import RMShapingConfig, rm_shaped_reward
        assert rm_shaped_reward(0.0, True, 0, RMShapingConfig()) == pytest.approx((0.01, 0.0))

    def test_progress_bonus(self):
        """基础 0.91，未蕴含，delta +1 → 训练 1.0，上报 0.91"""
        from app.guidance.rm import RMShapingConfig, rm_shaped_reward
        train, report = rm_shaped_reward(0.91, False, 1, RMShapingConfig())
        assert train == pytest.approx(1.0)
        assert report == 0.91

    def test_regress_penalty(self):
        """delta −1 → 扣进度奖励"""
        from app.guidance.rm import RMShapingConfig, rm_shaped_reward
        train, report = rm_shaped_reward(0.0, True, -1, RMShapingConfig(regress_penalty=0.2))
        assert train == pytest.approx(0.01 - 0.2)
        assert report == 0.0

    def test_invalid(self):
        """负系数报 ConfigError"""
        from app.errors import ConfigError
        from app.guidance.rm import RMShapingConfig
        with pytest.raises(ConfigError):
            RMShapingConfig(action_bonus=-0.01).validate()


class TestGuidanceConfig:
    """引导配置"""

    def test_modes(self):
        from app.guidance import GUIDANCE_MODES, GuidanceConfig
        assert GUIDANCE_MODES == ("none", "product", "symloss", "rm")
        assert not GuidanceConfig().needs_masks
        assert GuidanceConfig(mode="rm").needs_masks

    def test_unknown_mode(self):
        from app.errors import ConfigError
        from app.guidance import GuidanceConfig
        with pytest.raises(ConfigError):
            GuidanceConfig(mode="shield").validate()
