# -*- coding: utf-8 -*-
"""
PPO 训练循环单元测试

测试目标:
1. 缓冲器的形状与使用错误
2. rollout 与更新在相同种子下可复现
3. 零优势不改变策略，反复更新降低价值损失
4. 引导退化: ε ≡ 0 的 product、Θ = 0 的 symloss 与纯 PPO 逐位一致
5. 奖励机模式下训练奖励与上报奖励分离
6. 数值异常与配置错误
7. 桌面规模的学习效果: 最终回报、面积与方法间差距 (慢)
"""
import os

import numpy as np
import pytest


def _env_config(task="delivercoffee"):
    from app.envs.base import EnvConfig
    return EnvConfig(domain="officeworld", task=task)


def _tiny_hp(**kwargs):
    from app.ppo.trainer import Hyperparams
    values = dict(num_steps=16, num_envs=2, num_minibatches=2, update_epochs=2, total_timesteps=96)
    values.update(kwargs)
    return Hyperparams(**values)


def _coffee_policy():
    from app import config
    from app.envs.base import vocabulary_for
    from app.logic.parser import Vocabulary, load_rules
    facts, actions = vocabulary_for("officeworld")
    return load_rules(os.path.join(config.RULES_DIR, "officeworld_coffee.rules"), Vocabulary(facts, actions))


def _trainer(guidance=None, seed=0, **hp_kwargs):
    from app.guidance import GuidanceConfig
    from app.ppo.trainer import Trainer
    return Trainer(_env_config(), _tiny_hp(**hp_kwargs), guidance or GuidanceConfig(), _coffee_policy(), seed)


def _random_buffer(params, rng, num_steps=8, num_envs=2, obs_dim=7, n_actions=4):
    """用当前策略的 log 概率填满缓冲，奖励和价值全 0 (优势为 0)"""
    from app.nn.distribution import distribution_from_logits
    from app.nn.network import policy_forward
    from app.ppo.buffer import RolloutBuffer
    buffer = RolloutBuffer(num_steps, num_envs, obs_dim, n_actions)
    for _ in range(num_steps):
        obs = rng.random((num_envs, obs_dim))
        actions = rng.integers(n_actions, size=num_envs)
        logprobs = distribution_from_logits(policy_forward(obs, params).data).log_prob(actions)
        zeros = np.zeros(num_envs)
        buffer.add(obs, actions, logprobs, zeros, zeros, zeros, np.zeros((num_envs, n_actions), dtype=bool))
    return buffer


# ─── 缓冲器 ────────────────────────────────────────────────────────


class TestRolloutBuffer:
    """缓冲器"""

    def test_flatten_shapes(self):
        """展平后 batch 维为 num_steps × num_envs"""
        from app.nn.network import build_actor_critic
        rng = np.random.default_rng(0)
        params = build_actor_critic(7, 4, rng)
        batch = _random_buffer(params, rng).flatten()
        assert batch["obs"].shape == (16, 7)
        assert batch["actions"].shape == (16,)
        assert batch["masks"].shape == (16, 4)
        assert batch["masks"].dtype == bool

    def test_add_when_full(self):
        """写满后再 add 报 UsageError，reset 后可以再写"""
        from app.errors import UsageError
        from app.ppo.buffer import RolloutBuffer
        buffer = RolloutBuffer(1, 1, 2, 3)
        row = (np.zeros((1, 2)), [0], [0.0], [0.0], [0.0], [0.0], np.zeros((1, 3), dtype=bool))
        buffer.add(*row)
        with pytest.raises(UsageError):
            buffer.add(*row)
        buffer.reset()
        buffer.add(*row)
        assert buffer.full

    def test_flatten_partial(self):
        """未写满时展平报 UsageError"""
        from app.errors import UsageError
        from app.ppo.buffer import RolloutBuffer
        with pytest.raises(UsageError):
            RolloutBuffer(4, 1, 2, 3).flatten()


# ─── 超参数 ────────────────────────────────────────────────────────


class TestHyperparams:
    """超参数"""

    def test_derived_sizes(self):
        from app.ppo.trainer import Hyperparams
        hp = Hyperparams(num_steps=128, num_envs=4, num_minibatches=4, total_timesteps=500_000)
        assert hp.batch_size == 512
        assert hp.minibatch_size == 128
        assert hp.num_iterations == 976

    @pytest.mark.parametrize("kwargs", [
        {"learning_rate": 0.0},
        {"gamma": 1.5},
        {"clip_coef": 0.0},
        {"num_minibatches": 5},
        {"total_timesteps": 10},
        {"update_epochs": 0},
    ])
    def test_invalid(self, kwargs):
        from app.errors import ConfigError
        with pytest.raises(ConfigError):
            _tiny_hp(**kwargs).validate()


# ─── 收集与更新 ────────────────────────────────────────────────────


class TestRollouts:
    """rollout 收集"""

    def test_deterministic(self):
        """同一种子两次收集完全一致"""
        from app.ppo.trainer import collect_rollouts
        results = []
        for _ in range(2):
            trainer = _trainer()
            buffer, episodes, entropy = collect_rollouts(
                trainer.pool, trainer.params, trainer.hp, trainer.guidance, trainer.policy, trainer.rng, 0.0,
            )
            results.append((buffer, episodes, entropy))
        (a, ea, ha), (b, eb, hb) = results
        np.testing.assert_array_equal(a.actions, b.actions)
        np.testing.assert_array_equal(a.obs, b.obs)
        np.testing.assert_array_equal(a.rewards, b.rewards)
        assert ea == eb and ha == hb

    def test_different_seeds_differ(self):
        """不同种子动作序列不同"""
        from app.ppo.trainer import collect_rollouts
        actions = []
        for seed in (0, 1):
            trainer = _trainer(seed=seed)
            buffer, _, _ = collect_rollouts(
                trainer.pool, trainer.params, trainer.hp, trainer.guidance, trainer.policy, trainer.rng, 0.0,
            )
            actions.append(buffer.actions)
        assert not np.array_equal(actions[0], actions[1])

    def test_global_step_advances(self):
        """每次收集推进 num_steps × num_envs 步"""
        trainer = _trainer()
        trainer.iterate()
        assert trainer.global_step == 32
        assert trainer.progress() == pytest.approx(32 / 96)

    def test_masks_recorded(self):
        """引导模式下缓冲里记录指示掩码"""
        from app.guidance import GuidanceConfig
        from app.ppo.trainer import collect_rollouts
        trainer = _trainer(GuidanceConfig(mode="product"))
        buffer, _, _ = collect_rollouts(
            trainer.pool, trainer.params, trainer.hp, trainer.guidance, trainer.policy, trainer.rng, 0.0,
        )
        assert buffer.masks.any()

    def test_masks_need_policy(self):
        """需要掩码但没有符号策略时报 UsageError"""
        from app.errors import UsageError
        from app.guidance import GuidanceConfig
        from app.ppo.trainer import collect_rollouts
        trainer = _trainer(GuidanceConfig(mode="symloss"))
        with pytest.raises(UsageError):
            collect_rollouts(trainer.pool, trainer.params, trainer.hp, trainer.guidance, None, trainer.rng, 0.0)

    def test_truncation_episode_recorded(self):
        """超时截断的 episode 也会记录，回报为 0"""
        from app.envs.base import EnvConfig
        from app.guidance import GuidanceConfig
        from app.ppo.trainer import Trainer
        env_config = EnvConfig(domain="officeworld", task="patrolabc", max_steps=4)
        trainer = Trainer(env_config, _tiny_hp(), GuidanceConfig(), None, 0)
        episodes, _ = trainer.iterate()
        assert episodes
        assert all(record.length <= 4 for record in episodes)
        assert episodes[0].global_step <= 8


class TestUpdate:
    """参数更新"""

    def test_zero_advantage_keeps_policy(self):
        """优势全 0 且无熵项时策略参数不变"""
        from app.guidance import GuidanceConfig
        from app.nn.network import build_actor_critic
        from app.nn.optim import AdamState
        from app.ppo.trainer import train_update
        rng = np.random.default_rng(3)
        params = build_actor_critic(7, 4, rng)
        buffer = _random_buffer(params, rng)
        hp = _tiny_hp(num_steps=8, ent_coef=0.0)
        before = params.snapshot()
        train_update(buffer, params, AdamState.for_params(params), hp, GuidanceConfig(), 0.0, rng, 1e-3)
        after = params.snapshot()
        for name in before:
            if name.startswith("policy"):
                np.testing.assert_array_equal(before[name], after[name])

    def test_value_loss_decreases(self):
        """同一批数据上反复更新，价值损失下降"""
        from app.guidance import GuidanceConfig
        from app.nn.network import build_actor_critic, value_forward
        from app.nn.optim import AdamState
        from app.ppo.losses import compute_gae, value_loss
        from app.ppo.trainer import train_update
        rng = np.random.default_rng(4)
        params = build_actor_critic(7, 4, rng)
        buffer = _random_buffer(params, rng)
        buffer.rewards[:] = rng.random(buffer.rewards.shape)
        hp = _tiny_hp(num_steps=8, clip_vloss=False)
        _, returns = compute_gae(buffer.rewards, buffer.values, buffer.dones, buffer.bootstrap_values, 0.99, 0.95)
        obs = buffer.flatten()["obs"]
        targets = returns.reshape(-1)

        def full_loss():
            return value_loss(value_forward(obs, params).data, np.zeros_like(targets), targets, 0.2, False)

        start = full_loss()
        adam = AdamState.for_params(params)
        for _ in range(20):
            train_update(buffer, params, adam, hp, GuidanceConfig(), 0.0, rng, 1e-2)
        assert full_loss() < start

    def test_stats_keys(self):
        """更新统计"""
        _, update = _trainer().iterate()
        stats = update.to_dict()
        for key in ("policy_loss", "value_loss", "entropy", "clipfrac", "approx_kl", "grad_norm", "learning_rate"):
            assert np.isfinite(stats[key])
        assert update.iteration == 1
        assert update.learning_rate == pytest.approx(3e-4)

    def test_nan_parameters(self):
        """参数出现 NaN 时报 NumericError"""
        from app.errors import NumericError
        trainer = _trainer()
        trainer.params["policy.0.weight"].data[:] = np.nan
        with pytest.raises(NumericError):
            trainer.iterate()


# ─── 引导退化 ──────────────────────────────────────────────────────


def _run(guidance, iterations=3):
    trainer = _trainer(guidance)
    history = []
    for _ in range(iterations):
        episodes, update = trainer.iterate()
        history.append(([record.to_dict() for record in episodes], update.to_dict()))
    return history, trainer.params.snapshot()


class TestRecovery:
    """关闭引导强度时与纯 PPO 逐位一致"""

    def test_product_with_zero_epsilon(self):
        from app.guidance import GuidanceConfig
        from app.guidance.product import ProductConfig
        baseline, base_params = _run(GuidanceConfig())
        product, product_params = _run(GuidanceConfig(mode="product", product=ProductConfig(eps_initial=0.0)))
        assert product == baseline
        for name in base_params:
            np.testing.assert_array_equal(base_params[name], product_params[name])

    def test_symloss_with_zero_theta(self):
        from app.guidance import GuidanceConfig
        from app.guidance.symloss import SymLossConfig
        baseline, base_params = _run(GuidanceConfig())
        symloss, sym_params = _run(GuidanceConfig(mode="symloss", symloss=SymLossConfig(theta=0.0)))
        assert symloss == baseline
        for name in base_params:
            np.testing.assert_array_equal(base_params[name], sym_params[name])

    def test_symloss_active_changes_update(self):
        """Θ > 0 时更新确实不同"""
        from app.guidance import GuidanceConfig
        from app.guidance.symloss import SymLossConfig
        _, base_params = _run(GuidanceConfig(), iterations=1)
        _, sym_params = _run(GuidanceConfig(mode="symloss", symloss=SymLossConfig(theta=1.0)), iterations=1)
        assert any(not np.array_equal(base_params[name], sym_params[name]) for name in base_params)


class TestRewardMachineMode:
    """奖励机塑形"""

    def test_train_reward_differs_from_report(self):
        """训练奖励带 ±0.01 塑形，上报回报只来自环境"""
        from app.guidance import GuidanceConfig
        from app.ppo.trainer import collect_rollouts
        trainer = _trainer(GuidanceConfig(mode="rm"))
        assert trainer.pool.rm is not None
        buffer, episodes, _ = collect_rollouts(
            trainer.pool, trainer.params, trainer.hp, trainer.guidance, trainer.policy, trainer.rng, 0.0,
        )
        assert (buffer.rewards < 0.0).any()
        for record in episodes:
            assert 0.0 <= record.episode_return <= 1.0


# ─── 学习效果 (慢) ─────────────────────────────────────────────────


ALL_METHODS = ("product", "symloss", "ppo", "rm")


def _desk_runs(out_dir, task, methods):
    """桌面预设下各方法 × 各种子训练一遍；返回 (方法 → 各种子最终回报的均值, 聚合曲线)"""
    from dataclasses import replace
    from app.harness.curves import aggregate
    from app.harness.experiment import default_config
    from app.harness.runner import load_policy, run_seed
    from app.harness.storage import read_manifest
    base = replace(default_config(task, "desk"), out_dir=str(out_dir))
    finals = {}
    for method in methods:
        experiment = base.with_guidance(method)
        policy = load_policy(experiment)
        run_dirs = [run_seed(experiment, seed, policy) for seed in experiment.seeds]
        finals[method] = float(np.mean([read_manifest(d)["summary"]["final_return"] for d in run_dirs]))
    return finals, aggregate([os.path.join(str(out_dir), task)])


@pytest.mark.slow
class TestDeskLearning:
    """桌面规模的学习效果 (HPPO_RUN_SLOW=1 时运行)"""

    def test_delivercoffee_product(self, tmp_path):
        """DeliverCoffee 30 万步 × 3 种子: Product 最终回报 ≥ 0.6，面积不小于 PPO"""
        from app.harness.curves import area_under_curve
        from app.harness.experiment import default_config
        experiment = default_config("officeworld-delivercoffee", "desk")
        assert experiment.hyperparams.total_timesteps == 300_000
        assert len(experiment.seeds) == 3
        finals, curves = _desk_runs(tmp_path, "officeworld-delivercoffee", ("product", "ppo"))
        assert finals["product"] >= 0.6
        assert area_under_curve(curves, "product") >= area_under_curve(curves, "ppo")

    def test_doorkey_all_methods(self, tmp_path):
        """DoorKey 8×8 单钥匙 50 万步: 四种方法都 ≥ 0.5，Product 面积不小于 PPO"""
        from app.harness.curves import area_under_curve
        finals, curves = _desk_runs(tmp_path, "doorkey-8x8-1key", ALL_METHODS)
        for method in ALL_METHODS:
            assert finals[method] >= 0.5, f"{method}: {finals[method]:.3f}"
        assert area_under_curve(curves, "product") >= area_under_curve(curves, "ppo")

    def test_waterworld_rg_methods_close(self, tmp_path):
        """WaterWorld RG 50 万步: 每个方法的最终回报与最好的方法相差不超过 0.15"""
        finals, _ = _desk_runs(tmp_path, "waterworld-rg", ALL_METHODS)
        best = max(finals.values())
        for method in ALL_METHODS:
            assert best - finals[method] <= 0.15, f"{method}: {finals[method]:.3f} vs {best:.3f}"
