# -*- coding: utf-8 -*-
"""
PPO 训练循环

收集 rollout → 计算 GAE → 多轮 minibatch 更新，三种引导方式在这里接入:
- product: 采样分布换成乘积重加权后的 π̃，缓冲里存 π̃ 的 log 概率
- symloss: 更新时减去 Θ_t·L_sym
- rm: 训练奖励换成奖励机塑形奖励，上报奖励保持环境原值
"""
from dataclasses import dataclass, asdict
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from app import config
from app.envs.base import BaseEnv, EnvConfig, make_env
from app.errors import ConfigError, NumericError, UsageError
from app.guidance.product import reweighted_distribution
from app.guidance.rm import rm_shaped_reward
from app.guidance.schedule import epsilon_at, theta_at
from app.guidance.settings import GuidanceConfig
from app.guidance.symloss import combined_loss, reference_distribution, symbolic_loss
from app.logic.indicator import indicator_mask
from app.logic.parser import SymbolicPolicy
from app.logic.reward_machine import RewardMachine, build_reward_machine, rm_transition
from app.nn.distribution import distribution_from_logits, sample
from app.nn.network import ParameterSet, build_actor_critic, policy_forward, value_forward
from app.nn.optim import AdamState, adam_update
from .buffer import RolloutBuffer
from .losses import clipped_policy_loss, compute_gae, normalize_advantages, total_ppo_loss, value_loss


@dataclass(frozen=True)
class Hyperparams:
    learning_rate: float = 3e-4
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_coef: float = 0.2
    ent_coef: float = 0.01
    vf_coef: float = 0.5
    max_grad_norm: float = 0.5
    num_steps: int = 128
    num_envs: int = 4
    num_minibatches: int = 4
    update_epochs: int = 4
    total_timesteps: int = 500_000
    anneal_lr: bool = True
    norm_adv: bool = True
    clip_vloss: bool = True

    @property
    def batch_size(self) -> int:
        return self.num_steps * self.num_envs

    @property
    def minibatch_size(self) -> int:
        return self.batch_size // self.num_minibatches

    @property
    def num_iterations(self) -> int:
        return self.total_timesteps // self.batch_size

    def validate(self) -> "Hyperparams":
        if self.learning_rate <= 0.0:
            raise ConfigError(f"learning_rate 必须为正，当前 {self.learning_rate}")
        if not 0.0 <= self.gamma <= 1.0 or not 0.0 <= self.gae_lambda <= 1.0:
            raise ConfigError("gamma 和 gae_lambda 必须在 [0, 1] 内")
        if self.clip_coef <= 0.0:
            raise ConfigError(f"clip_coef 必须为正，当前 {self.clip_coef}")
        if min(self.num_steps, self.num_envs, self.num_minibatches, self.update_epochs) < 1:
            raise ConfigError("num_steps / num_envs / num_minibatches / update_epochs 必须 ≥ 1")
        if self.batch_size % self.num_minibatches != 0:
            raise ConfigError(f"batch_size {self.batch_size} 不能被 num_minibatches {self.num_minibatches} 整除")
        if self.total_timesteps < self.batch_size:
            raise ConfigError(f"total_timesteps {self.total_timesteps} 小于一个 batch ({self.batch_size})")
        return self


@dataclass(frozen=True)
class EpisodeRecord:
    """一局结束时的记录；episode_return 永远是环境的原始奖励"""
    global_step: int
    episode_return: float
    length: int
    success: bool

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass
class UpdateStats:
    iteration: int
    global_step: int
    learning_rate: float
    policy_loss: float = 0.0
    value_loss: float = 0.0
    entropy: float = 0.0
    sym_loss: float = 0.0
    clipfrac: float = 0.0
    approx_kl: float = 0.0
    grad_norm: float = 0.0
    # product 为 ε_t，symloss 为 Θ_t，其他为 0
    guidance_weight: float = 0.0
    rollout_entropy: float = 0.0

    def to_dict(self) -> Dict:
        return asdict(self)


def lr_schedule(global_step: int, total_timesteps: int, lr0: float) -> float:
    """线性退火到 0"""
    if total_timesteps <= 0:
        return lr0
    frac = 1.0 - min(max(global_step / total_timesteps, 0.0), 1.0)
    return lr0 * frac


def episode_seed(seed: int, env_index: int, episode_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, env_index, episode_index])


class EnvPool:
    """num_envs 个同步环境，每局用 (seed, env 编号, 局编号) 派生布局种子"""

    def __init__(self, env_config: EnvConfig, num_envs: int, seed: int, rm: Optional[RewardMachine] = None):
        self.seed = seed
        self.envs: List[BaseEnv] = [make_env(env_config) for _ in range(num_envs)]
        self.episode_counts = [0] * num_envs
        self.rm = rm
        self.rm_states = [rm.initial if rm else "" for _ in range(num_envs)]
        self.returns = np.zeros(num_envs, dtype=np.float64)
        self.lengths = np.zeros(num_envs, dtype=np.int64)
        self.global_step = 0
        self.obs = np.stack([self.reset_env(i) for i in range(num_envs)])

    @property
    def num_envs(self) -> int:
        return len(self.envs)

    @property
    def obs_dim(self) -> int:
        return self.envs[0].obs_dim

    @property
    def n_actions(self) -> int:
        return self.envs[0].n_actions

    def reset_env(self, index: int) -> np.ndarray:
        obs = self.envs[index].reset(episode_seed(self.seed, index, self.episode_counts[index]))
        self.episode_counts[index] += 1
        self.returns[index] = 0.0
        self.lengths[index] = 0
        if self.rm is not None:
            self.rm_states[index] = self.rm.initial
        return obs

    def masks(self, policy: SymbolicPolicy) -> np.ndarray:
        return np.stack([indicator_mask(policy, env.ground_state(), env) for env in self.envs])


def collect_rollouts(
    pool: EnvPool,
    params: ParameterSet,
    hp: Hyperparams,
    guidance: GuidanceConfig,
    policy: Optional[SymbolicPolicy],
    rng: np.random.Generator,
    progress: float,
) -> Tuple[RolloutBuffer, List[EpisodeRecord], float]:
    """
    收集 num_steps × num_envs 个转移

    截断 (超时) 时把 γ·V(最后观测) 加到该步奖励上再视为结束。

    Returns:
        (缓冲, 本次结束的 episode 列表, 采样分布平均熵)
    """
    if guidance.needs_masks and policy is None:
        raise UsageError(f"引导方式 {guidance.mode} 需要符号策略")
    buffer = RolloutBuffer(hp.num_steps, pool.num_envs, pool.obs_dim, pool.n_actions)
    episodes: List[EpisodeRecord] = []
    eps = epsilon_at(progress, guidance.product) if guidance.mode == "product" else 0.0
    entropies = []

    for _ in range(hp.num_steps):
        obs = pool.obs
        dist = distribution_from_logits(policy_forward(obs, params).data)
        values = value_forward(obs, params).data
        if guidance.needs_masks:
            masks = pool.masks(policy)
        else:
            masks = np.zeros((pool.num_envs, pool.n_actions), dtype=bool)
        if guidance.mode == "product":
            dist = reweighted_distribution(dist, masks, guidance.product.lam, eps)
        actions = sample(dist, rng)
        logprobs = dist.log_prob(actions)
        entropies.append(float(dist.entropy.mean()))

        rewards = np.zeros(pool.num_envs, dtype=np.float64)
        dones = np.zeros(pool.num_envs, dtype=np.float64)
        next_obs = np.empty_like(obs)
        for i, env in enumerate(pool.envs):
            action = int(actions[i])
            result = env.step(action)
            reward = result.reward
            pool.returns[i] += result.reward
            pool.lengths[i] += 1
            if guidance.mode == "rm":
                state, delta = rm_transition(pool.rm, pool.rm_states[i], result.events)
                pool.rm_states[i] = state
                reward, _ = rm_shaped_reward(result.reward, bool(masks[i, action]), delta, guidance.rm)
            if result.truncated and not result.terminated:
                reward += hp.gamma * value_forward(result.observation, params).item()
            rewards[i] = reward
            dones[i] = float(result.done)
            if result.done:
                episodes.append(EpisodeRecord(
                    global_step=pool.global_step + i + 1,
                    episode_return=float(pool.returns[i]),
                    length=int(pool.lengths[i]),
                    success=bool(result.success),
                ))
                next_obs[i] = pool.reset_env(i)
            else:
                next_obs[i] = result.observation

        buffer.add(obs, actions, logprobs, rewards, dones, values, masks)
        pool.obs = next_obs
        pool.global_step += pool.num_envs

    buffer.bootstrap_values[:] = value_forward(pool.obs, params).data
    return buffer, episodes, float(np.mean(entropies))


def train_update(
    buffer: RolloutBuffer,
    params: ParameterSet,
    adam: AdamState,
    hp: Hyperparams,
    guidance: GuidanceConfig,
    progress: float,
    rng: np.random.Generator,
    learning_rate: float,
) -> Dict[str, float]:
    """
    在一次 rollout 上做 update_epochs 轮 minibatch 更新

    Θ_t = 0 时完全跳过符号损失 (与纯 PPO 逐位一致)。
    """
    advantages, returns = compute_gae(
        buffer.rewards, buffer.values, buffer.dones, buffer.bootstrap_values, hp.gamma, hp.gae_lambda,
    )
    batch = buffer.flatten()
    advantages = advantages.reshape(-1)
    returns = returns.reshape(-1)

    theta = theta_at(progress, guidance.symloss) if guidance.mode == "symloss" else 0.0
    ref_logp = None
    if theta > 0.0:
        ref_logp = reference_distribution(batch["masks"], guidance.symloss.eta).log_prob(batch["actions"])

    sums = {"policy_loss": 0.0, "value_loss": 0.0, "entropy": 0.0, "sym_loss": 0.0,
            "clipfrac": 0.0, "approx_kl": 0.0, "grad_norm": 0.0}
    count = 0
    indices = np.arange(hp.batch_size)
    for epoch in range(hp.update_epochs):
        rng.shuffle(indices)
        for start in range(0, hp.batch_size, hp.minibatch_size):
            mb = indices[start:start + hp.minibatch_size]
            logp_all = policy_forward(batch["obs"][mb], params).log_softmax()
            logp_new = logp_all.pick(batch["actions"][mb])
            entropy = -(logp_all.exp() * logp_all).sum(axis=-1).mean()
            new_values = value_forward(batch["obs"][mb], params)

            mb_adv = advantages[mb]
            if hp.norm_adv:
                mb_adv = normalize_advantages(mb_adv)

            pg = clipped_policy_loss(logp_new, batch["logprobs"][mb], mb_adv, hp.clip_coef)
            vl = value_loss(new_values, batch["values"][mb], returns[mb], hp.clip_coef, hp.clip_vloss)
            loss = total_ppo_loss(pg, vl, entropy, hp.vf_coef, hp.ent_coef)
            sym = 0.0
            if ref_logp is not None:
                sym_term = symbolic_loss(logp_new, ref_logp[mb], mb_adv, hp.clip_coef)
                loss = combined_loss(loss, sym_term, theta)
                sym = sym_term.item()

            if not np.isfinite(loss.item()):
                raise NumericError(
                    f"第 {epoch} 轮 minibatch@{start} 损失非有限: "
                    f"pg={pg.item():.4g}, v={vl.item():.4g}, entropy={entropy.item():.4g}, sym={sym:.4g}"
                )

            params.zero_grad()
            loss.backward()
            grad_norm = adam_update(params, adam, learning_rate, hp.max_grad_norm)

            log_ratio = logp_new.data - batch["logprobs"][mb]
            ratio = np.exp(log_ratio)
            sums["policy_loss"] += pg.item()
            sums["value_loss"] += vl.item()
            sums["entropy"] += entropy.item()
            sums["sym_loss"] += sym
            sums["clipfrac"] += float(np.mean(np.abs(ratio - 1.0) > hp.clip_coef))
            sums["approx_kl"] += float(np.mean((ratio - 1.0) - log_ratio))
            sums["grad_norm"] += grad_norm
            count += 1

    stats = {key: value / count for key, value in sums.items()}
    stats["theta"] = theta
    return stats


class Trainer:
    """单个 (任务, 方法, 种子) 的训练过程"""

    def __init__(
        self,
        env_config: EnvConfig,
        hp: Hyperparams,
        guidance: GuidanceConfig,
        policy: Optional[SymbolicPolicy],
        seed: int,
    ):
        self.hp = hp.validate()
        self.guidance = guidance.validate()
        self.policy = policy
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        rm = None
        if guidance.mode == "rm":
            rm = build_reward_machine(
                env_config.resolved_task(), with_sink=True, reset_on_wrong_touch=env_config.reset_on_wrong_touch,
            )
        self.pool = EnvPool(env_config, hp.num_envs, seed, rm)
        self.params = build_actor_critic(self.pool.obs_dim, self.pool.n_actions, self.rng)
        self.adam = AdamState.for_params(self.params)
        self.iteration = 0

    @property
    def global_step(self) -> int:
        return self.pool.global_step

    def progress(self) -> float:
        return self.global_step / self.hp.total_timesteps

    def learning_rate(self) -> float:
        if not self.hp.anneal_lr:
            return self.hp.learning_rate
        return lr_schedule(self.global_step, self.hp.total_timesteps, self.hp.learning_rate)

    def guidance_weight(self, progress: float) -> float:
        if self.guidance.mode == "product":
            return epsilon_at(progress, self.guidance.product)
        if self.guidance.mode == "symloss":
            return theta_at(progress, self.guidance.symloss)
        return 0.0

    def iterate(self) -> Tuple[List[EpisodeRecord], UpdateStats]:
        """一次 收集 + 更新"""
        progress = self.progress()
        lr = self.learning_rate()
        buffer, episodes, rollout_entropy = collect_rollouts(
            self.pool, self.params, self.hp, self.guidance, self.policy, self.rng, progress,
        )
        stats = train_update(buffer, self.params, self.adam, self.hp, self.guidance, progress, self.rng, lr)
        self.iteration += 1
        update = UpdateStats(
            iteration=self.iteration,
            global_step=self.global_step,
            learning_rate=lr,
            policy_loss=stats["policy_loss"],
            value_loss=stats["value_loss"],
            entropy=stats["entropy"],
            sym_loss=stats["sym_loss"],
            clipfrac=stats["clipfrac"],
            approx_kl=stats["approx_kl"],
            grad_norm=stats["grad_norm"],
            guidance_weight=self.guidance_weight(progress),
            rollout_entropy=rollout_entropy,
        )
        return episodes, update

    def train(
        self,
        on_episode: Optional[Callable[[EpisodeRecord], None]] = None,
        on_update: Optional[Callable[[UpdateStats], None]] = None,
    ) -> List[EpisodeRecord]:
        history: List[EpisodeRecord] = []
        total = self.hp.num_iterations
        for _ in range(total):
            episodes, update = self.iterate()
            history.extend(episodes)
            if on_episode:
                for record in episodes:
                    on_episode(record)
            if on_update:
                on_update(update)
            if config.VERBOSE and (update.iteration % 10 == 0 or update.iteration == total):
                recent = history[-20:]
                mean_return = float(np.mean([r.episode_return for r in recent])) if recent else 0.0
                print(f"🔧 [{self.guidance.mode}] iter {update.iteration}/{total} "
                      f"step {update.global_step} return {mean_return:.3f} "
                      f"kl {update.approx_kl:.4f} lr {update.learning_rate:.2e}")
        return history
