# -*- coding: utf-8 -*-
"""
PPO 损失与优势估计

约定: dones[t] = 1 表示第 t 步之后 episode 结束 (该步的后继状态不再自举)。
"""
from typing import Tuple, Union

import numpy as np

from app.nn.tensor import Tensor

Scalar = Union[Tensor, float]


def compute_gae(
    rewards,
    values,
    dones,
    bootstrap_values,
    gamma: float,
    gae_lambda: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    广义优势估计

    δ_t = r_t + γ(1 − d_t)V_{t+1} − V_t，Â_t = δ_t + γλ(1 − d_t)Â_{t+1}，
    V_T 取 bootstrap_values。

    Returns:
        (advantages, returns)，returns = advantages + values
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)
    bootstrap_values = np.asarray(bootstrap_values, dtype=np.float64)
    if rewards.shape != values.shape or rewards.shape != dones.shape:
        raise ValueError(f"形状不一致: rewards {rewards.shape}, values {values.shape}, dones {dones.shape}")
    if bootstrap_values.shape != rewards.shape[1:]:
        raise ValueError(f"bootstrap_values 形状应为 {rewards.shape[1:]}，当前 {bootstrap_values.shape}")

    steps = rewards.shape[0]
    advantages = np.zeros_like(rewards)
    last = np.zeros_like(bootstrap_values)
    for t in reversed(range(steps)):
        next_values = bootstrap_values if t == steps - 1 else values[t + 1]
        nonterminal = 1.0 - dones[t]
        delta = rewards[t] + gamma * nonterminal * next_values - values[t]
        last = delta + gamma * gae_lambda * nonterminal * last
        advantages[t] = last
    return advantages, advantages + values


def normalize_advantages(adv: np.ndarray) -> np.ndarray:
    adv = np.asarray(adv, dtype=np.float64)
    return (adv - adv.mean()) / (adv.std() + 1e-8)


def clipped_policy_loss(logp_new, logp_old, adv, clip_coef: float) -> Scalar:
    """batch 均值 min(ρÂ, clip(ρ, 1−ε, 1+ε)Â)，ρ = exp(logp_new − logp_old)；越大越好"""
    adv = np.asarray(adv, dtype=np.float64)
    logp_old = np.asarray(logp_old, dtype=np.float64)
    if isinstance(logp_new, Tensor):
        ratio = (logp_new - logp_old).exp()
        unclipped = ratio * adv
        clipped = ratio.clip(1.0 - clip_coef, 1.0 + clip_coef) * adv
        return unclipped.minimum(clipped).mean()
    ratio = np.exp(np.asarray(logp_new, dtype=np.float64) - logp_old)
    unclipped = ratio * adv
    clipped = np.clip(ratio, 1.0 - clip_coef, 1.0 + clip_coef) * adv
    return float(np.minimum(unclipped, clipped).mean())


def value_loss(values_new, values_old, returns, clip_coef: float, clip_vloss: bool = True) -> Scalar:
    """clip_vloss 时取 max(未裁剪误差², 裁剪到 values_old ± ε 后的误差²)，整体乘 0.5"""
    values_old = np.asarray(values_old, dtype=np.float64)
    returns = np.asarray(returns, dtype=np.float64)
    if isinstance(values_new, Tensor):
        unclipped = (values_new - returns) ** 2
        if not clip_vloss:
            return unclipped.mean() * 0.5
        clipped_values = (values_new - values_old).clip(-clip_coef, clip_coef) + values_old
        clipped = (clipped_values - returns) ** 2
        return unclipped.maximum(clipped).mean() * 0.5
    values_new = np.asarray(values_new, dtype=np.float64)
    unclipped = (values_new - returns) ** 2
    if not clip_vloss:
        return float(0.5 * unclipped.mean())
    clipped_values = values_old + np.clip(values_new - values_old, -clip_coef, clip_coef)
    clipped = (clipped_values - returns) ** 2
    return float(0.5 * np.maximum(unclipped, clipped).mean())


def total_ppo_loss(policy_term: Scalar, value_term: Scalar, entropy: Scalar, vf_coef: float, ent_coef: float) -> Scalar:
    """L_PPO = −L^CLIP + c₁·L^VF − c₂·H"""
    return -policy_term + vf_coef * value_term - ent_coef * entropy
