# -*- coding: utf-8 -*-
"""
符号辅助损失

参考分布 π_ref: 被蕴含动作权重 η，其余 1 − η，归一化；
L_sym 与 PPO 代理目标同样的裁剪结构，只是比率分母换成 π_ref。
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from app import config
from app.errors import ConfigError
from app.nn.distribution import CategoricalDistribution, distribution_from_probs
from app.ppo.losses import clipped_policy_loss


@dataclass(frozen=True)
class SymLossConfig:
    eta: float = 0.9
    # 非 None 时为常数 Θ
    theta: Optional[float] = None
    theta_initial: float = 1.0
    theta_rate: float = 0.4
    theta_final: float = 0.0
    time_scale: float = field(default_factory=lambda: config.SCHEDULE_TIME_SCALE)

    def validate(self) -> "SymLossConfig":
        # η = 1 等价于屏蔽 (shielding)
        if not 0.0 < self.eta < 1.0:
            raise ConfigError(f"η 必须严格在 (0, 1) 内，当前 {self.eta}")
        if self.theta is not None and self.theta < 0.0:
            raise ConfigError(f"Θ 不能为负，当前 {self.theta}")
        if not self.theta_initial >= self.theta_final >= 0.0:
            raise ConfigError(f"需要 Θ_i ≥ Θ_f ≥ 0，当前 Θ_i={self.theta_initial}, Θ_f={self.theta_final}")
        return self


def reference_distribution(mask, eta: float) -> CategoricalDistribution:
    mask = np.asarray(mask, dtype=bool)
    weights = np.where(mask, eta, 1.0 - eta)
    return distribution_from_probs(weights / weights.sum(axis=-1, keepdims=True))


def symbolic_loss(logp_new, logp_ref, adv, clip_coef: float):
    """batch 均值 min(ρ_sym·Â, clip(ρ_sym)·Â)，ρ_sym = π_θ / π_ref"""
    return clipped_policy_loss(logp_new, logp_ref, adv, clip_coef)


def combined_loss(ppo_loss, sym_loss, theta: float):
    """L = L_PPO − Θ·L_sym"""
    return ppo_loss - theta * sym_loss
