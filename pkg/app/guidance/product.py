# -*- coding: utf-8 -*-
"""
采样时的乘积重加权

π̃(a|s) ∝ π_θ(a|s) · m(a)，被蕴含的动作 m(a) = 1 + λ·ε_t，其余为 1。
"""
from dataclasses import dataclass, field

import numpy as np

from app import config
from app.errors import ConfigError
from app.nn.distribution import CategoricalDistribution, entropy_of


@dataclass(frozen=True)
class ProductConfig:
    lam: float = 1.0
    eps_initial: float = 1.0
    eps_rate: float = 0.4
    eps_final: float = 0.0
    time_scale: float = field(default_factory=lambda: config.SCHEDULE_TIME_SCALE)

    def validate(self) -> "ProductConfig":
        if not 0.0 < self.lam <= 1.0:
            raise ConfigError(f"λ 必须在 (0, 1] 内，当前 {self.lam}")
        if not self.eps_initial >= self.eps_final >= 0.0:
            raise ConfigError(f"需要 ε_i ≥ ε_f ≥ 0，当前 ε_i={self.eps_initial}, ε_f={self.eps_final}")
        if self.eps_rate < 0.0 or self.time_scale < 0.0:
            raise ConfigError("ε_r 和 time_scale 不能为负")
        return self


def reweighted_distribution(
    dist: CategoricalDistribution,
    mask,
    lam: float,
    eps: float,
) -> CategoricalDistribution:
    """
    乘积重加权

    λ·ε_t = 0 或掩码全同 (全 0 / 全 1) 的行原样返回，保证退化为原策略。
    """
    weight = lam * eps
    mask = np.asarray(mask, dtype=bool)
    uniform = mask.all(axis=-1) | ~mask.any(axis=-1)
    if weight == 0.0 or np.all(uniform):
        return dist

    log_m = np.where(mask, np.log1p(weight), 0.0)
    shifted = dist.log_probs + log_m
    peak = shifted.max(axis=-1, keepdims=True)
    log_z = peak + np.log(np.exp(shifted - peak).sum(axis=-1, keepdims=True))
    log_probs = shifted - log_z

    keep = np.asarray(uniform)[..., None] if mask.ndim > 1 else np.asarray(uniform)
    log_probs = np.where(keep, dist.log_probs, log_probs)
    probs = np.where(keep, dist.probs, np.exp(log_probs))
    logits = np.where(keep, dist.logits, log_probs)
    return CategoricalDistribution(logits, probs, log_probs, entropy_of(probs, log_probs))
