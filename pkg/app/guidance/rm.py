# -*- coding: utf-8 -*-
"""
奖励机塑形基线

训练奖励 = 基础奖励 + 动作级奖惩 + 进度奖惩；上报奖励始终是基础奖励。
"""
from dataclasses import dataclass
from typing import Optional, Tuple

from app.errors import ConfigError


@dataclass(frozen=True)
class RMShapingConfig:
    action_bonus: float = 0.01
    # None 时与 bonus 相同
    action_penalty: Optional[float] = None
    progress_bonus: float = 0.1
    regress_penalty: Optional[float] = None

    @property
    def resolved_action_penalty(self) -> float:
        return self.action_bonus if self.action_penalty is None else self.action_penalty

    @property
    def resolved_regress_penalty(self) -> float:
        return self.progress_bonus if self.regress_penalty is None else self.regress_penalty

    def validate(self) -> "RMShapingConfig":
        values = (self.action_bonus, self.resolved_action_penalty, self.progress_bonus, self.resolved_regress_penalty)
        if any(value < 0.0 for value in values):
            raise ConfigError("塑形系数不能为负")
        return self


def rm_shaped_reward(base_reward: float, action_entailed: bool, rm_delta: int, cfg: RMShapingConfig) -> Tuple[float, float]:
    """返回 (训练奖励, 上报奖励)"""
    shaped = base_reward
    shaped += cfg.action_bonus if action_entailed else -cfg.resolved_action_penalty
    if rm_delta > 0:
        shaped += cfg.progress_bonus * rm_delta
    elif rm_delta < 0:
        shaped += cfg.resolved_regress_penalty * rm_delta
    return shaped, base_reward
