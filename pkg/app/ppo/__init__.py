# -*- coding: utf-8 -*-
"""
PPO 核心: rollout 缓冲、GAE、裁剪损失

训练循环在 app.ppo.trainer，单独导入 (依赖 app.guidance)。
"""

from .buffer import RolloutBuffer
from .losses import compute_gae, normalize_advantages, clipped_policy_loss, value_loss, total_ppo_loss

__all__ = [
    'RolloutBuffer', 'compute_gae', 'normalize_advantages',
    'clipped_policy_loss', 'value_loss', 'total_ppo_loss',
]
