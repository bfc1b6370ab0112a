# -*- coding: utf-8 -*-
"""
Rollout 缓冲器 - 按 (step, env) 存储一次收集的全部转移
"""
from typing import Dict

import numpy as np

from app.errors import UsageError


class RolloutBuffer:
    """固定大小的 [num_steps, num_envs] 缓冲"""

    def __init__(self, num_steps: int, num_envs: int, obs_dim: int, n_actions: int):
        """
        初始化缓冲器

        Args:
            num_steps: 每个环境收集的步数
            num_envs: 并行环境数
            obs_dim: 观测维度
            n_actions: 动作数 (掩码宽度)
        """
        self.num_steps = num_steps
        self.num_envs = num_envs
        self.obs = np.zeros((num_steps, num_envs, obs_dim), dtype=np.float64)
        self.actions = np.zeros((num_steps, num_envs), dtype=np.int64)
        self.logprobs = np.zeros((num_steps, num_envs), dtype=np.float64)
        self.rewards = np.zeros((num_steps, num_envs), dtype=np.float64)
        self.dones = np.zeros((num_steps, num_envs), dtype=np.float64)
        self.values = np.zeros((num_steps, num_envs), dtype=np.float64)
        self.masks = np.zeros((num_steps, num_envs, n_actions), dtype=bool)
        # 最后一步之后状态的价值
        self.bootstrap_values = np.zeros(num_envs, dtype=np.float64)
        self.step = 0

    @property
    def full(self) -> bool:
        return self.step == self.num_steps

    def add(self, obs, actions, logprobs, rewards, dones, values, masks):
        if self.full:
            raise UsageError("缓冲器已满，需要先 reset()")
        t = self.step
        self.obs[t] = obs
        self.actions[t] = actions
        self.logprobs[t] = logprobs
        self.rewards[t] = rewards
        self.dones[t] = dones
        self.values[t] = values
        self.masks[t] = masks
        self.step += 1

    def reset(self):
        self.step = 0

    def flatten(self) -> Dict[str, np.ndarray]:
        """展平成 [num_steps * num_envs, ...]；缓冲未写满时报错"""
        if not self.full:
            raise UsageError(f"缓冲器只写入了 {self.step}/{self.num_steps} 步")
        size = self.num_steps * self.num_envs
        return {
            "obs": self.obs.reshape(size, -1),
            "actions": self.actions.reshape(size),
            "logprobs": self.logprobs.reshape(size),
            "values": self.values.reshape(size),
            "masks": self.masks.reshape(size, -1),
        }
