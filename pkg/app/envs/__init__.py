# -*- coding: utf-8 -*-
"""
环境层: DoorKey / OfficeWorld / WaterWorld
"""

from .base import (
    EnvConfig, StepResult, BaseEnv, sparse_reward, make_env, vocabulary_for,
    reset, step, encode_observation, ground_state, action_atom,
)

__all__ = [
    'EnvConfig', 'StepResult', 'BaseEnv', 'sparse_reward', 'make_env', 'vocabulary_for',
    'reset', 'step', 'encode_observation', 'ground_state', 'action_atom',
]
