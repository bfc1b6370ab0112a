# -*- coding: utf-8 -*-
"""
神经网络层: 自动微分、MLP、类别分布、Adam
"""

from .tensor import Tensor
from .network import ParameterSet, build_actor_critic, policy_forward, value_forward
from .distribution import CategoricalDistribution, distribution_from_logits, distribution_from_probs, sample
from .optim import AdamState, adam_update

__all__ = [
    'Tensor', 'ParameterSet', 'build_actor_critic', 'policy_forward', 'value_forward',
    'CategoricalDistribution', 'distribution_from_logits', 'distribution_from_probs', 'sample',
    'AdamState', 'adam_update',
]
