# -*- coding: utf-8 -*-
"""
神经符号引导: 乘积重加权、符号辅助损失、奖励机塑形
"""

from .schedule import epsilon_at, theta_at
from .product import ProductConfig, reweighted_distribution
from .symloss import SymLossConfig, reference_distribution, symbolic_loss, combined_loss
from .rm import RMShapingConfig, rm_shaped_reward
from .settings import GUIDANCE_MODES, GuidanceConfig

__all__ = [
    'GUIDANCE_MODES', 'GuidanceConfig', 'epsilon_at', 'theta_at',
    'ProductConfig', 'reweighted_distribution',
    'SymLossConfig', 'reference_distribution', 'symbolic_loss', 'combined_loss',
    'RMShapingConfig', 'rm_shaped_reward',
]
