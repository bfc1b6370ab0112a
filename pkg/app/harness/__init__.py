# -*- coding: utf-8 -*-
"""
实验层: 配置、运行、指标存储、学习曲线
"""

from .experiment import (
    ExperimentConfig, TASK_CATALOGUE, METHODS, default_config, config_from_dict,
    load_config, apply_overrides, bundled_config_path,
)
from .runner import run, ablation_configs, ablation_grid
from .curves import aggregate, emit, area_under_curve

__all__ = [
    'ExperimentConfig', 'TASK_CATALOGUE', 'METHODS', 'default_config', 'config_from_dict',
    'load_config', 'apply_overrides', 'bundled_config_path',
    'run', 'ablation_configs', 'ablation_grid', 'aggregate', 'emit', 'area_under_curve',
]
