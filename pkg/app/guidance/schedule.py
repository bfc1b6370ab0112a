# -*- coding: utf-8 -*-
"""
ε / Θ 线性退火调度

t = progress · time_scale，progress = global_step / total_timesteps；
默认 time_scale = 2.5 时 (初值 1, 速率 0.4, 下限 0) 恰好在训练结束时降到 0。
"""


def linear_decay(progress: float, initial: float, rate: float, final: float, time_scale: float) -> float:
    progress = min(max(progress, 0.0), 1.0)
    return max(initial - progress * time_scale * rate, final)


def epsilon_at(progress: float, cfg) -> float:
    """ε_t = max(ε_i − t·ε_r, ε_f)"""
    return linear_decay(progress, cfg.eps_initial, cfg.eps_rate, cfg.eps_final, cfg.time_scale)


def theta_at(progress: float, cfg) -> float:
    """常数模式直接返回 Θ，否则 Θ_t = max(Θ_i − t·Θ_r, Θ_f)"""
    if cfg.theta is not None:
        return float(cfg.theta)
    return linear_decay(progress, cfg.theta_initial, cfg.theta_rate, cfg.theta_final, cfg.time_scale)
