# -*- coding: utf-8 -*-
"""
Adam 优化器 (带全局梯度范数裁剪)
"""
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from app.errors import NumericError
from app.nn.network import ParameterSet


@dataclass
class AdamState:
    """一阶/二阶矩缓冲 + 步数"""
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-5
    t: int = 0

    @classmethod
    def for_params(cls, params: ParameterSet, **kwargs) -> "AdamState":
        state = cls(**kwargs)
        for name, tensor in params.items():
            state.m[name] = np.zeros_like(tensor.data)
            state.v[name] = np.zeros_like(tensor.data)
        return state


def global_grad_norm(params: ParameterSet) -> float:
    total = 0.0
    for _, tensor in params.items():
        if tensor.grad is not None:
            total += float(np.sum(tensor.grad ** 2))
    return float(np.sqrt(total))


def clip_grad_norm(params: ParameterSet, max_norm: float) -> float:
    """按全局 L2 范数缩放梯度，返回裁剪前的范数"""
    norm = global_grad_norm(params)
    coef = max_norm / (norm + 1e-6)
    if coef < 1.0:
        for _, tensor in params.items():
            if tensor.grad is not None:
                tensor.grad *= coef
    return norm


def adam_update(
    params: ParameterSet,
    state: AdamState,
    lr: float,
    max_grad_norm: Optional[float] = None,
) -> float:
    """
    执行一步 Adam 更新

    先检查梯度 NaN，再做全局范数裁剪，然后按偏差校正后的矩更新参数，最后清零梯度。

    Returns:
        裁剪前的全局梯度范数
    """
    for name, tensor in params.items():
        if tensor.grad is None:
            tensor.grad = np.zeros_like(tensor.data)
        if not np.all(np.isfinite(tensor.grad)):
            raise NumericError(f"参数 {name} 的梯度出现 NaN/Inf")

    if max_grad_norm is not None:
        norm = clip_grad_norm(params, max_grad_norm)
    else:
        norm = global_grad_norm(params)

    state.t += 1
    bias1 = 1.0 - state.beta1 ** state.t
    bias2 = 1.0 - state.beta2 ** state.t
    for name, tensor in params.items():
        if name not in state.m:
            state.m[name] = np.zeros_like(tensor.data)
            state.v[name] = np.zeros_like(tensor.data)
        grad = tensor.grad
        state.m[name] = state.beta1 * state.m[name] + (1.0 - state.beta1) * grad
        state.v[name] = state.beta2 * state.v[name] + (1.0 - state.beta2) * grad ** 2
        m_hat = state.m[name] / bias1
        v_hat = state.v[name] / bias2
        tensor.data = tensor.data - lr * m_hat / (np.sqrt(v_hat) + state.eps)

    params.step += 1
    params.zero_grad()
    params.check_finite()
    return norm
