# -*- coding: utf-8 -*-
"""
参数集合与前馈网络

策略网络和价值网络是两个独立的 MLP (2 个隐藏层 × 64，tanh)，
参数统一放在 ParameterSet 里，命名形如 "policy.0.weight" / "value.2.bias"。
"""
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from app.errors import ConfigError, NumericError
from app.nn.tensor import Tensor

HIDDEN_SIZES = (64, 64)
HIDDEN_GAIN = float(np.sqrt(2.0))
POLICY_HEAD_GAIN = 0.01
VALUE_HEAD_GAIN = 1.0


class ParameterSet:
    """有序的命名参数集合，每个参数带同形状的梯度槽"""

    def __init__(self, named: Optional[Dict[str, np.ndarray]] = None):
        self._params: Dict[str, Tensor] = {}
        # 已应用的优化步数
        self.step = 0
        for name, value in (named or {}).items():
            self.add(name, value)

    def add(self, name: str, value) -> Tensor:
        if name in self._params:
            raise ConfigError(f"参数 {name} 已存在")
        tensor = Tensor(np.array(value, dtype=np.float64), requires_grad=True)
        self._params[name] = tensor
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def __len__(self) -> int:
        return len(self._params)

    def items(self) -> List[Tuple[str, Tensor]]:
        return list(self._params.items())

    def layers(self, prefix: str) -> List[Tuple[Tensor, Tensor]]:
        """按下标顺序返回 prefix 对应的 (weight, bias) 列表"""
        result = []
        index = 0
        while f"{prefix}.{index}.weight" in self._params:
            result.append((
                self._params[f"{prefix}.{index}.weight"],
                self._params[f"{prefix}.{index}.bias"],
            ))
            index += 1
        return result

    @classmethod
    def from_layers(cls, layers: Sequence[Tuple[np.ndarray, np.ndarray]], prefix: str = "policy") -> "ParameterSet":
        params = cls()
        for index, (weight, bias) in enumerate(layers):
            params.add(f"{prefix}.{index}.weight", weight)
            params.add(f"{prefix}.{index}.bias", bias)
        return params

    def zero_grad(self):
        for tensor in self._params.values():
            tensor.grad = np.zeros_like(tensor.data)

    def check_finite(self):
        for name, tensor in self._params.items():
            if not np.all(np.isfinite(tensor.data)):
                raise NumericError(f"参数 {name} 出现 NaN/Inf")

    def snapshot(self) -> Dict[str, np.ndarray]:
        return {name: tensor.data.copy() for name, tensor in self._params.items()}

    def load(self, snapshot: Dict[str, np.ndarray]):
        for name, value in snapshot.items():
            self._params[name].data = np.array(value, dtype=np.float64)


def orthogonal(shape: Tuple[int, int], gain: float, rng: np.random.Generator) -> np.ndarray:
    """正交初始化 (QR 分解，符号按对角线校正)"""
    rows, cols = shape
    flat = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(flat)
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return gain * q[:rows, :cols]


def init_mlp(
    params: ParameterSet,
    prefix: str,
    in_dim: int,
    out_dim: int,
    head_gain: float,
    rng: np.random.Generator,
    hidden: Sequence[int] = HIDDEN_SIZES,
):
    sizes = [in_dim, *hidden, out_dim]
    for index in range(len(sizes) - 1):
        gain = head_gain if index == len(sizes) - 2 else HIDDEN_GAIN
        params.add(f"{prefix}.{index}.weight", orthogonal((sizes[index + 1], sizes[index]), gain, rng))
        params.add(f"{prefix}.{index}.bias", np.zeros(sizes[index + 1]))


def build_actor_critic(obs_dim: int, n_actions: int, rng: np.random.Generator) -> ParameterSet:
    """构建策略网络 + 价值网络的参数"""
    params = ParameterSet()
    init_mlp(params, "policy", obs_dim, n_actions, POLICY_HEAD_GAIN, rng)
    init_mlp(params, "value", obs_dim, 1, VALUE_HEAD_GAIN, rng)
    return params


def mlp_forward(obs, layers: Sequence[Tuple[Tensor, Tensor]]) -> Tensor:
    """x @ W.T + b，隐藏层 tanh，输出层线性"""
    if not layers:
        raise ConfigError("网络没有任何层")
    x = obs if isinstance(obs, Tensor) else Tensor(np.asarray(obs, dtype=np.float64))
    in_width = layers[0][0].shape[1]
    if x.shape[-1] != in_width:
        raise ConfigError(f"观测维度 {x.shape[-1]} 与网络输入宽度 {in_width} 不一致")
    for index, (weight, bias) in enumerate(layers):
        x = x @ weight.T + bias
        if index < len(layers) - 1:
            x = x.tanh()
    return x


def policy_forward(obs, params: ParameterSet) -> Tensor:
    """策略 logits，obs 为 [obs_dim] 或 [N, obs_dim]"""
    return mlp_forward(obs, params.layers("policy"))


def value_forward(obs, params: ParameterSet) -> Tensor:
    """状态价值，输出形状去掉最后的单位维"""
    out = mlp_forward(obs, params.layers("value"))
    return out.reshape(out.shape[:-1])
