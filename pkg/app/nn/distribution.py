# -*- coding: utf-8 -*-
"""
离散分布工具
"""
from dataclasses import dataclass

import numpy as np

from app.errors import NumericError


@dataclass(frozen=True)
class CategoricalDistribution:
    """最后一维上的类别分布 (支持批量)"""
    logits: np.ndarray
    probs: np.ndarray
    log_probs: np.ndarray
    entropy: np.ndarray

    @property
    def n_actions(self) -> int:
        return int(self.probs.shape[-1])

    def log_prob(self, actions) -> np.ndarray:
        actions = np.asarray(actions, dtype=np.int64)
        if self.log_probs.ndim == 1:
            return self.log_probs[actions]
        return self.log_probs[np.arange(self.log_probs.shape[0]), actions]


def entropy_of(probs: np.ndarray, log_probs: np.ndarray) -> np.ndarray:
    # 0·log0 按 0 处理
    with np.errstate(invalid="ignore"):
        terms = np.where(probs > 0.0, probs * log_probs, 0.0)
    return -terms.sum(axis=-1)


def distribution_from_logits(logits) -> CategoricalDistribution:
    """减最大值的稳定 softmax"""
    logits = np.asarray(logits, dtype=np.float64)
    if np.isnan(logits).any():
        raise NumericError("logits 中出现 NaN")
    shifted = logits - logits.max(axis=-1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    log_probs = shifted - log_norm
    probs = np.exp(log_probs)
    return CategoricalDistribution(logits, probs, log_probs, entropy_of(probs, log_probs))


def distribution_from_probs(probs) -> CategoricalDistribution:
    """由已归一化的概率构造分布 (logits 取 log 概率)"""
    probs = np.asarray(probs, dtype=np.float64)
    if np.isnan(probs).any():
        raise NumericError("概率中出现 NaN")
    with np.errstate(divide="ignore"):
        log_probs = np.log(probs)
    return CategoricalDistribution(log_probs, probs, log_probs, entropy_of(probs, log_probs))


def sample(dist: CategoricalDistribution, rng: np.random.Generator):
    """逆 CDF 采样；单个分布返回 int，批量返回 int 数组"""
    cdf = np.cumsum(dist.probs, axis=-1)
    if cdf.ndim == 1:
        u = rng.random()
        index = int(np.count_nonzero(cdf <= u))
        return min(index, dist.n_actions - 1)
    u = rng.random(cdf.shape[0])
    index = np.count_nonzero(cdf <= u[:, None], axis=-1)
    return np.minimum(index, dist.n_actions - 1).astype(np.int64)
