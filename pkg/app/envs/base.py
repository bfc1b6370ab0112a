# -*- coding: utf-8 -*-
"""
环境公共部分: 配置、单步结果、稀疏奖励、统一的 reset/step 接口
"""
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Optional, Tuple

import numpy as np

from app import config
from app.errors import ConfigError, UnknownPredicateError, UsageError
from app.logic.terms import Atom, FactBase
from app.tasks import TaskSpec, get_task, normalize_variant

DOMAINS = ("doorkey", "officeworld", "waterworld")

DEFAULT_SIZES = {"doorkey": 8, "waterworld": 400}
DEFAULT_OFFICE_SHAPE = (12, 9)


@dataclass(frozen=True)
class EnvConfig:
    """环境配置"""
    domain: str
    task: str = ""
    # DoorKey 网格边长 / WaterWorld 盒子边长
    size: Optional[int] = None
    # OfficeWorld 宽 × 高
    width: Optional[int] = None
    height: Optional[int] = None
    num_keys: int = 1
    max_steps: Optional[int] = None
    seed: int = 0
    allow_distractor_door_color: bool = False
    reset_on_wrong_touch: bool = True

    def validate(self) -> "EnvConfig":
        if self.domain not in DOMAINS:
            raise ConfigError(f"未知环境: {self.domain}，可选 {', '.join(DOMAINS)}")
        if self.domain == "doorkey":
            if self.resolved_size() < 5:
                raise ConfigError(f"DoorKey 网格太小: {self.resolved_size()}")
            if self.num_keys not in (1, 2, 4):
                raise ConfigError(f"DoorKey 钥匙数只能是 1/2/4，当前 {self.num_keys}")
        if self.domain == "officeworld":
            if self.resolved_shape() != DEFAULT_OFFICE_SHAPE:
                raise ConfigError(f"OfficeWorld 只支持 {DEFAULT_OFFICE_SHAPE[0]}×{DEFAULT_OFFICE_SHAPE[1]} 地图")
        if self.max_steps is not None and self.max_steps <= 0:
            raise ConfigError(f"max_steps 必须为正整数，当前 {self.max_steps}")
        get_task(self.resolved_task())
        return self

    def resolved_task(self) -> str:
        if self.domain == "doorkey":
            return "doorkey"
        if not self.task:
            raise ConfigError(f"{self.domain} 需要指定任务变体")
        return normalize_variant(self.task)

    def resolved_size(self) -> int:
        return int(self.size if self.size is not None else DEFAULT_SIZES.get(self.domain, 0))

    def resolved_shape(self) -> Tuple[int, int]:
        return (
            int(self.width if self.width is not None else DEFAULT_OFFICE_SHAPE[0]),
            int(self.height if self.height is not None else DEFAULT_OFFICE_SHAPE[1]),
        )

    def resolved_max_steps(self) -> int:
        if self.max_steps is not None:
            return int(self.max_steps)
        if self.domain == "doorkey":
            size = self.resolved_size()
            return size * size * 10
        if self.domain == "officeworld":
            width, height = self.resolved_shape()
            return width * height * 10
        return self.resolved_size() // 2


@dataclass(frozen=True)
class StepResult:
    """单步结果；truncated 表示因步数上限结束"""
    observation: np.ndarray
    reward: float
    done: bool
    truncated: bool
    terminated: bool
    events: FrozenSet[str] = field(default_factory=frozenset)
    success: bool = False


def sparse_reward(step_count: int, max_steps: int, success: bool) -> float:
    """成功时 1 − 0.9 · step_count / max_steps，否则 0"""
    if not success:
        return 0.0
    return 1.0 - 0.9 * (step_count / max_steps)


class BaseEnv:
    """
    环境基类

    子类实现 _layout / _apply / encode_observation / ground_state / action_atom，
    基类负责步数、任务进度、稀疏奖励和结束判断。
    """

    domain = ""
    n_actions = 0
    action_names: Tuple[str, ...] = ()
    # 谓词 → 元数
    fact_vocabulary: Dict[str, int] = {}
    action_vocabulary: Dict[str, int] = {}

    def __init__(self, env_config: EnvConfig):
        self.config = env_config.validate()
        self.task: TaskSpec = get_task(env_config.resolved_task(), env_config.reset_on_wrong_touch)
        self.max_steps = env_config.resolved_max_steps()
        self.step_count = 0
        self.done = True
        self.progress = self.task.initial

    @property
    def obs_dim(self) -> int:
        raise NotImplementedError

    def reset(self, episode_seed) -> np.ndarray:
        rng = np.random.default_rng(episode_seed)
        self.step_count = 0
        self.done = False
        self.progress = self.task.initial
        self._layout(rng)
        return self.encode_observation()

    def step(self, action: int) -> StepResult:
        if self.done:
            raise UsageError("episode 已结束，需要先 reset()")
        action = int(action)
        if not 0 <= action < self.n_actions:
            raise UsageError(f"动作下标越界: {action}，有效范围 [0, {self.n_actions})")

        events, failed = self._apply(action)
        self.step_count += 1
        self.progress = self.task.advance(self.progress, events)
        success = self.task.complete(self.progress)
        terminated = success or failed
        truncated = not terminated and self.step_count >= self.max_steps
        self.done = terminated or truncated

        observation = self.encode_observation()
        if config.CHECK_FACTS:
            check_facts(self.ground_state(), self.fact_vocabulary)
        return StepResult(
            observation=observation,
            reward=sparse_reward(self.step_count, self.max_steps, success),
            done=self.done,
            truncated=truncated,
            terminated=terminated,
            events=frozenset(events),
            success=success,
        )

    # ─── 子类实现 ───

    def _layout(self, rng: np.random.Generator):
        raise NotImplementedError

    def _apply(self, action: int) -> Tuple[FrozenSet[str], bool]:
        """执行动作，返回 (事件集合, 是否失败终止)"""
        raise NotImplementedError

    def encode_observation(self) -> np.ndarray:
        raise NotImplementedError

    def ground_state(self) -> FactBase:
        raise NotImplementedError

    def action_atom(self, action: int) -> Optional[Atom]:
        raise NotImplementedError

    def render_ascii(self) -> str:
        return ""


def check_facts(facts: FactBase, vocabulary: Dict[str, int]):
    """校验事实的谓词和元数都在词表中"""
    for atom in facts:
        arity = vocabulary.get(atom.predicate)
        if arity is None:
            raise UnknownPredicateError(f"事实 {atom} 的谓词不在领域词表中")
        if arity != len(atom.args):
            raise UnknownPredicateError(f"事实 {atom} 的元数应为 {arity}")


def make_env(env_config: EnvConfig) -> BaseEnv:
    """根据 domain 创建环境实例 (未 reset)"""
    env_config.validate()
    if env_config.domain == "doorkey":
        from app.envs.doorkey import DoorKeyEnv
        return DoorKeyEnv(env_config)
    if env_config.domain == "officeworld":
        from app.envs.officeworld import OfficeWorldEnv
        return OfficeWorldEnv(env_config)
    from app.envs.waterworld import WaterWorldEnv
    return WaterWorldEnv(env_config)


def vocabulary_for(domain: str) -> Tuple[Dict[str, int], Dict[str, int]]:
    """返回 (事实词表, 动作词表)"""
    if domain == "doorkey":
        from app.envs.doorkey import DoorKeyEnv as env_cls
    elif domain == "officeworld":
        from app.envs.officeworld import OfficeWorldEnv as env_cls
    elif domain == "waterworld":
        from app.envs.waterworld import WaterWorldEnv as env_cls
    else:
        raise ConfigError(f"未知环境: {domain}")
    return dict(env_cls.fact_vocabulary), dict(env_cls.action_vocabulary)


# ─── 函数式接口 ───


def reset(env_config: EnvConfig, episode_seed) -> Tuple[BaseEnv, np.ndarray]:
    env = make_env(env_config)
    observation = env.reset(episode_seed)
    return env, observation


def step(env: BaseEnv, action: int) -> StepResult:
    return env.step(action)


def encode_observation(env: BaseEnv) -> np.ndarray:
    return env.encode_observation()


def ground_state(env: BaseEnv) -> FactBase:
    return env.ground_state()


def action_atom(env: BaseEnv, action: int) -> Optional[Atom]:
    return env.action_atom(action)
