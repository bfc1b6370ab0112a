# -*- coding: utf-8 -*-
"""
实验配置

每个任务一份 JSON (configs/<task>.json)，结构:
{
  "task": "...", "env": {...}, "hyperparams": {...}, "guidance": {...},
  "rules": "xxx.rules", "seeds": [...], "eval_interval": N, "out_dir": "runs"
}
JSON 里省略的键取任务默认值；未知键一律报错。
"""
import copy
import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, List, NamedTuple, Optional, Sequence

from app import config
from app.envs.base import EnvConfig
from app.errors import ConfigError
from app.guidance.product import ProductConfig
from app.guidance.rm import RMShapingConfig
from app.guidance.settings import GUIDANCE_MODES, GuidanceConfig
from app.guidance.symloss import SymLossConfig
from app.ppo.trainer import Hyperparams

PRESETS = ("full", "desk")

# 方法名 ↔ 引导方式
METHODS = {"ppo": "none", "product": "product", "symloss": "symloss", "rm": "rm"}
MODE_TO_METHOD = {mode: method for method, mode in METHODS.items()}


class TaskDefaults(NamedTuple):
    env: Dict[str, Any]
    rules: str
    total_timesteps: int
    num_envs: int
    batch_size: int
    minibatch_size: int
    desk_timesteps: Optional[int] = None


TASK_CATALOGUE: Dict[str, TaskDefaults] = {
    "doorkey-8x8-1key": TaskDefaults(
        {"domain": "doorkey", "size": 8, "num_keys": 1}, "doorkey.rules", 5_000_000, 4, 512, 128, 500_000),
    "doorkey-8x8-2keys": TaskDefaults(
        {"domain": "doorkey", "size": 8, "num_keys": 2}, "doorkey.rules", 25_000_000, 8, 1024, 256),
    "doorkey-8x8-4keys": TaskDefaults(
        {"domain": "doorkey", "size": 8, "num_keys": 4}, "doorkey.rules", 50_000_000, 16, 2048, 512),
    "doorkey-16x16-1key": TaskDefaults(
        {"domain": "doorkey", "size": 16, "num_keys": 1}, "doorkey.rules", 5_000_000, 16, 2048, 512),
    "doorkey-16x16-2keys": TaskDefaults(
        {"domain": "doorkey", "size": 16, "num_keys": 2}, "doorkey.rules", 25_000_000, 32, 4096, 1024),
    "doorkey-16x16-4keys": TaskDefaults(
        {"domain": "doorkey", "size": 16, "num_keys": 4}, "doorkey.rules", 100_000_000, 64, 8192, 2048),
    "officeworld-delivercoffee": TaskDefaults(
        {"domain": "officeworld", "task": "delivercoffee"}, "officeworld_coffee.rules",
        1_000_000, 8, 1024, 256, 300_000),
    "officeworld-delivercoffeeandmail": TaskDefaults(
        {"domain": "officeworld", "task": "delivercoffeeandmail"}, "officeworld_coffee.rules",
        25_000_000, 32, 4096, 1024),
    "officeworld-patrolab": TaskDefaults(
        {"domain": "officeworld", "task": "patrolab"}, "officeworld_patrol_ab.rules", 5_000_000, 8, 1024, 256),
    "officeworld-patrolabc": TaskDefaults(
        {"domain": "officeworld", "task": "patrolabc"}, "officeworld_patrol.rules", 10_000_000, 8, 1024, 256),
    "waterworld-rg": TaskDefaults(
        {"domain": "waterworld", "task": "rg"}, "waterworld_rg.rules", 5_000_000, 8, 1024, 256, 500_000),
    "waterworld-rg-bc": TaskDefaults(
        {"domain": "waterworld", "task": "rg-bc"}, "waterworld_rg.rules", 10_000_000, 16, 2048, 512),
    "waterworld-rg-bc-my": TaskDefaults(
        {"domain": "waterworld", "task": "rg-bc-my"}, "waterworld_rg.rules", 20_000_000, 32, 4096, 1024),
}

# 桌面预设没有单独给出步数的任务按 1/20 缩减
DESK_SCALE = 20
DEFAULT_EVAL_INTERVAL = 10_000

_TOP_LEVEL_KEYS = ("task", "preset", "env", "hyperparams", "guidance", "rules", "seeds", "eval_interval", "out_dir", "tag")
_DERIVED_HP_KEYS = ("batch_size", "minibatch_size")


@dataclass(frozen=True)
class ExperimentConfig:
    task: str
    env: EnvConfig
    hyperparams: Hyperparams
    guidance: GuidanceConfig
    rules: str
    seeds: List[int]
    eval_interval: int = DEFAULT_EVAL_INTERVAL
    out_dir: str = field(default_factory=lambda: config.RUNS_DIR)
    preset: str = "full"
    # 消融实验的扫描点，如 {"theta": 0.5}
    tag: Dict[str, Any] = field(default_factory=dict)

    @property
    def method(self) -> str:
        return MODE_TO_METHOD[self.guidance.mode]

    @property
    def rules_path(self) -> str:
        if os.path.isabs(self.rules):
            return self.rules
        return os.path.join(config.RULES_DIR, self.rules)

    def validate(self) -> "ExperimentConfig":
        if self.task not in TASK_CATALOGUE:
            raise ConfigError(f"未知任务: {self.task}，可选: {', '.join(TASK_CATALOGUE)}")
        if self.preset not in PRESETS:
            raise ConfigError(f"未知预设: {self.preset}，可选 {', '.join(PRESETS)}")
        self.env.validate()
        self.hyperparams.validate()
        self.guidance.validate()
        if not self.seeds:
            raise ConfigError("seeds 不能为空")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError(f"seeds 有重复: {self.seeds}")
        if any(not isinstance(seed, int) or seed < 0 for seed in self.seeds):
            raise ConfigError(f"seed 必须是非负整数: {self.seeds}")
        if self.eval_interval <= 0:
            raise ConfigError(f"eval_interval 必须为正，当前 {self.eval_interval}")
        if not os.path.exists(self.rules_path):
            raise ConfigError(f"规则文件不存在: {self.rules_path}")
        return self

    def with_guidance(self, mode: str) -> "ExperimentConfig":
        return replace(self, guidance=replace(self.guidance, mode=resolve_mode(mode)))

    def to_dict(self) -> Dict[str, Any]:
        hp = asdict(self.hyperparams)
        hp["batch_size"] = self.hyperparams.batch_size
        hp["minibatch_size"] = self.hyperparams.minibatch_size
        env = {key: value for key, value in asdict(self.env).items() if value is not None}
        data = {
            "task": self.task,
            "preset": self.preset,
            "env": env,
            "hyperparams": hp,
            "guidance": asdict(self.guidance),
            "rules": self.rules,
            "seeds": list(self.seeds),
            "eval_interval": self.eval_interval,
            "out_dir": self.out_dir,
        }
        if self.tag:
            data["tag"] = dict(self.tag)
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


def resolve_mode(name: str) -> str:
    """接受方法名 (ppo/product/symloss/rm) 或引导方式 (none/...)"""
    if name in METHODS:
        return METHODS[name]
    if name in GUIDANCE_MODES:
        return name
    raise ConfigError(f"未知方法: {name}，可选 {', '.join(METHODS)}")


def default_dict(task: str, preset: str = "full") -> Dict[str, Any]:
    """任务的默认配置 (字典形式)"""
    if task not in TASK_CATALOGUE:
        raise ConfigError(f"未知任务: {task}，可选: {', '.join(TASK_CATALOGUE)}")
    if preset not in PRESETS:
        raise ConfigError(f"未知预设: {preset}，可选 {', '.join(PRESETS)}")
    defaults = TASK_CATALOGUE[task]
    total = defaults.total_timesteps
    seeds = config.FULL_SEEDS
    if preset == "desk":
        total = defaults.desk_timesteps or defaults.total_timesteps // DESK_SCALE
        seeds = config.DESK_SEEDS
    hp = asdict(Hyperparams(num_envs=defaults.num_envs, total_timesteps=total))
    hp["batch_size"] = defaults.batch_size
    hp["minibatch_size"] = defaults.minibatch_size
    return {
        "task": task,
        "preset": preset,
        "env": dict(defaults.env),
        "hyperparams": hp,
        "guidance": asdict(GuidanceConfig()),
        "rules": defaults.rules,
        "seeds": list(range(seeds)),
        "eval_interval": DEFAULT_EVAL_INTERVAL,
        "out_dir": config.RUNS_DIR,
    }


def default_config(task: str, preset: str = "full") -> ExperimentConfig:
    return config_from_dict(default_dict(task, preset))


def apply_preset(data: Dict[str, Any], preset: str) -> Dict[str, Any]:
    """把配置字典切换到指定预设: 只替换 total_timesteps 和 seeds"""
    task = data.get("task")
    if not task:
        raise ConfigError("config 缺少 task")
    preset_defaults = default_dict(task, preset)
    data = copy.deepcopy(data)
    data["preset"] = preset
    data.setdefault("hyperparams", {})["total_timesteps"] = preset_defaults["hyperparams"]["total_timesteps"]
    data["seeds"] = preset_defaults["seeds"]
    return data


def _check_keys(section: str, data: Dict[str, Any], allowed: Sequence[str]):
    if not isinstance(data, dict):
        raise ConfigError(f"{section} 必须是 JSON 对象")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"{section} 含未知键: {', '.join(unknown)}")


def _field_names(cls) -> List[str]:
    return [f.name for f in fields(cls)]


def _merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _build(cls, section: str, data: Dict[str, Any]):
    _check_keys(section, data, _field_names(cls))
    try:
        return cls(**data)
    except TypeError as e:
        raise ConfigError(f"{section} 字段错误: {e}") from e


def config_from_dict(data: Dict[str, Any]) -> ExperimentConfig:
    """校验并构造 ExperimentConfig；省略的键取任务默认值"""
    _check_keys("config", data, _TOP_LEVEL_KEYS)
    task = data.get("task")
    if not task:
        raise ConfigError("config 缺少 task")
    preset = data.get("preset", "full")
    data = _merge(default_dict(task, preset), data)

    hp_data = dict(data["hyperparams"])
    batch_size = hp_data.pop("batch_size", None)
    minibatch_size = hp_data.pop("minibatch_size", None)
    hyperparams = _build(Hyperparams, "hyperparams", hp_data)
    if batch_size is not None and batch_size != hyperparams.batch_size:
        raise ConfigError(
            f"batch_size {batch_size} 与 num_steps × num_envs = {hyperparams.batch_size} 不一致"
        )
    if minibatch_size is not None:
        if minibatch_size <= 0 or hyperparams.batch_size % minibatch_size != 0:
            raise ConfigError(f"minibatch_size {minibatch_size} 不能整除 batch_size {hyperparams.batch_size}")
        hyperparams = replace(hyperparams, num_minibatches=hyperparams.batch_size // minibatch_size)

    guidance_data = dict(data["guidance"])
    _check_keys("guidance", guidance_data, _field_names(GuidanceConfig))
    guidance = GuidanceConfig(
        mode=resolve_mode(guidance_data.get("mode", "none")),
        product=_build(ProductConfig, "guidance.product", guidance_data.get("product", {})),
        symloss=_build(SymLossConfig, "guidance.symloss", guidance_data.get("symloss", {})),
        rm=_build(RMShapingConfig, "guidance.rm", guidance_data.get("rm", {})),
    )

    seeds = data["seeds"]
    if not isinstance(seeds, list):
        raise ConfigError("seeds 必须是整数列表")

    experiment = ExperimentConfig(
        task=task,
        env=_build(EnvConfig, "env", data["env"]),
        hyperparams=hyperparams,
        guidance=guidance,
        rules=data["rules"],
        seeds=list(seeds),
        eval_interval=data["eval_interval"],
        out_dir=data["out_dir"],
        preset=preset,
        tag=dict(data.get("tag") or {}),
    )
    return experiment.validate()


def read_config_dict(path: str) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise ConfigError(f"配置文件不存在: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"配置文件 {path} 不是合法 JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"配置文件 {path} 顶层必须是 JSON 对象")
    return data


def load_config(path: str) -> ExperimentConfig:
    return config_from_dict(read_config_dict(path))


def bundled_config_path(task: str) -> str:
    return os.path.join(config.CONFIG_DIR, f"{task}.json")


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(data: Dict[str, Any], assignments: Sequence[str]) -> Dict[str, Any]:
    """
    应用 key.path=value 形式的覆盖，value 按 JSON 解析 (失败时当作字符串)

    Example:
        hyperparams.total_timesteps=20000
        guidance.symloss.theta=0.5
    """
    data = copy.deepcopy(data)
    for assignment in assignments:
        if "=" not in assignment:
            raise ConfigError(f"覆盖项格式应为 key.path=value: {assignment}")
        path, raw = assignment.split("=", 1)
        keys = [key for key in path.strip().split(".") if key]
        if not keys:
            raise ConfigError(f"覆盖项缺少键名: {assignment}")
        node = data
        for key in keys[:-1]:
            child = node.setdefault(key, {})
            if not isinstance(child, dict):
                raise ConfigError(f"{path}: {key} 不是对象，无法继续下钻")
            node = child
        node[keys[-1]] = _parse_value(raw.strip())
    return data
