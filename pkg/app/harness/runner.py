# -*- coding: utf-8 -*-
"""
实验运行器

目录结构: <out_dir>/<task>/<method>[-<param>-<value>]/seed_<n>/
  manifest.json  metrics.jsonl  metrics.csv  updates.csv
"""
import os
import time
from dataclasses import fields, replace
from typing import Any, Dict, List, Tuple

import numpy as np

from app import config
from app.envs.base import vocabulary_for
from app.errors import ConfigError, NumericError
from app.logic.parser import SymbolicPolicy, Vocabulary, load_rules
from app.ppo.trainer import EpisodeRecord, Trainer, UpdateStats
from .experiment import ExperimentConfig
from .storage import MetricsWriter, export_csv, git_revision, utc_now, write_manifest

ABLATION_PARAMS = ("theta", "epsilon_f")
THETA_GRID: Tuple[Any, ...] = (0.25, 0.5, 0.75, 1.0, "decay")
EPSILON_F_GRID: Tuple[float, ...] = (0.0, 0.2, 0.4)

UPDATE_COLUMNS = [f.name for f in fields(UpdateStats)]


def load_policy(experiment: ExperimentConfig) -> SymbolicPolicy:
    facts, actions = vocabulary_for(experiment.env.domain)
    return load_rules(experiment.rules_path, Vocabulary(facts, actions))


def run_label(experiment: ExperimentConfig) -> str:
    if not experiment.tag:
        return experiment.method
    suffix = "-".join(f"{key}-{value}" for key, value in sorted(experiment.tag.items()))
    return f"{experiment.method}-{suffix}"


def run_dir_for(experiment: ExperimentConfig, seed: int) -> str:
    return os.path.join(experiment.out_dir, experiment.task, run_label(experiment), f"seed_{seed}")


def _summary(episodes: List[EpisodeRecord]) -> Dict[str, Any]:
    if not episodes:
        return {"episodes": 0, "final_return": 0.0, "success_rate": 0.0}
    window = episodes[-config.SMOOTHING_WINDOW:]
    return {
        "episodes": len(episodes),
        "final_return": float(np.mean([e.episode_return for e in window])),
        "success_rate": float(np.mean([e.success for e in window])),
    }


def run_seed(experiment: ExperimentConfig, seed: int, policy: SymbolicPolicy) -> str:
    """单个种子的训练；指标边训练边写入"""
    run_dir = run_dir_for(experiment, seed)
    os.makedirs(run_dir, exist_ok=True)
    manifest = {
        "task": experiment.task,
        "method": experiment.method,
        "label": run_label(experiment),
        "seed": seed,
        "tag": dict(experiment.tag),
        "git": git_revision(),
        "started_at": utc_now(),
        "status": "running",
        "config": experiment.to_dict(),
    }
    write_manifest(run_dir, manifest)
    print(f"🚀 开始训练 {experiment.task} / {run_label(experiment)} / seed {seed}")
    print(f"📂 输出目录: {run_dir}")

    trainer = Trainer(experiment.env, experiment.hyperparams, experiment.guidance, policy, seed)
    started = time.time()
    next_report = experiment.eval_interval

    with MetricsWriter(run_dir) as writer:
        def on_episode(record: EpisodeRecord):
            writer.write("episode", record.to_dict())

        def on_update(stats: UpdateStats):
            nonlocal next_report
            writer.write("update", {**stats.to_dict(), "elapsed": round(time.time() - started, 3)})
            if stats.global_step >= next_report:
                next_report += experiment.eval_interval
                writer.write("checkpoint", {"global_step": stats.global_step, "elapsed": round(time.time() - started, 3)})

        try:
            episodes = trainer.train(on_episode=on_episode, on_update=on_update)
        except NumericError as e:
            manifest.update(status="failed", error=str(e), ended_at=utc_now())
            write_manifest(run_dir, manifest)
            print(f"❌ 数值异常，已中止: {e}")
            raise

    export_csv(run_dir, UPDATE_COLUMNS)
    summary = _summary(episodes)
    manifest.update(status="completed", ended_at=utc_now(), summary=summary)
    write_manifest(run_dir, manifest)
    print(f"✅ 完成 seed {seed}: {summary['episodes']} 局，最终回报 {summary['final_return']:.3f}，"
          f"成功率 {summary['success_rate']:.2%}")
    return run_dir


def run(experiment: ExperimentConfig) -> List[str]:
    """按配置里的每个种子各训练一次，返回运行目录列表"""
    experiment.validate()
    policy = load_policy(experiment)
    return [run_seed(experiment, seed, policy) for seed in experiment.seeds]


def ablation_configs(base: ExperimentConfig, param: str) -> List[ExperimentConfig]:
    """
    消融网格

    theta: Θ ∈ {0.25, 0.5, 0.75, 1.0} 常数 + 衰减调度 (symloss)
    epsilon_f: ε_f ∈ {0, 0.2, 0.4}，ε_i = 1、ε_r = 0.4 (product)
    """
    if param not in ABLATION_PARAMS:
        raise ConfigError(f"未知消融参数: {param}，可选 {', '.join(ABLATION_PARAMS)}")
    guidance = base.guidance
    grid = []
    if param == "theta":
        for value in THETA_GRID:
            theta = None if value == "decay" else float(value)
            symloss = replace(guidance.symloss, theta=theta, theta_initial=1.0, theta_rate=0.4, theta_final=0.0)
            grid.append(replace(
                base, guidance=replace(guidance, mode="symloss", symloss=symloss), tag={"theta": value},
            ))
    else:
        for value in EPSILON_F_GRID:
            product = replace(guidance.product, eps_initial=1.0, eps_rate=0.4, eps_final=value)
            grid.append(replace(
                base, guidance=replace(guidance, mode="product", product=product), tag={"epsilon_f": value},
            ))
    return [experiment.validate() for experiment in grid]


def ablation_grid(base: ExperimentConfig, param: str) -> List[str]:
    run_dirs = []
    for experiment in ablation_configs(base, param):
        print(f"🔧 消融 {param} = {experiment.tag[param]}")
        run_dirs.extend(run(experiment))
    return run_dirs
