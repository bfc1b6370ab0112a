# -*- coding: utf-8 -*-
"""
学习曲线: 多种子聚合、CSV / 图片输出
"""
import os
from typing import Dict, Iterable, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from app import config  # noqa: E402
from .storage import episodes_frame, find_run_dirs, read_manifest  # noqa: E402

CURVE_COLUMNS = ["step", "method", "mean", "std"]
FORMATS = ("csv", "image")

METHOD_ORDER = ("product", "symloss", "ppo", "rm")
METHOD_LABELS = {
    "product": "H-PPO-Product",
    "symloss": "H-PPO-SymLoss",
    "ppo": "PPO",
    "rm": "PPO-RM",
}
METHOD_COLORS = {
    "product": "#0173B2",
    "symloss": "#CC78BC",
    "ppo": "#ED9C0E",
    "rm": "#029E73",
}


def smooth_returns(episodes: pd.DataFrame, window: Optional[int]) -> pd.Series:
    """按 global_step 排序后做滑动平均，index 为 global_step；window 为 None 时返回原始回报"""
    episodes = episodes.sort_values("global_step", kind="stable")
    smoothed = episodes["episode_return"].astype(float)
    if window is not None:
        smoothed = smoothed.rolling(window=max(1, window), min_periods=1).mean()
    series = pd.Series(smoothed.to_numpy(), index=episodes["global_step"].to_numpy(dtype=np.int64))
    # 同一步结束的多局只保留最后一个值
    return series[~series.index.duplicated(keep="last")]


def aggregate_method(series: Sequence[pd.Series], method: str) -> pd.DataFrame:
    """
    同一方法多个种子的曲线对齐到公共步数网格

    网格取各条曲线步数的并集，并限制在公共区间 [max(起点), min(终点)] 内；
    每条曲线在网格上取最近一次的值，再求均值和总体标准差。
    """
    series = [s for s in series if len(s)]
    if not series:
        raise ValueError(f"方法 {method} 没有任何 episode 记录")
    start = max(int(s.index.min()) for s in series)
    end = min(int(s.index.max()) for s in series)
    if start > end:
        raise ValueError(f"方法 {method} 的各个种子没有公共步数区间")
    grid = np.unique(np.concatenate([s.index.to_numpy() for s in series]))
    grid = grid[(grid >= start) & (grid <= end)]
    aligned = np.stack([s.reindex(grid, method="ffill").to_numpy(dtype=np.float64) for s in series])
    return pd.DataFrame({
        "step": grid,
        "method": method,
        "mean": aligned.mean(axis=0),
        "std": aligned.std(axis=0),
    }, columns=CURVE_COLUMNS)


def aggregate_frames(
    runs: Dict[str, List[pd.DataFrame]],
    window: Optional[int] = None,
    smooth: bool = True,
) -> pd.DataFrame:
    """runs: 方法 → 各种子的 episode 表；smooth=False 时不做滑动平均"""
    if not runs:
        raise ValueError("没有可聚合的运行")
    if not smooth:
        window = None
    elif window is None:
        window = config.SMOOTHING_WINDOW
    frames = []
    for method in _ordered(runs):
        frames.append(aggregate_method([smooth_returns(df, window) for df in runs[method]], method))
    return pd.concat(frames, ignore_index=True)


def aggregate(run_dirs: Iterable[str], window: Optional[int] = None, smooth: bool = True) -> pd.DataFrame:
    """
    聚合运行目录 (可以是上层目录，会递归查找)

    Returns:
        列为 step, method, mean, std 的曲线表
    """
    grouped: Dict[str, List[pd.DataFrame]] = {}
    tasks = set()
    for run_dir in find_run_dirs(list(run_dirs)):
        manifest = read_manifest(run_dir)
        tasks.add(manifest.get("task"))
        grouped.setdefault(manifest.get("label", manifest["method"]), []).append(episodes_frame(run_dir))
    if not grouped:
        raise ValueError("没有找到任何运行目录 (缺少 manifest.json)")
    if len(tasks) > 1:
        print(f"⚠️ 聚合的运行来自多个任务: {', '.join(sorted(map(str, tasks)))}")
    return aggregate_frames(grouped, window, smooth)


def _ordered(methods: Iterable[str]) -> List[str]:
    methods = list(methods)
    known = [m for m in METHOD_ORDER if m in methods]
    return known + sorted(m for m in methods if m not in METHOD_ORDER)


def _base_method(label: str) -> str:
    return label.split("-", 1)[0]


def area_under_curve(curves: pd.DataFrame, method: str) -> float:
    """均值曲线的梯形面积除以步数跨度 (即平均回报)"""
    curve = curves[curves["method"] == method].sort_values("step")
    if curve.empty:
        raise ValueError(f"曲线中没有方法 {method}")
    steps = curve["step"].to_numpy(dtype=np.float64)
    means = curve["mean"].to_numpy(dtype=np.float64)
    if len(steps) == 1:
        return float(means[0])
    area = float(np.sum(np.diff(steps) * (means[1:] + means[:-1]) / 2.0))
    return area / float(steps[-1] - steps[0])


def plot_curves(curves: pd.DataFrame, title: str = ""):
    """均值线 + 标准差阴影，每个方法固定颜色"""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for method in _ordered(curves["method"].unique()):
        curve = curves[curves["method"] == method].sort_values("step")
        base = _base_method(method)
        color = METHOD_COLORS.get(base)
        label = METHOD_LABELS.get(method, method)
        steps = curve["step"].to_numpy()
        mean = curve["mean"].to_numpy()
        std = curve["std"].to_numpy()
        ax.plot(steps, mean, color=color, label=label, linewidth=1.5)
        ax.fill_between(steps, mean - std, mean + std, color=color, alpha=0.2, linewidth=0)
    ax.set_xlabel("Timesteps")
    ax.set_ylabel("Return")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="lower right")
    fig.tight_layout()
    return fig


def emit(
    curves: pd.DataFrame,
    out_path: str,
    fmt: str = "csv",
    methods: Optional[Sequence[str]] = None,
    title: str = "",
) -> str:
    """
    输出曲线

    Args:
        curves: aggregate 的结果
        out_path: 目标文件 (csv) 或图片文件路径 (image)
        fmt: csv | image
        methods: 只输出这些方法 (None 表示全部)

    Returns:
        写出的文件路径
    """
    if fmt not in FORMATS:
        raise ValueError(f"未知输出格式: {fmt}，可选 {', '.join(FORMATS)}")
    if methods is not None:
        curves = curves[curves["method"].isin(list(methods))]
    if curves.empty:
        raise ValueError("没有可输出的曲线 (方法子集为空)")

    parent = os.path.dirname(os.path.abspath(out_path))
    os.makedirs(parent, exist_ok=True)
    if fmt == "csv":
        curves.to_csv(out_path, index=False, columns=CURVE_COLUMNS)
        return out_path

    fig = plot_curves(curves, title)
    try:
        fig.savefig(out_path, dpi=150, bbox_inches="tight")
    finally:
        plt.close(fig)
    return out_path


def load_curves(path: str) -> pd.DataFrame:
    curves = pd.read_csv(path)
    missing = [c for c in CURVE_COLUMNS if c not in curves.columns]
    if missing:
        raise ValueError(f"{path} 缺少列: {', '.join(missing)}")
    return curves
