# -*- coding: utf-8 -*-
"""
运行目录存储

- metrics.jsonl: 逐条追加、每条 flush，崩溃后已写入的记录仍可读
- manifest.json: 临时文件 + os.replace 原子替换
- metrics.csv / updates.csv: 运行结束时由 JSONL 导出
"""
import json
import os
import subprocess
import threading
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

import pandas as pd

MANIFEST_FILE = "manifest.json"
METRICS_FILE = "metrics.jsonl"
EPISODES_CSV = "metrics.csv"
UPDATES_CSV = "updates.csv"

EPISODE_COLUMNS = ["global_step", "episode_return", "length", "success"]

# 文件锁管理: 每个运行目录一个写锁
_file_locks = {}
_global_lock = threading.Lock()


def _get_file_lock(path: str) -> threading.Lock:
    """获取或创建文件专用的锁"""
    key = os.path.abspath(path)
    with _global_lock:
        if key not in _file_locks:
            _file_locks[key] = threading.Lock()
        return _file_locks[key]


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def git_revision(cwd: Optional[str] = None) -> Optional[str]:
    """当前 git 提交号，不在仓库里时返回 None"""
    try:
        result = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=cwd or os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))),
            capture_output=True, text=True, timeout=5,
        )
    except (OSError, subprocess.SubprocessError) as e:
        print(f"⚠️ 无法获取 git 版本号: {e}")
        return None
    if result.returncode != 0:
        print("⚠️ 无法获取 git 版本号: 不是 git 仓库")
        return None
    return result.stdout.strip() or None


# ─── manifest ───


def write_manifest(run_dir: str, manifest: Dict[str, Any]):
    """原子写入 manifest.json"""
    os.makedirs(run_dir, exist_ok=True)
    path = os.path.join(run_dir, MANIFEST_FILE)
    tmp_path = f"{path}.tmp"
    lock = _get_file_lock(path)
    with lock:
        with open(tmp_path, "w", encoding="utf-8") as f:
            json.dump(manifest, f, ensure_ascii=False, indent=2)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_path, path)


def read_manifest(run_dir: str) -> Dict[str, Any]:
    path = os.path.join(run_dir, MANIFEST_FILE)
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def is_run_dir(path: str) -> bool:
    return os.path.isfile(os.path.join(path, MANIFEST_FILE))


def find_run_dirs(roots: List[str]) -> List[str]:
    """递归查找含 manifest.json 的运行目录 (按路径排序)"""
    found = []
    for root in roots:
        if is_run_dir(root):
            found.append(root)
            continue
        for dirpath, _, filenames in os.walk(root):
            if MANIFEST_FILE in filenames:
                found.append(dirpath)
    return sorted(set(found))


# ─── metrics ───


class MetricsWriter:
    """metrics.jsonl 写入器 (每个运行目录单写者)；默认清空旧文件，resume=True 时续写"""

    def __init__(self, run_dir: str, resume: bool = False):
        os.makedirs(run_dir, exist_ok=True)
        self.path = os.path.join(run_dir, METRICS_FILE)
        self._lock = _get_file_lock(self.path)
        self._file = open(self.path, "a" if resume else "w", encoding="utf-8")

    def write(self, kind: str, record: Dict[str, Any]):
        line = json.dumps({"kind": kind, **record}, ensure_ascii=False)
        with self._lock:
            self._file.write(line + "\n")
            self._file.flush()

    def close(self):
        if not self._file.closed:
            self._file.close()

    def __enter__(self) -> "MetricsWriter":
        return self

    def __exit__(self, exc_type, exc, tb):
        self.close()


def read_metrics(run_dir: str, kind: Optional[str] = None) -> List[Dict[str, Any]]:
    """
    读取 metrics.jsonl

    中断的运行最后一行可能不完整，跳过无法解析的行并提示。
    """
    path = os.path.join(run_dir, METRICS_FILE)
    if not os.path.exists(path):
        return []
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                print(f"⚠️ 跳过损坏的指标记录: {path}:{line_no}")
                continue
            if kind is None or record.get("kind") == kind:
                records.append(record)
    return records


def episodes_frame(run_dir: str) -> pd.DataFrame:
    """一个运行的 episode 表 (优先 metrics.csv，没有时从 JSONL 重建)"""
    csv_path = os.path.join(run_dir, EPISODES_CSV)
    if os.path.exists(csv_path):
        return pd.read_csv(csv_path)
    records = read_metrics(run_dir, kind="episode")
    return pd.DataFrame(records, columns=EPISODE_COLUMNS)


def export_csv(run_dir: str, update_columns: List[str]):
    """把 JSONL 导出为 metrics.csv (episode) 和 updates.csv (update)；不含墙钟时间，便于逐字节比对"""
    episodes = pd.DataFrame(read_metrics(run_dir, kind="episode"), columns=EPISODE_COLUMNS)
    episodes.to_csv(os.path.join(run_dir, EPISODES_CSV), index=False)
    updates = pd.DataFrame(read_metrics(run_dir, kind="update"), columns=update_columns)
    updates.to_csv(os.path.join(run_dir, UPDATES_CSV), index=False)
