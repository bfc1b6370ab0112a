# -*- coding: utf-8 -*-
"""环境变量配置单元测试。"""

import importlib

import pytest

CONFIG_KEYS = [
    "HPPO_RUNS_DIR",
    "HPPO_FULL_SEEDS",
    "HPPO_DESK_SEEDS",
    "HPPO_SMOOTHING_WINDOW",
    "HPPO_CHECK_FACTS",
    "HPPO_LAYOUT_RETRIES",
    "HPPO_VERBOSE",
    "HPPO_SCHEDULE_TIME_SCALE",
]


@pytest.fixture
def reload_config(monkeypatch):
    import app.config as config

    def _reload(**env):
        for key in CONFIG_KEYS:
            monkeypatch.delenv(key, raising=False)
        for key, value in env.items():
            monkeypatch.setenv(key, str(value))
        return importlib.reload(config)

    yield _reload
    monkeypatch.undo()
    importlib.reload(config)


def test_defaults(reload_config):
    cfg = reload_config()
    assert cfg.RUNS_DIR == "runs"
    assert cfg.FULL_SEEDS == 5
    assert cfg.DESK_SEEDS == 3
    assert cfg.SMOOTHING_WINDOW == 100
    assert cfg.CHECK_FACTS is False
    assert cfg.VERBOSE is True
    assert cfg.SCHEDULE_TIME_SCALE == 2.5


def test_parsing_and_clamp(reload_config):
    cfg = reload_config(
        HPPO_RUNS_DIR="  ",
        HPPO_FULL_SEEDS="0",
        HPPO_DESK_SEEDS="bad",
        HPPO_SMOOTHING_WINDOW="-5",
        HPPO_CHECK_FACTS="yes",
        HPPO_LAYOUT_RETRIES="abc",
        HPPO_VERBOSE="off",
        HPPO_SCHEDULE_TIME_SCALE="-1",
    )
    assert cfg.RUNS_DIR == "runs"
    assert cfg.FULL_SEEDS == 1
    assert cfg.DESK_SEEDS == 3
    assert cfg.SMOOTHING_WINDOW == 1
    assert cfg.CHECK_FACTS is True
    assert cfg.LAYOUT_RETRIES == 100
    assert cfg.VERBOSE is False
    assert cfg.SCHEDULE_TIME_SCALE == 0.0


def test_seed_counts_feed_presets(reload_config):
    reload_config(HPPO_FULL_SEEDS="2", HPPO_DESK_SEEDS="1")
    from app.harness.experiment import default_dict
    assert default_dict("waterworld-rg")["seeds"] == [0, 1]
    assert default_dict("waterworld-rg", "desk")["seeds"] == [0]
