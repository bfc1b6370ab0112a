# -*- coding: utf-8 -*-
"""pytest 全局配置"""
import os

import pytest

# 在导入 app 模块前设置测试用环境变量
os.environ.setdefault("HPPO_CHECK_FACTS", "1")
os.environ.setdefault("HPPO_VERBOSE", "0")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 桌面规模的学习测试，需要 HPPO_RUN_SLOW=1")


def pytest_collection_modifyitems(config, items):
    """跳过 .venv 目录下的测试；未开启 HPPO_RUN_SLOW 时跳过 slow 测试"""
    skip_venv = []
    for item in items:
        if ".venv" in str(item.fspath):
            skip_venv.append(item)
    for item in skip_venv:
        items.remove(item)

    if os.getenv("HPPO_RUN_SLOW", "").lower() in ("1", "true", "yes", "on"):
        return
    skip_slow = pytest.mark.skip(reason="设置 HPPO_RUN_SLOW=1 才运行")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
