# -*- coding: utf-8 -*-
"""
实验配置单元测试

测试目标:
1. 13 个任务的默认超参数
2. 内置 configs/*.json 与默认值一致
3. 预设、命令行覆盖、未知键
4. 消融配置
"""
import json

import pytest

# (总步数, 环境数, batch, minibatch)
GOLDEN = {
    "doorkey-8x8-1key": (5_000_000, 4, 512, 128),
    "doorkey-8x8-2keys": (25_000_000, 8, 1024, 256),
    "doorkey-8x8-4keys": (50_000_000, 16, 2048, 512),
    "doorkey-16x16-1key": (5_000_000, 16, 2048, 512),
    "doorkey-16x16-2keys": (25_000_000, 32, 4096, 1024),
    "doorkey-16x16-4keys": (100_000_000, 64, 8192, 2048),
    "officeworld-delivercoffee": (1_000_000, 8, 1024, 256),
    "officeworld-delivercoffeeandmail": (25_000_000, 32, 4096, 1024),
    "officeworld-patrolab": (5_000_000, 8, 1024, 256),
    "officeworld-patrolabc": (10_000_000, 8, 1024, 256),
    "waterworld-rg": (5_000_000, 8, 1024, 256),
    "waterworld-rg-bc": (10_000_000, 16, 2048, 512),
    "waterworld-rg-bc-my": (20_000_000, 32, 4096, 1024),
}

SCALED_KEYS = ("total_timesteps", "num_envs", "batch_size", "minibatch_size")


# ─── 默认值 ────────────────────────────────────────────────────────


class TestDefaults:
    """任务默认配置"""

    def test_catalogue_complete(self):
        from app.harness.experiment import TASK_CATALOGUE
        assert set(TASK_CATALOGUE) == set(GOLDEN)

    @pytest.mark.parametrize("task", sorted(GOLDEN))
    def test_golden_values(self, task):
        """总步数、环境数、batch、minibatch"""
        from app.harness.experiment import default_config
        experiment = default_config(task)
        hp = experiment.hyperparams
        total, num_envs, batch, minibatch = GOLDEN[task]
        assert hp.total_timesteps == total
        assert hp.num_envs == num_envs
        assert hp.batch_size == batch
        assert hp.minibatch_size == minibatch
        assert hp.num_steps == 128
        assert hp.update_epochs == 4

    def test_shared_hyperparams(self):
        """任务之间只有规模相关的四个键不同"""
        from app.harness.experiment import TASK_CATALOGUE, default_config
        shared = []
        for task in TASK_CATALOGUE:
            data = default_config(task).to_dict()["hyperparams"]
            shared.append({key: value for key, value in data.items() if key not in SCALED_KEYS})
        assert all(item == shared[0] for item in shared)
        assert shared[0]["learning_rate"] == pytest.approx(3e-4)
        assert shared[0]["gamma"] == pytest.approx(0.99)
        assert shared[0]["clip_coef"] == pytest.approx(0.2)

    @pytest.mark.parametrize("task", sorted(GOLDEN))
    def test_bundled_config_matches(self, task):
        """configs/<task>.json 与默认配置一致且能校验"""
        from app.harness.experiment import bundled_config_path, default_config, load_config
        loaded = load_config(bundled_config_path(task))
        assert loaded.to_dict() == default_config(task).to_dict()

    def test_guidance_defaults(self):
        """λ = 1, η = 0.9, 塑形 0.01 / 0.1"""
        from app.harness.experiment import default_config
        guidance = default_config("waterworld-rg").guidance
        assert guidance.mode == "none"
        assert guidance.product.lam == 1.0
        assert guidance.symloss.eta == pytest.approx(0.9)
        assert guidance.rm.action_bonus == pytest.approx(0.01)
        assert guidance.rm.progress_bonus == pytest.approx(0.1)

    def test_unknown_task(self):
        from app.errors import ConfigError
        from app.harness.experiment import default_config
        with pytest.raises(ConfigError):
            default_config("minigrid-empty")


class TestPreset:
    """预设"""

    def test_desk_totals(self):
        """桌面预设: 三个有单独步数的任务 + 其余按比例缩减，3 个种子"""
        from app.harness.experiment import default_config
        assert default_config("doorkey-8x8-1key", "desk").hyperparams.total_timesteps == 500_000
        assert default_config("officeworld-delivercoffee", "desk").hyperparams.total_timesteps == 300_000
        assert default_config("waterworld-rg", "desk").hyperparams.total_timesteps == 500_000
        assert default_config("officeworld-patrolabc", "desk").hyperparams.total_timesteps == 500_000
        assert default_config("waterworld-rg", "desk").seeds == [0, 1, 2]
        assert default_config("waterworld-rg").seeds == [0, 1, 2, 3, 4]

    def test_apply_preset_keeps_other_keys(self):
        """apply_preset 只换总步数和种子"""
        from app.harness.experiment import apply_preset, config_from_dict, default_dict
        data = default_dict("waterworld-rg")
        data["hyperparams"]["ent_coef"] = 0.05
        experiment = config_from_dict(apply_preset(data, "desk"))
        assert experiment.preset == "desk"
        assert experiment.hyperparams.ent_coef == pytest.approx(0.05)
        assert experiment.hyperparams.total_timesteps == 500_000

    def test_unknown_preset(self):
        from app.errors import ConfigError
        from app.harness.experiment import apply_preset, default_dict
        with pytest.raises(ConfigError):
            apply_preset(default_dict("waterworld-rg"), "huge")


# ─── 解析与覆盖 ────────────────────────────────────────────────────


class TestConfigFromDict:
    """字典 → ExperimentConfig"""

    def test_minimal(self):
        """只给 task 时全部取默认"""
        from app.harness.experiment import config_from_dict
        experiment = config_from_dict({"task": "officeworld-patrolab"})
        assert experiment.env.domain == "officeworld"
        assert experiment.rules == "officeworld_patrol_ab.rules"
        assert experiment.method == "ppo"

    def test_method_alias(self):
        """guidance.mode 接受方法名 ppo"""
        from app.harness.experiment import config_from_dict
        experiment = config_from_dict({"task": "waterworld-rg", "guidance": {"mode": "ppo"}})
        assert experiment.guidance.mode == "none"
        assert experiment.with_guidance("product").method == "product"

    @pytest.mark.parametrize("data", [
        {"task": "waterworld-rg", "learning_rate": 0.1},
        {"task": "waterworld-rg", "hyperparams": {"lr": 0.1}},
        {"task": "waterworld-rg", "guidance": {"product": {"lambda": 1.0}}},
        {"task": "waterworld-rg", "env": {"colour": "red"}},
    ])
    def test_unknown_keys(self, data):
        from app.errors import ConfigError
        from app.harness.experiment import config_from_dict
        with pytest.raises(ConfigError):
            config_from_dict(data)

    @pytest.mark.parametrize("data", [
        {"task": "waterworld-rg", "seeds": []},
        {"task": "waterworld-rg", "seeds": [1, 1]},
        {"task": "waterworld-rg", "seeds": [-1]},
        {"task": "waterworld-rg", "seeds": 3},
        {"task": "waterworld-rg", "eval_interval": 0},
        {"task": "waterworld-rg", "rules": "missing.rules"},
        {"task": "waterworld-rg", "guidance": {"mode": "shield"}},
        {"task": "waterworld-rg", "guidance": {"symloss": {"eta": 1.0}}},
        {"task": "waterworld-rg", "hyperparams": {"batch_size": 999}},
        {"task": "waterworld-rg", "hyperparams": {"minibatch_size": 300}},
        {"seeds": [0]},
    ])
    def test_invalid(self, data):
        from app.errors import ConfigError
        from app.harness.experiment import config_from_dict
        with pytest.raises(ConfigError):
            config_from_dict(data)

    def test_minibatch_size_sets_count(self):
        """minibatch_size 决定 num_minibatches"""
        from app.harness.experiment import config_from_dict
        experiment = config_from_dict({"task": "waterworld-rg", "hyperparams": {"minibatch_size": 128}})
        assert experiment.hyperparams.num_minibatches == 8

    def test_to_json_round_trip(self, tmp_path):
        """to_json 写出的文件可以重新加载"""
        from app.harness.experiment import default_config, load_config
        experiment = default_config("doorkey-8x8-2keys").with_guidance("symloss")
        path = tmp_path / "experiment.json"
        path.write_text(experiment.to_json(), encoding="utf-8")
        assert load_config(str(path)) == experiment

    def test_read_invalid_json(self, tmp_path):
        from app.errors import ConfigError
        from app.harness.experiment import load_config
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(str(path))
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / "missing.json"))


class TestOverrides:
    """key.path=value 覆盖"""

    def test_nested_values(self):
        """值按 JSON 解析，解析失败时当字符串"""
        from app.harness.experiment import apply_overrides
        data = apply_overrides({"task": "waterworld-rg"}, [
            "hyperparams.total_timesteps=20000",
            "guidance.symloss.theta=0.5",
            "guidance.mode=symloss",
            "hyperparams.anneal_lr=false",
        ])
        assert data["hyperparams"] == {"total_timesteps": 20000, "anneal_lr": False}
        assert data["guidance"] == {"symloss": {"theta": 0.5}, "mode": "symloss"}

    def test_does_not_mutate_input(self):
        from app.harness.experiment import apply_overrides
        original = {"task": "waterworld-rg", "hyperparams": {"num_steps": 128}}
        apply_overrides(original, ["hyperparams.num_steps=64"])
        assert original["hyperparams"]["num_steps"] == 128

    @pytest.mark.parametrize("assignment", ["no_equals", "=3", "task.name=1"])
    def test_bad_assignment(self, assignment):
        from app.errors import ConfigError
        from app.harness.experiment import apply_overrides
        with pytest.raises(ConfigError):
            apply_overrides({"task": "waterworld-rg"}, [assignment])


# ─── 消融 ──────────────────────────────────────────────────────────


class TestAblation:
    """消融配置"""

    def test_theta_grid(self):
        """Θ: 四个常数 + 一个衰减，都是 symloss"""
        from app.harness.experiment import default_config
        from app.harness.runner import ablation_configs, run_label
        configs = ablation_configs(default_config("waterworld-rg", "desk"), "theta")
        assert len(configs) == 5
        assert all(experiment.guidance.mode == "symloss" for experiment in configs)
        assert [experiment.guidance.symloss.theta for experiment in configs] == [0.25, 0.5, 0.75, 1.0, None]
        labels = [run_label(experiment) for experiment in configs]
        assert len(set(labels)) == 5
        assert labels[0] == "symloss-theta-0.25"

    def test_epsilon_grid(self):
        """ε_f: 0 / 0.2 / 0.4，都是 product"""
        from app.harness.experiment import default_config
        from app.harness.runner import ablation_configs
        configs = ablation_configs(default_config("officeworld-delivercoffee", "desk"), "epsilon_f")
        assert len(configs) == 3
        assert all(experiment.guidance.mode == "product" for experiment in configs)
        assert [experiment.guidance.product.eps_final for experiment in configs] == [0.0, 0.2, 0.4]
        assert all(experiment.guidance.product.eps_initial == 1.0 for experiment in configs)

    def test_unknown_param(self):
        from app.errors import ConfigError
        from app.harness.experiment import default_config
        from app.harness.runner import ablation_configs
        with pytest.raises(ConfigError):
            ablation_configs(default_config("waterworld-rg"), "gamma")

    def test_bundled_json_is_plain_json(self):
        """内置配置不含 out_dir，输出目录由环境变量决定"""
        from app.harness.experiment import bundled_config_path
        with open(bundled_config_path("waterworld-rg"), encoding="utf-8") as f:
            data = json.load(f)
        assert "out_dir" not in data
        assert data["seeds"] == [0, 1, 2, 3, 4]
