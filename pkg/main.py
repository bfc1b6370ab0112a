# -*- coding: utf-8 -*-
"""
命令行入口

    python main.py train --task officeworld-delivercoffee --method all --preset desk
    python main.py train --config configs/doorkey-8x8-1key.json --seed 3 --guidance product
    python main.py aggregate --runs runs/officeworld-delivercoffee --out curves/delivercoffee.csv
    python main.py plot --curves curves/delivercoffee.csv --out figures
    python main.py ablate --task waterworld-rg --param theta --preset desk

退出码: 0 成功，2 配置 / 规则错误，3 数值异常。
"""
import argparse
import os
import sys
from typing import List, Optional

from app import config
from app.errors import ConfigError, NumericError, RuleSyntaxError, UnboundVariableError, UnknownPredicateError
from app.harness.experiment import (
    METHODS, apply_overrides, apply_preset, bundled_config_path, config_from_dict, read_config_dict,
)

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

CONFIG_ERRORS = (ConfigError, RuleSyntaxError, UnknownPredicateError, UnboundVariableError)


def _add_config_args(parser: argparse.ArgumentParser):
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="实验配置 JSON 文件")
    source.add_argument("--task", help=f"使用 {config.CONFIG_DIR} 下的内置任务配置")
    parser.add_argument("--preset", choices=("full", "desk"), help="规模预设 (desk: 缩减步数 + 3 个种子)")
    parser.add_argument("--seed", type=int, help="只跑这一个种子")
    parser.add_argument("--total-timesteps", type=int, dest="total_timesteps", help="覆盖 total_timesteps")
    parser.add_argument("--out", help="输出根目录 (默认 HPPO_RUNS_DIR)")
    parser.add_argument("--set", action="append", default=[], dest="overrides", metavar="KEY.PATH=VALUE",
                        help="覆盖任意配置键，可重复")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hppo", description="神经符号 PPO 实验工具")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="训练 (每个种子一个运行目录)")
    _add_config_args(train)
    train.add_argument("--guidance", "--method", dest="guidance",
                       help=f"引导方式: {' | '.join(METHODS)} | none | all")

    aggregate = sub.add_parser("aggregate", help="多种子聚合为学习曲线 CSV")
    aggregate.add_argument("--runs", nargs="+", required=True, help="运行目录或其上层目录")
    aggregate.add_argument("--out", required=True, help="输出 CSV 路径")
    aggregate.add_argument("--window", type=int, default=None,
                           help=f"滑动平均窗口 (默认 {config.SMOOTHING_WINDOW})")
    aggregate.add_argument("--no-smooth", dest="smooth", action="store_false", help="不做滑动平均，输出原始回报")

    plot = sub.add_parser("plot", help="由曲线 CSV 画图")
    plot.add_argument("--curves", required=True, help="aggregate 输出的 CSV")
    plot.add_argument("--out", required=True, help="图片输出目录")
    plot.add_argument("--title", default=None, help="图标题 (默认取 CSV 文件名)")

    ablate = sub.add_parser("ablate", help="Θ / ε_f 消融")
    _add_config_args(ablate)
    ablate.add_argument("--param", required=True, help="theta | epsilon_f")
    return parser


def load_experiment(args: argparse.Namespace, guidance: Optional[str] = None):
    path = args.config or bundled_config_path(args.task)
    data = read_config_dict(path)
    if args.preset:
        data = apply_preset(data, args.preset)
        print(f"🔧 预设: {args.preset}")
    if args.overrides:
        data = apply_overrides(data, args.overrides)
        print(f"🔧 覆盖: {', '.join(args.overrides)}")
    if args.seed is not None:
        data["seeds"] = [args.seed]
    if args.total_timesteps is not None:
        data.setdefault("hyperparams", {})["total_timesteps"] = args.total_timesteps
    if args.out:
        data["out_dir"] = args.out
    if guidance:
        data.setdefault("guidance", {})["mode"] = guidance
    return config_from_dict(data)


def cmd_train(args: argparse.Namespace) -> int:
    from app.harness.runner import run

    modes = list(METHODS) if args.guidance == "all" else [args.guidance]
    run_dirs = []
    for mode in modes:
        experiment = load_experiment(args, mode)
        run_dirs.extend(run(experiment))
    print(f"✅ 训练完成，共 {len(run_dirs)} 个运行目录")
    return 0


def cmd_aggregate(args: argparse.Namespace) -> int:
    from app.harness.curves import aggregate, emit

    curves = aggregate(args.runs, args.window, args.smooth)
    emit(curves, args.out, "csv")
    print(f"✅ 曲线已写入: {args.out} ({curves['method'].nunique()} 个方法)")
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    from app.harness.curves import emit, load_curves

    curves = load_curves(args.curves)
    stem = os.path.splitext(os.path.basename(args.curves))[0]
    out_path = os.path.join(args.out, f"{stem}.png")
    emit(curves, out_path, "image", title=args.title or stem)
    print(f"✅ 图片已写入: {out_path}")
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    from app.harness.runner import ablation_grid

    experiment = load_experiment(args)
    run_dirs = ablation_grid(experiment, args.param)
    print(f"✅ 消融完成，共 {len(run_dirs)} 个运行目录")
    return 0


COMMANDS = {
    "train": cmd_train,
    "aggregate": cmd_aggregate,
    "plot": cmd_plot,
    "ablate": cmd_ablate,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CONFIG_ERRORS as e:
        print(f"❌ 配置错误: {e}")
        return EXIT_CONFIG
    except NumericError as e:
        print(f"❌ 数值异常: {e}")
        return EXIT_NUMERIC
    except ValueError as e:
        if args.command in ("aggregate", "plot"):
            print(f"❌ {e}")
            return EXIT_CONFIG
        raise


if __name__ == "__main__":
    sys.exit(main())
