# -*- coding: utf-8 -*-
"""
神经符号 PPO: 用 Horn 规则写成的符号策略引导 PPO 训练

子包:
- app.nn: 自动微分与 actor-critic 网络
- app.envs: DoorKey / OfficeWorld / WaterWorld
- app.logic: 规则解析、蕴含、指示掩码、奖励机
- app.ppo: rollout、GAE、裁剪损失、训练循环
- app.guidance: 乘积重加权、符号损失、奖励机塑形
- app.harness: 实验配置、运行、学习曲线
"""

__version__ = "0.1.0"
