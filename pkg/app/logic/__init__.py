# -*- coding: utf-8 -*-
"""
符号层: 规则解析、蕴含、导航指令、指示掩码、奖励机
"""

from .terms import Atom, FactBase
from .parser import HornRule, SymbolicPolicy, Vocabulary, parse_rules, load_rules, format_rules
from .engine import entailed_heads
from .navigation import resolve_goto
from .indicator import indicator_mask
from .reward_machine import RewardMachine, build_reward_machine, rm_transition

__all__ = [
    'Atom', 'FactBase', 'HornRule', 'SymbolicPolicy', 'Vocabulary',
    'parse_rules', 'load_rules', 'format_rules', 'entailed_heads',
    'resolve_goto', 'indicator_mask',
    'RewardMachine', 'build_reward_machine', 'rm_transition',
]
