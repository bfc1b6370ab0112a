# -*- coding: utf-8 -*-
"""
指示掩码: mask[a] = 1 当且仅当动作 a 的接地原子被符号策略蕴含，
或 a 属于某个被蕴含的导航指令解析出的动作集合
"""
import numpy as np

from app.logic.engine import entailed_heads
from app.logic.navigation import NAVIGATION_PREDICATES, resolve_goto
from app.logic.parser import SymbolicPolicy
from app.logic.terms import FactBase


def indicator_mask(policy: SymbolicPolicy, facts: FactBase, env) -> np.ndarray:
    heads = entailed_heads(policy, facts)
    mask = np.zeros(env.n_actions, dtype=bool)
    for head in heads:
        if head.predicate in NAVIGATION_PREDICATES and len(head.args) == 1:
            for action in resolve_goto(env, head.args[0]):
                mask[action] = True
    for action in range(env.n_actions):
        if mask[action]:
            continue
        atom = env.action_atom(action)
        if atom is not None and atom in heads:
            mask[action] = True
    return mask
