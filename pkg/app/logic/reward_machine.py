# -*- coding: utf-8 -*-
"""
奖励机 (reward machine)

由任务进度机枚举得到: 从初始进度出发，对字母表的每个事件子集求后继，
按广度优先发现顺序命名为 u0, u1, ...。转移表对每个 (状态, 事件子集) 恰有一个后继，
delta 为进度层级变化的符号。
"""
from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from app.tasks import get_task

SINK = "u_sink"


@dataclass(frozen=True)
class RewardMachine:
    task: str
    states: Tuple[str, ...]
    initial: str
    accepting: FrozenSet[str]
    alphabet: Tuple[str, ...]
    levels: Dict[str, int]
    transitions: Dict[Tuple[str, FrozenSet[str]], Tuple[str, int]]
    sink: Optional[str] = None

    def is_accepting(self, state: str) -> bool:
        return state in self.accepting


def event_subsets(alphabet: Iterable[str]) -> List[FrozenSet[str]]:
    """字母表的所有子集，按大小再按字母表顺序"""
    alphabet = tuple(alphabet)
    subsets = []
    for size in range(len(alphabet) + 1):
        subsets.extend(frozenset(combo) for combo in combinations(alphabet, size))
    return subsets


def _sign(value: int) -> int:
    return (value > 0) - (value < 0)


def build_reward_machine(task: str, with_sink: bool = False, reset_on_wrong_touch: bool = True) -> RewardMachine:
    """
    构建任务的奖励机

    Args:
        task: 任务变体或完整任务 id
        with_sink: 是否加入失败吸收态 (踩到盆栽时进入，delta = -1)

    Raises:
        ConfigError: 未知任务
    """
    spec = get_task(task, reset_on_wrong_touch)
    subsets = event_subsets(spec.alphabet)
    sink = SINK if with_sink and spec.failure_events else None

    names = {spec.initial: "u0"}
    levels = {"u0": spec.level(spec.initial)}
    order = [spec.initial]
    queue = deque([spec.initial])
    transitions: Dict[Tuple[str, FrozenSet[str]], Tuple[str, int]] = {}

    while queue:
        progress = queue.popleft()
        state = names[progress]
        for events in subsets:
            if spec.complete(progress):
                transitions[(state, events)] = (state, 0)
                continue
            if sink is not None and events & spec.failure_events:
                transitions[(state, events)] = (sink, -1)
                continue
            successor = spec.advance(progress, events)
            if successor not in names:
                names[successor] = f"u{len(names)}"
                levels[names[successor]] = spec.level(successor)
                order.append(successor)
                queue.append(successor)
            delta = _sign(spec.level(successor) - spec.level(progress))
            transitions[(state, events)] = (names[successor], delta)

    states = [names[progress] for progress in order]
    if sink is not None:
        states.append(sink)
        levels[sink] = -1
        for events in subsets:
            transitions[(sink, events)] = (sink, 0)

    accepting = frozenset(names[progress] for progress in order if spec.complete(progress))
    return RewardMachine(
        task=spec.name,
        states=tuple(states),
        initial="u0",
        accepting=accepting,
        alphabet=spec.alphabet,
        levels=levels,
        transitions=transitions,
        sink=sink,
    )


def rm_transition(rm: RewardMachine, state: str, events: Iterable[str]) -> Tuple[str, int]:
    """返回 (后继状态, delta ∈ {-1, 0, +1})；字母表外的事件被忽略"""
    key = frozenset(events) & frozenset(rm.alphabet)
    return rm.transitions[(state, key)]
