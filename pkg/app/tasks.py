# -*- coding: utf-8 -*-
"""
任务定义

每个任务是一个纯函数式的进度机: initial → advance(progress, events) → ...，
环境用它判断成功，奖励机 (reward machine) 用它枚举状态。
"""
from dataclasses import dataclass, field
from typing import Callable, FrozenSet, Tuple

from app.errors import ConfigError

Progress = Tuple

DOORKEY_EVENTS = ("got_key", "got_wrong_key", "door_unlocked", "at_goal")
OFFICE_EVENTS = (
    "got_coffee", "got_mail", "at_office",
    "visited_a", "visited_b", "visited_c", "visited_d",
    "hit_plant",
)
WATER_COLORS = ("red", "green", "blue", "cyan", "magenta", "yellow")
WATER_EVENTS = tuple(f"touched_{color}" for color in WATER_COLORS)


@dataclass(frozen=True)
class TaskSpec:
    """任务进度机"""
    name: str
    domain: str
    alphabet: Tuple[str, ...]
    initial: Progress
    advance: Callable[[Progress, FrozenSet[str]], Progress]
    level: Callable[[Progress], int]
    complete: Callable[[Progress], bool]
    failure_events: FrozenSet[str] = field(default_factory=frozenset)


# ─── DoorKey ───


def _doorkey_advance(progress: Progress, events: FrozenSet[str]) -> Progress:
    stage = progress[0]
    chain = ("got_key", "door_unlocked", "at_goal")
    while stage < len(chain) and chain[stage] in events:
        stage += 1
    return (stage,)


# ─── OfficeWorld ───


def _make_delivery(needs_mail: bool):
    def advance(progress: Progress, events: FrozenSet[str]) -> Progress:
        coffee, mail, done = progress
        if done:
            return progress
        coffee = coffee or "got_coffee" in events
        mail = mail or (needs_mail and "got_mail" in events)
        done = coffee and (mail or not needs_mail) and "at_office" in events
        return (coffee, mail, done)

    def level(progress: Progress) -> int:
        return sum(int(flag) for flag in progress)

    def complete(progress: Progress) -> bool:
        return bool(progress[2])

    return advance, level, complete


def patrol_advance(count: int, rooms: Tuple[str, ...], events: FrozenSet[str]) -> int:
    """按顺序推进已巡逻的房间数"""
    while count < len(rooms) and f"visited_{rooms[count]}" in events:
        count += 1
    return count


def _make_patrol(rooms: Tuple[str, ...]):
    def advance(progress: Progress, events: FrozenSet[str]) -> Progress:
        return (patrol_advance(progress[0], rooms, events),)

    return advance, (lambda progress: progress[0]), (lambda progress: progress[0] == len(rooms))


# ─── WaterWorld ───


def water_sequence_advance(
    stage: int,
    sequence: Tuple[str, str],
    events: FrozenSet[str],
    distractors: FrozenSet[str],
    reset_on_wrong_touch: bool = True,
) -> int:
    """单个颜色序列的进度: 0 → 1 (first) → 2 (second)；阶段 1 碰到干扰色时回到 0"""
    first, second = sequence
    if stage == 0:
        return 1 if f"touched_{first}" in events else 0
    if stage == 1:
        if f"touched_{second}" in events:
            return 2
        if reset_on_wrong_touch and any(f"touched_{color}" in events for color in distractors):
            return 0
        return 1
    return stage


def _make_water(sequences: Tuple[Tuple[str, str], ...], reset_on_wrong_touch: bool):
    used = {color for sequence in sequences for color in sequence}
    distractors = frozenset(color for color in WATER_COLORS if color not in used)

    def advance(progress: Progress, events: FrozenSet[str]) -> Progress:
        return tuple(
            water_sequence_advance(stage, sequence, events, distractors, reset_on_wrong_touch)
            for stage, sequence in zip(progress, sequences)
        )

    return advance, (lambda progress: sum(progress)), (lambda progress: all(s == 2 for s in progress))


WATER_SEQUENCES = {
    "rg": (("red", "green"),),
    "rg-bc": (("red", "green"), ("blue", "cyan")),
    "rg-bc-my": (("red", "green"), ("blue", "cyan"), ("magenta", "yellow")),
}

OFFICE_VARIANTS = ("delivercoffee", "delivercoffeeandmail", "patrolab", "patrolabc")


def normalize_variant(task: str) -> str:
    """把完整任务 id (如 officeworld-delivercoffee、doorkey-8x8-2keys) 归一为变体名"""
    name = task.strip().lower()
    if name.startswith("doorkey"):
        return "doorkey"
    for prefix in ("officeworld-", "waterworld-"):
        if name.startswith(prefix):
            return name[len(prefix):]
    return name


def get_task(task: str, reset_on_wrong_touch: bool = True) -> TaskSpec:
    """
    根据任务名获取进度机

    Raises:
        ConfigError: 未知任务
    """
    variant = normalize_variant(task)
    if variant == "doorkey":
        return TaskSpec(
            name=variant, domain="doorkey", alphabet=DOORKEY_EVENTS, initial=(0,),
            advance=_doorkey_advance, level=lambda p: p[0], complete=lambda p: p[0] == 3,
        )
    if variant in ("delivercoffee", "delivercoffeeandmail"):
        advance, level, complete = _make_delivery(needs_mail=variant == "delivercoffeeandmail")
        return TaskSpec(
            name=variant, domain="officeworld", alphabet=OFFICE_EVENTS, initial=(False, False, False),
            advance=advance, level=level, complete=complete, failure_events=frozenset({"hit_plant"}),
        )
    if variant in ("patrolab", "patrolabc"):
        rooms = ("a", "b") if variant == "patrolab" else ("a", "b", "c")
        advance, level, complete = _make_patrol(rooms)
        return TaskSpec(
            name=variant, domain="officeworld", alphabet=OFFICE_EVENTS, initial=(0,),
            advance=advance, level=level, complete=complete, failure_events=frozenset({"hit_plant"}),
        )
    if variant in WATER_SEQUENCES:
        sequences = WATER_SEQUENCES[variant]
        advance, level, complete = _make_water(sequences, reset_on_wrong_touch)
        return TaskSpec(
            name=variant, domain="waterworld", alphabet=WATER_EVENTS, initial=(0,) * len(sequences),
            advance=advance, level=level, complete=complete,
        )
    raise ConfigError(f"未知任务: {task}")
