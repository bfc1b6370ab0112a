# -*- coding: utf-8 -*-
"""
OfficeWorld 环境

12×9 固定地图，3×3 的房间由薄墙隔开 (墙存为禁止的转移)，墙上开门。
标注格: 房间 a-d、邮件、咖啡、办公室、盆栽 (踩到即失败结束)。
"""
from collections import deque
from typing import Dict, FrozenSet, Optional, Set, Tuple

import numpy as np

from app.envs.base import BaseEnv
from app.logic.terms import Atom, FactBase

UP, DOWN, LEFT, RIGHT = range(4)
ACTION_NAMES = ("up", "down", "left", "right")
# up 为 y + 1
MOVES = {UP: (0, 1), DOWN: (0, -1), LEFT: (-1, 0), RIGHT: (1, 0)}

WIDTH, HEIGHT = 12, 9
START = (2, 1)

ROOMS = {"a": (1, 1), "b": (10, 1), "c": (10, 7), "d": (1, 7)}
MAIL = {"m1": (7, 4)}
COFFEE = {"c1": (8, 2), "c2": (3, 6)}
OFFICE = {"o1": (4, 4)}
PLANTS = frozenset({(4, 1), (7, 1), (4, 7), (7, 7), (1, 4), (10, 4)})

PATROL_ROOMS = ("a", "b", "c")


def _build_forbidden() -> FrozenSet[Tuple[int, int, int]]:
    forbidden: Set[Tuple[int, int, int]] = set()
    for x in range(WIDTH):
        for y in (0, 3, 6):
            forbidden.add((x, y, DOWN))
            forbidden.add((x, y + 2, UP))
    for y in range(HEIGHT):
        for x in (0, 3, 6, 9):
            forbidden.add((x, y, LEFT))
            forbidden.add((x + 2, y, RIGHT))
    # 门
    for y in (1, 7):
        for x in (2, 5, 8):
            forbidden.discard((x, y, RIGHT))
            forbidden.discard((x + 1, y, LEFT))
    for x in (1, 4, 7, 10):
        forbidden.discard((x, 5, UP))
        forbidden.discard((x, 6, DOWN))
    for x in (1, 10):
        forbidden.discard((x, 2, UP))
        forbidden.discard((x, 3, DOWN))
    return frozenset(forbidden)


FORBIDDEN = _build_forbidden()


def cell_events(pos: Tuple[int, int]) -> Set[str]:
    """进入某格时产生的标签"""
    events = set()
    if pos in COFFEE.values():
        events.add("got_coffee")
    if pos in MAIL.values():
        events.add("got_mail")
    if pos in OFFICE.values():
        events.add("at_office")
    for room, room_pos in ROOMS.items():
        if pos == room_pos:
            events.add(f"visited_{room}")
    if pos in PLANTS:
        events.add("hit_plant")
    return events


def next_position(pos: Tuple[int, int], action: int) -> Tuple[int, int]:
    """确定性转移；撞墙时原地不动"""
    if (pos[0], pos[1], action) in FORBIDDEN:
        return pos
    dx, dy = MOVES[action]
    return pos[0] + dx, pos[1] + dy


class OfficeWorldEnv(BaseEnv):
    """OfficeWorld"""

    domain = "officeworld"
    n_actions = 4
    action_names = ACTION_NAMES
    fact_vocabulary = {
        "coffee": 1, "mail": 1, "office": 1,
        "room_a": 1, "room_b": 1, "room_c": 1, "room_d": 1,
        "HasCoffee": 0, "HasMail": 0,
        "visited_a": 0, "visited_b": 0, "visited_c": 0,
        "notHittingPlants": 0,
    }
    action_vocabulary = {"goto": 1}

    def __init__(self, env_config):
        super().__init__(env_config)
        self.width, self.height = env_config.resolved_shape()
        self.agent_pos = START
        self.has_coffee = False
        self.has_mail = False
        # 按 a → b → c 顺序已巡逻的房间数
        self.patrol_count = 0
        self._distance_cache: Dict[Tuple[int, int], Dict[Tuple[int, int], int]] = {}

    @property
    def obs_dim(self) -> int:
        return 7

    @property
    def visited(self) -> Dict[str, bool]:
        return {room: self.patrol_count > index for index, room in enumerate(PATROL_ROOMS)}

    def _layout(self, rng: np.random.Generator):
        # 地图固定，rng 不参与
        self.agent_pos = START
        self.has_coffee = False
        self.has_mail = False
        self.patrol_count = 0

    def _apply(self, action: int) -> Tuple[FrozenSet[str], bool]:
        new_pos = next_position(self.agent_pos, action)
        if new_pos == self.agent_pos:
            return frozenset(), False
        self.agent_pos = new_pos
        events = cell_events(new_pos)
        if "got_coffee" in events:
            self.has_coffee = True
        if "got_mail" in events:
            self.has_mail = True
        while self.patrol_count < len(PATROL_ROOMS) and f"visited_{PATROL_ROOMS[self.patrol_count]}" in events:
            self.patrol_count += 1
        return frozenset(events), "hit_plant" in events

    def encode_observation(self) -> np.ndarray:
        visited = self.visited
        return np.array([
            self.agent_pos[0] / (self.width - 1),
            self.agent_pos[1] / (self.height - 1),
            float(self.has_coffee),
            float(self.has_mail),
            float(visited["a"]),
            float(visited["b"]),
            float(visited["c"]),
        ], dtype=np.float64)

    def ground_state(self) -> FactBase:
        facts = [Atom("coffee", (name,)) for name in COFFEE]
        facts += [Atom("mail", (name,)) for name in MAIL]
        facts += [Atom("office", (name,)) for name in OFFICE]
        facts += [Atom(f"room_{room}", (room,)) for room in ROOMS]
        if self.has_coffee:
            facts.append(Atom("HasCoffee"))
        if self.has_mail:
            facts.append(Atom("HasMail"))
        for room, flag in self.visited.items():
            if flag:
                facts.append(Atom(f"visited_{room}"))
        if self.agent_pos not in PLANTS:
            facts.append(Atom("notHittingPlants"))
        return FactBase(facts)

    def action_atom(self, action: int) -> Optional[Atom]:
        return Atom("goto_candidate", (ACTION_NAMES[action],))

    # ─── 导航 ───

    def target_position(self, target: str) -> Tuple[int, int]:
        for table in (ROOMS, MAIL, COFFEE, OFFICE):
            if target in table:
                return table[target]
        raise LookupError(f"OfficeWorld 中没有目标常量 {target}")

    def distances_to(self, target_pos: Tuple[int, int]) -> Dict[Tuple[int, int], int]:
        """到目标格的 BFS 距离 (绕开盆栽，遵守墙)，按目标缓存"""
        cached = self._distance_cache.get(target_pos)
        if cached is not None:
            return cached
        dist = {target_pos: 0}
        queue = deque([target_pos])
        while queue:
            pos = queue.popleft()
            for action in MOVES:
                # 反向搜索: 找能一步走到 pos 的格子
                dx, dy = MOVES[action]
                prev = (pos[0] - dx, pos[1] - dy)
                if prev in dist or prev in PLANTS:
                    continue
                if not (0 <= prev[0] < self.width and 0 <= prev[1] < self.height):
                    continue
                if next_position(prev, action) != pos:
                    continue
                dist[prev] = dist[pos] + 1
                queue.append(prev)
        self._distance_cache[target_pos] = dist
        return dist

    def render_ascii(self) -> str:
        labels = {}
        for room, pos in ROOMS.items():
            labels[pos] = room.upper()
        for pos in MAIL.values():
            labels[pos] = "m"
        for pos in COFFEE.values():
            labels[pos] = "c"
        for pos in OFFICE.values():
            labels[pos] = "o"
        for pos in PLANTS:
            labels[pos] = "*"
        lines = []
        for y in reversed(range(self.height)):
            row = ""
            for x in range(self.width):
                row += "@" if (x, y) == self.agent_pos else labels.get((x, y), ".")
            lines.append(row)
        return "\n".join(lines)
