# -*- coding: utf-8 -*-
"""
DoorKey 环境

竖直隔墙把网格分成两半，墙上有一扇上锁的门；钥匙和智能体在左侧，目标在右下角。
观测是以智能体为中心的 7×7 视野 (类型/颜色/状态) 加朝向 one-hot。
"""
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Tuple

import numpy as np

from app import config
from app.envs.base import BaseEnv
from app.errors import GenerationError
from app.logic.terms import Atom, FactBase

# 动作
LEFT, RIGHT, FORWARD, PICKUP, TOGGLE = range(5)
ACTION_NAMES = ("left", "right", "forward", "pickup", "toggle")

# 朝向: 0 东 1 南 2 西 3 北 (y 向下)
DIR_VECTORS = ((1, 0), (0, 1), (-1, 0), (0, -1))

OBJECT_IDS = {"unseen": 0, "empty": 1, "wall": 2, "door": 4, "key": 5, "goal": 8}
COLORS = ("red", "green", "blue", "purple", "yellow", "grey")
COLOR_IDS = {name: index for index, name in enumerate(COLORS)}
DOOR_STATES = {"open": 0, "closed": 1, "locked": 2}

VIEW_SIZE = 7
# 视野中智能体所在格
VIEW_AGENT = (VIEW_SIZE // 2, VIEW_SIZE - 1)


@dataclass
class GridObject:
    kind: str
    color: str = "grey"
    name: str = ""
    state: str = "open"

    def encode(self) -> Tuple[int, int, int]:
        state = DOOR_STATES[self.state] if self.kind == "door" else 0
        return OBJECT_IDS[self.kind], COLOR_IDS[self.color], state


WALL = GridObject("wall", "grey")


class DoorKeyEnv(BaseEnv):
    """部分可观测的 DoorKey"""

    domain = "doorkey"
    n_actions = 5
    action_names = ACTION_NAMES
    fact_vocabulary = {
        "key": 1, "door": 1, "goal": 1, "sameColor": 2, "locked": 1,
        "unlocked": 0, "carryingKey": 1, "notCarrying": 0,
    }
    action_vocabulary = {"pickup": 1, "toggle": 1, "goto": 1}

    def __init__(self, env_config):
        super().__init__(env_config)
        self.size = env_config.resolved_size()
        self.num_keys = env_config.num_keys
        self.grid: List[List[Optional[GridObject]]] = []
        self.agent_pos = (1, 1)
        self.agent_dir = 0
        self.carrying: Optional[GridObject] = None
        self.door_pos = (0, 0)
        self.goal_pos = (0, 0)

    @property
    def obs_dim(self) -> int:
        return VIEW_SIZE * VIEW_SIZE * 3 + 4

    # ─── 布局 ───

    def _layout(self, rng: np.random.Generator):
        for _ in range(config.LAYOUT_RETRIES):
            if self._try_layout(rng):
                return
        raise GenerationError(
            f"DoorKey {self.size}x{self.size} ({self.num_keys} 把钥匙) 在 {config.LAYOUT_RETRIES} 次重试内无法生成可解布局"
        )

    def _try_layout(self, rng: np.random.Generator) -> bool:
        n = self.size
        self.grid = [[None] * n for _ in range(n)]
        for i in range(n):
            self.grid[0][i] = self.grid[n - 1][i] = WALL
            self.grid[i][0] = self.grid[i][n - 1] = WALL

        split = int(rng.integers(2, n - 2))
        for y in range(n):
            self.grid[y][split] = WALL
        door_y = int(rng.integers(1, n - 2))
        door_color = COLORS[int(rng.integers(len(COLORS)))]
        self.door_pos = (split, door_y)
        self._set(self.door_pos, GridObject("door", door_color, "d1", "locked"))

        self.goal_pos = (n - 2, n - 2)
        self._set(self.goal_pos, GridObject("goal", "green", "g1"))

        left_cells = [(x, y) for x in range(1, split) for y in range(1, n - 1)]
        if len(left_cells) < self.num_keys + 1:
            return False
        chosen = rng.choice(len(left_cells), size=self.num_keys + 1, replace=False)
        self.agent_pos = left_cells[int(chosen[0])]
        self.agent_dir = int(rng.integers(4))
        self.carrying = None

        key_colors = [door_color] + self._distractor_colors(door_color, rng)
        keys = []
        for index, (cell_index, color) in enumerate(zip(chosen[1:], key_colors)):
            key = GridObject("key", color, f"k{index + 1}")
            keys.append(left_cells[int(cell_index)])
            self._set(left_cells[int(cell_index)], key)

        # 钥匙都算障碍: 要能走到匹配钥匙旁，拿走它之后还能走到门前
        key_cells = set(keys)
        if not self._reachable_beside(keys[0], key_cells):
            return False
        return self._reachable_beside(self.door_pos, key_cells - {keys[0]})

    def _distractor_colors(self, door_color: str, rng: np.random.Generator) -> List[str]:
        count = self.num_keys - 1
        if count == 0:
            return []
        if self.config.allow_distractor_door_color:
            return [COLORS[int(rng.integers(len(COLORS)))] for _ in range(count)]
        others = [color for color in COLORS if color != door_color]
        picked = rng.choice(len(others), size=count, replace=False)
        return [others[int(i)] for i in picked]

    def _reachable_beside(self, target: Tuple[int, int], blocked: set) -> bool:
        seen = {self.agent_pos}
        queue = deque([self.agent_pos])
        while queue:
            x, y = queue.popleft()
            for dx, dy in DIR_VECTORS:
                nxt = (x + dx, y + dy)
                if nxt == target:
                    return True
                if nxt in seen or nxt in blocked:
                    continue
                cell = self._get(nxt)
                if cell is None or cell.kind == "goal":
                    seen.add(nxt)
                    queue.append(nxt)
        return False

    # ─── 网格工具 ───

    def _in_bounds(self, pos: Tuple[int, int]) -> bool:
        return 0 <= pos[0] < self.size and 0 <= pos[1] < self.size

    def _get(self, pos: Tuple[int, int]) -> Optional[GridObject]:
        if not self._in_bounds(pos):
            return WALL
        return self.grid[pos[1]][pos[0]]

    def _set(self, pos: Tuple[int, int], obj: Optional[GridObject]):
        self.grid[pos[1]][pos[0]] = obj

    @property
    def front_pos(self) -> Tuple[int, int]:
        dx, dy = DIR_VECTORS[self.agent_dir]
        return self.agent_pos[0] + dx, self.agent_pos[1] + dy

    @property
    def door(self) -> GridObject:
        return self._get(self.door_pos)

    def objects(self) -> Dict[str, Tuple[Tuple[int, int], GridObject]]:
        """网格上所有具名物体: 常量名 → (位置, 物体)"""
        found = {}
        for y, row in enumerate(self.grid):
            for x, obj in enumerate(row):
                if obj is not None and obj.name:
                    found[obj.name] = ((x, y), obj)
        return found

    def is_passable(self, pos: Tuple[int, int]) -> bool:
        obj = self._get(pos)
        return obj is None or obj.kind == "goal" or (obj.kind == "door" and obj.state == "open")

    # ─── 动作 ───

    def _apply(self, action: int) -> Tuple[FrozenSet[str], bool]:
        events = set()
        if action == LEFT:
            self.agent_dir = (self.agent_dir - 1) % 4
        elif action == RIGHT:
            self.agent_dir = (self.agent_dir + 1) % 4
        elif action == FORWARD:
            front = self.front_pos
            if self.is_passable(front):
                self.agent_pos = front
                if front == self.goal_pos:
                    events.add("at_goal")
        elif action == PICKUP:
            front_obj = self._get(self.front_pos)
            if front_obj is not None and front_obj.kind == "key" and self.carrying is None:
                self.carrying = front_obj
                self._set(self.front_pos, None)
                events.add("got_key" if front_obj.color == self.door.color else "got_wrong_key")
        elif action == TOGGLE:
            front_obj = self._get(self.front_pos)
            if front_obj is not None and front_obj.kind == "door":
                if front_obj.state == "locked":
                    if self.carrying is not None and self.carrying.color == front_obj.color:
                        front_obj.state = "open"
                        events.add("door_unlocked")
                elif front_obj.state == "open":
                    front_obj.state = "closed"
                else:
                    front_obj.state = "open"
        return frozenset(events), False

    # ─── 观测 ───

    def view_to_world(self, vx: int, vy: int) -> Tuple[int, int]:
        """视野坐标 → 世界坐标；智能体在视野 (3, 6)，面朝 vy 减小的方向"""
        fx, fy = DIR_VECTORS[self.agent_dir]
        rx, ry = DIR_VECTORS[(self.agent_dir + 1) % 4]
        ahead = VIEW_AGENT[1] - vy
        side = vx - VIEW_AGENT[0]
        return (
            self.agent_pos[0] + fx * ahead + rx * side,
            self.agent_pos[1] + fy * ahead + ry * side,
        )

    def visible_cells(self) -> Dict[Tuple[int, int], Tuple[int, int]]:
        """视野内的世界坐标 → 视野坐标 (不含越界格)"""
        cells = {}
        for vx in range(VIEW_SIZE):
            for vy in range(VIEW_SIZE):
                world = self.view_to_world(vx, vy)
                if self._in_bounds(world):
                    cells[world] = (vx, vy)
        return cells

    def encode_observation(self) -> np.ndarray:
        view = np.zeros((VIEW_SIZE, VIEW_SIZE, 3), dtype=np.float64)
        for vx in range(VIEW_SIZE):
            for vy in range(VIEW_SIZE):
                world = self.view_to_world(vx, vy)
                if (vx, vy) == VIEW_AGENT:
                    obj = self.carrying
                else:
                    obj = self._get(world)
                if obj is None:
                    view[vx, vy] = (OBJECT_IDS["empty"], 0, 0)
                else:
                    view[vx, vy] = obj.encode()
        view[..., 0] /= 10.0
        view[..., 1] /= 5.0
        view[..., 2] /= 2.0
        direction = np.zeros(4, dtype=np.float64)
        direction[self.agent_dir] = 1.0
        return np.concatenate([view.reshape(-1), direction])

    # ─── 接地 ───

    def ground_state(self) -> FactBase:
        visible = self.visible_cells()
        facts = []
        colored = []
        for name, (pos, obj) in self.objects().items():
            if pos not in visible:
                continue
            if obj.kind == "key":
                facts.append(Atom("key", (name,)))
                colored.append(obj)
            elif obj.kind == "door":
                facts.append(Atom("door", (name,)))
                if obj.state == "locked":
                    facts.append(Atom("locked", (name,)))
                colored.append(obj)
            elif obj.kind == "goal":
                facts.append(Atom("goal", (name,)))
        if self.carrying is not None:
            facts.append(Atom("carryingKey", (self.carrying.name,)))
            colored.append(self.carrying)
        else:
            facts.append(Atom("notCarrying"))
        if self.door.state != "locked":
            facts.append(Atom("unlocked"))
        for first in colored:
            for second in colored:
                if first is not second and first.color == second.color:
                    facts.append(Atom("sameColor", (first.name, second.name)))
        return FactBase(facts)

    def action_atom(self, action: int) -> Optional[Atom]:
        if action in (LEFT, RIGHT, FORWARD):
            return Atom("goto_candidate", (ACTION_NAMES[action],))
        front_obj = self._get(self.front_pos)
        if front_obj is None:
            return None
        if action == PICKUP and front_obj.kind == "key":
            return Atom("pickup", (front_obj.name,))
        if action == TOGGLE and front_obj.kind == "door":
            return Atom("toggle", (front_obj.name,))
        return None

    def render_ascii(self) -> str:
        arrows = ">v<^"
        lines = []
        for y, row in enumerate(self.grid):
            chars = []
            for x, obj in enumerate(row):
                if (x, y) == self.agent_pos:
                    chars.append(arrows[self.agent_dir])
                elif obj is None:
                    chars.append(".")
                elif obj.kind == "wall":
                    chars.append("#")
                elif obj.kind == "goal":
                    chars.append("G")
                elif obj.kind == "key":
                    chars.append("k")
                else:
                    chars.append("D" if obj.state == "locked" else ("/" if obj.state == "open" else "d"))
            lines.append("".join(chars))
        return "\n".join(lines)
