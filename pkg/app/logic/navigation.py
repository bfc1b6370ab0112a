# -*- coding: utf-8 -*-
"""
导航指令解析: goto(X) / touch(X) → 底层动作集合

网格环境返回严格减小 BFS 距离的移动；WaterWorld 返回与指向最近目标色球的
向量内积最大的轴向冲量。
"""
from collections import deque
from typing import Dict, FrozenSet, Tuple

import numpy as np

NAVIGATION_PREDICATES = frozenset({"goto", "touch"})


def resolve_goto(env, target: str) -> FrozenSet[int]:
    """
    Raises:
        LookupError: 环境中没有该目标常量
    """
    domain = env.domain
    if domain == "doorkey":
        return _resolve_doorkey(env, target)
    if domain == "officeworld":
        return _resolve_office(env, target)
    if domain == "waterworld":
        return _resolve_water(env, target)
    raise LookupError(f"未知环境类型: {domain}")


# ─── OfficeWorld ───


def _resolve_office(env, target: str) -> FrozenSet[int]:
    from app.envs.officeworld import MOVES, PLANTS, next_position

    dist = env.distances_to(env.target_position(target))
    here = dist.get(env.agent_pos)
    if here is None or here == 0:
        return frozenset()
    actions = set()
    for action in MOVES:
        nxt = next_position(env.agent_pos, action)
        if nxt in PLANTS:
            continue
        if dist.get(nxt) == here - 1:
            actions.add(action)
    return frozenset(actions)


# ─── DoorKey ───


def _doorkey_walkable(env, pos: Tuple[int, int], target_pos: Tuple[int, int]) -> bool:
    """规划用的可通行判断；上锁的门只有携带同色钥匙时才算可通行"""
    if pos == target_pos:
        return True
    obj = env._get(pos)
    if obj is None or obj.kind == "goal":
        return True
    if obj.kind == "door":
        if obj.state == "locked":
            return env.carrying is not None and env.carrying.color == obj.color
        return True
    return False


def doorkey_distances(env, target_pos: Tuple[int, int]) -> Dict[Tuple[int, int], int]:
    from app.envs.doorkey import DIR_VECTORS

    dist = {target_pos: 0}
    queue = deque([target_pos])
    while queue:
        x, y = queue.popleft()
        for dx, dy in DIR_VECTORS:
            nxt = (x + dx, y + dy)
            if nxt in dist:
                continue
            if not _doorkey_walkable(env, nxt, target_pos):
                continue
            dist[nxt] = dist[(x, y)] + 1
            queue.append(nxt)
    return dist


def _resolve_doorkey(env, target: str) -> FrozenSet[int]:
    from app.envs.doorkey import DIR_VECTORS, FORWARD, LEFT, RIGHT

    objects = env.objects()
    if target not in objects:
        if env.carrying is not None and env.carrying.name == target:
            return frozenset()
        raise LookupError(f"DoorKey 中没有目标常量 {target}")
    target_pos, _ = objects[target]
    dist = doorkey_distances(env, target_pos)
    here = dist.get(env.agent_pos)
    if here is None or here == 0:
        return frozenset()

    front = env.front_pos
    if dist.get(front) == here - 1:
        # 面前是锁着的门或钥匙时需要 toggle / pickup，不算移动
        return frozenset({FORWARD}) if env.is_passable(front) else frozenset()

    actions = set()
    for offset, turns in ((1, {RIGHT}), (3, {LEFT}), (2, {LEFT, RIGHT})):
        dx, dy = DIR_VECTORS[(env.agent_dir + offset) % 4]
        neighbor = (env.agent_pos[0] + dx, env.agent_pos[1] + dy)
        if dist.get(neighbor) == here - 1:
            actions |= turns
    return frozenset(actions)


# ─── WaterWorld ───


def _resolve_water(env, target: str) -> FrozenSet[int]:
    from app.envs.waterworld import IMPULSES, NONE

    ball = env.nearest_ball(target)
    direction = ball.pos - env.agent.pos
    scores = {
        action: float(np.dot(np.array(vector), direction))
        for action, vector in IMPULSES.items()
        if action != NONE
    }
    best = max(scores.values())
    if best <= 0.0:
        return frozenset()
    return frozenset(action for action, score in scores.items() if score == best)
