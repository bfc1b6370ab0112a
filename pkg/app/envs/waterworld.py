# -*- coding: utf-8 -*-
"""
WaterWorld 环境

二维盒子里匀速运动、碰墙反弹的彩色球；智能体通过轴向冲量改变速度。
事件是本步新发生碰撞的颜色 touched_<color>。
"""
from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Tuple

import numpy as np

from app.envs.base import BaseEnv
from app.logic.terms import Atom, FactBase
from app.tasks import WATER_COLORS, WATER_SEQUENCES

UP, DOWN, LEFT, RIGHT, NONE = range(5)
ACTION_NAMES = ("up", "down", "left", "right", "none")
IMPULSES = {UP: (0.0, 1.0), DOWN: (0.0, -1.0), LEFT: (-1.0, 0.0), RIGHT: (1.0, 0.0), NONE: (0.0, 0.0)}

BALL_RADIUS = 15.0
BALL_SPEED = 30.0
BALLS_PER_COLOR = 2
DT = 0.1
AGENT_IMPULSE = 20.0
AGENT_MAX_SPEED = 60.0


@dataclass
class Ball:
    color: str
    pos: np.ndarray
    vel: np.ndarray


def _reflect(ball: Ball, size: float):
    """沿轴向反射速度；只翻转符号，速度大小不变"""
    for axis in (0, 1):
        low, high = BALL_RADIUS, size - BALL_RADIUS
        if ball.pos[axis] < low:
            ball.pos[axis] = 2 * low - ball.pos[axis]
            ball.vel[axis] = -ball.vel[axis]
        elif ball.pos[axis] > high:
            ball.pos[axis] = 2 * high - ball.pos[axis]
            ball.vel[axis] = -ball.vel[axis]


class WaterWorldEnv(BaseEnv):
    """WaterWorld"""

    domain = "waterworld"
    n_actions = 5
    action_names = ACTION_NAMES
    fact_vocabulary = {f"touched_{color}": 0 for color in WATER_COLORS}
    action_vocabulary = {"touch": 1}

    def __init__(self, env_config):
        super().__init__(env_config)
        self.box = float(env_config.resolved_size())
        self.sequences = WATER_SEQUENCES[self.task.name]
        self.agent = Ball("white", np.zeros(2), np.zeros(2))
        self.balls: List[Ball] = []
        self._colliding: List[bool] = []

    @property
    def obs_dim(self) -> int:
        return 4 + 4 * len(WATER_COLORS) * BALLS_PER_COLOR + len(WATER_COLORS)

    def _layout(self, rng: np.random.Generator):
        self.agent = Ball("white", np.array([self.box / 2, self.box / 2]), np.zeros(2))
        self.balls = []
        for color in WATER_COLORS:
            for _ in range(BALLS_PER_COLOR):
                while True:
                    pos = rng.uniform(BALL_RADIUS, self.box - BALL_RADIUS, size=2)
                    if np.linalg.norm(pos - self.agent.pos) > 4 * BALL_RADIUS:
                        break
                angle = rng.uniform(0.0, 2 * np.pi)
                vel = BALL_SPEED * np.array([np.cos(angle), np.sin(angle)])
                self.balls.append(Ball(color, pos, vel))
        self._colliding = [self._touching(ball) for ball in self.balls]

    def _touching(self, ball: Ball) -> bool:
        return float(np.linalg.norm(ball.pos - self.agent.pos)) <= 2 * BALL_RADIUS

    def _apply(self, action: int) -> Tuple[FrozenSet[str], bool]:
        dx, dy = IMPULSES[action]
        self.agent.vel = self.agent.vel + AGENT_IMPULSE * np.array([dx, dy])
        speed = float(np.linalg.norm(self.agent.vel))
        if speed > AGENT_MAX_SPEED:
            self.agent.vel = self.agent.vel * (AGENT_MAX_SPEED / speed)

        self.agent.pos = self.agent.pos + DT * self.agent.vel
        _reflect(self.agent, self.box)
        for ball in self.balls:
            ball.pos = ball.pos + DT * ball.vel
            _reflect(ball, self.box)

        events = set()
        colliding = []
        for ball, before in zip(self.balls, self._colliding):
            now = self._touching(ball)
            if now and not before:
                events.add(f"touched_{ball.color}")
            colliding.append(now)
        self._colliding = colliding
        return frozenset(events), False

    def touched(self) -> FrozenSet[str]:
        """按序列进度推出已满足的 touched_<color>"""
        flags = set()
        for stage, (first, second) in zip(self.progress, self.sequences):
            if stage >= 1:
                flags.add(first)
            if stage >= 2:
                flags.add(second)
        return frozenset(flags)

    def encode_observation(self) -> np.ndarray:
        parts = [self.agent.pos / self.box, self.agent.vel / AGENT_MAX_SPEED]
        for ball in self.balls:
            parts.append((ball.pos - self.agent.pos) / self.box)
            parts.append((ball.vel - self.agent.vel) / (AGENT_MAX_SPEED + BALL_SPEED))
        touched = self.touched()
        parts.append(np.array([float(color in touched) for color in WATER_COLORS]))
        return np.concatenate(parts).astype(np.float64)

    def ground_state(self) -> FactBase:
        return FactBase(Atom(f"touched_{color}") for color in sorted(self.touched()))

    def action_atom(self, action: int) -> Optional[Atom]:
        if action == NONE:
            return None
        return Atom("goto_candidate", (ACTION_NAMES[action],))

    def nearest_ball(self, color: str) -> Ball:
        candidates = [ball for ball in self.balls if ball.color == color]
        if not candidates:
            raise LookupError(f"WaterWorld 中没有颜色为 {color} 的球")
        return min(candidates, key=lambda ball: float(np.linalg.norm(ball.pos - self.agent.pos)))
