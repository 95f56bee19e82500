"""Node trajectories: static placement, scripted convoy excursion, and a
time-legged 2-D random walk with specular reflection at the area boundary.

Positions are evaluated lazily at arbitrary times; nothing here schedules
events.
"""

import bisect
import math
from dataclasses import dataclass, replace

import numpy as np

from .engine import S

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    def distance(self, other):
        return math.hypot(self.x - other.x, self.y - other.y)


class StaticMobility:
    def __init__(self, positions):
        self._pos = np.asarray(positions, dtype=float).reshape(-1, 2)
        self._pos.setflags(write=False)

    @property
    def n(self):
        return len(self._pos)

    def positions(self, t):
        return self._pos

    def position_at(self, node, t):
        if t < 0:
            raise ValueError("t must be >= 0")
        if not 0 <= node < self.n:
            raise KeyError(f"unknown node {node}")
        x, y = self.positions(t)[node]
        return Position(float(x), float(y))

    def static_key(self, t):
        return "static"

    def is_mobile(self, node):
        return False


@dataclass(frozen=True)
class ConvoyScript:
    """Members leave together at ``depart_at``, travel ``out_distance`` along
    ``heading``, dwell for ``away_duration`` and return the same way.
    Times are integer nanoseconds, speed in m/s."""

    depart_at: int
    away_duration: int
    members: frozenset
    speed: float = 6.0
    heading: tuple = (1.0, 0.0)
    out_distance: float = 600.0

    def __post_init__(self):
        norm = math.hypot(*self.heading)
        if norm == 0:
            raise ValueError("heading must be nonzero")
        object.__setattr__(self, "heading", (self.heading[0] / norm, self.heading[1] / norm))
        object.__setattr__(self, "members", frozenset(self.members))
        if self.speed <= 0:
            raise ValueError("convoy speed must be positive")

    @property
    def travel_time(self):
        return int(round(self.out_distance / self.speed * S))

    @property
    def away_start(self):
        return self.depart_at + self.travel_time

    @property
    def away_end(self):
        return self.away_start + self.away_duration

    @property
    def cycle_end(self):
        return self.away_end + self.travel_time

    def offset(self, t):
        """Distance travelled from home along the heading at time ``t``."""
        if t <= self.depart_at or t >= self.cycle_end:
            return 0.0
        if t < self.away_start:
            return self.speed * (t - self.depart_at) / S
        if t <= self.away_end:
            return self.out_distance
        return self.out_distance - self.speed * (t - self.away_end) / S


class ConvoyMobility(StaticMobility):
    def __init__(self, positions, script):
        super().__init__(positions)
        self.script = script
        self._mask = np.zeros(self.n, dtype=bool)
        for m in script.members:
            if not 0 <= m < self.n:
                raise ValueError(f"convoy member {m} out of range")
            self._mask[m] = True
        self._direction = np.array(script.heading)
        self._last = (None, None)

    def positions(self, t):
        if self._last[0] == t:
            return self._last[1]
        off = self.script.offset(t)
        if off == 0.0:
            pos = self._pos
        else:
            pos = self._pos.copy()
            pos[self._mask] += off * self._direction
        self._last = (t, pos)
        return pos

    def static_key(self, t):
        s = self.script
        if t <= s.depart_at or t >= s.cycle_end:
            return "home"
        if s.away_start <= t <= s.away_end:
            return "away"
        return None

    def is_mobile(self, node):
        return bool(self._mask[node])


@dataclass(frozen=True)
class RandomWalkState:
    """Kinematic state; ``leg_remaining`` and ``leg_duration`` in seconds,
    bounds as ``(xmin, ymin, xmax, ymax)``."""

    x: float
    y: float
    heading: float
    speed: float = 6.0
    leg_duration: float = 2.0
    leg_remaining: float = 2.0
    bounds: tuple = (0.0, 0.0, 500.0, 500.0)

    @property
    def velocity(self):
        return self.speed * math.cos(self.heading), self.speed * math.sin(self.heading)


def _reflect_straight(state, dt, emit=None, t0=0.0):
    """Move along the current heading for ``dt`` seconds, bouncing off walls."""
    xmin, ymin, xmax, ymax = state.bounds
    x, y, heading = state.x, state.y, state.heading
    left = dt
    t = t0
    while True:
        vx = state.speed * math.cos(heading)
        vy = state.speed * math.sin(heading)
        if emit is not None:
            emit(t, x, y, vx, vy)
        hit_x = hit_y = math.inf
        if vx > 0:
            hit_x = (xmax - x) / vx
        elif vx < 0:
            hit_x = (xmin - x) / vx
        if vy > 0:
            hit_y = (ymax - y) / vy
        elif vy < 0:
            hit_y = (ymin - y) / vy
        hit = min(hit_x, hit_y)
        if hit >= left:
            x += vx * left
            y += vy * left
            break
        hit = max(hit, 0.0)
        x += vx * hit
        y += vy * hit
        left -= hit
        t += hit
        # reflect about the normal of whichever wall(s) were reached
        if hit_x <= hit_y:
            heading = math.pi - heading
            x = xmax if vx > 0 else xmin
        if hit_y <= hit_x:
            heading = -heading
            y = ymax if vy > 0 else ymin
        heading %= TWO_PI
    x = min(max(x, xmin), xmax)
    y = min(max(y, ymin), ymax)
    return replace(state, x=x, y=y, heading=heading)


def step_random_walk(state, dt, rng, emit=None):
    """Advance ``state`` by ``dt`` seconds; a fresh uniform heading is drawn from
    ``rng`` each time a leg expires. ``emit(t, x, y, vx, vy)`` is called at the
    start of every straight piece (used to build trajectories)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    t = 0.0
    left = dt
    while left > 0:
        seg = min(left, state.leg_remaining)
        state = _reflect_straight(state, seg, emit, t)
        t += seg
        left -= seg
        remaining = state.leg_remaining - seg
        if remaining <= 1e-12:
            state = replace(state, heading=float(rng.uniform(0.0, TWO_PI)),
                            leg_remaining=state.leg_duration)
        else:
            state = replace(state, leg_remaining=remaining)
    return state


class _Trajectory:
    """Piecewise-linear path for one node, extended lazily one leg at a time."""

    def __init__(self, state, rng, start):
        self.state = state
        self.rng = rng
        self.times = []
        self.pieces = []
        self.horizon = start
        self.start = start
        self.home = (state.x, state.y)

    def _emit(self, t, x, y, vx, vy):
        t_abs = self.horizon + t
        if self.times and t_abs <= self.times[-1]:
            self.times[-1] = t_abs
            self.pieces[-1] = (t_abs, x, y, vx, vy)
            return
        self.times.append(t_abs)
        self.pieces.append((t_abs, x, y, vx, vy))

    def _extend(self):
        leg = self.state.leg_remaining
        self.state = step_random_walk(self.state, leg, self.rng, self._emit)
        self.horizon += leg

    def at(self, t):
        if t <= self.start:
            return self.home
        while self.horizon < t:
            self._extend()
        i = bisect.bisect_right(self.times, t) - 1
        t0, x, y, vx, vy = self.pieces[i]
        dt = t - t0
        return x + vx * dt, y + vy * dt


class RandomWalkMobility:
    """Every node walks independently from ``start`` (seconds); each node owns
    its own random stream so trajectories don't depend on query order."""

    def __init__(self, initial, rngs, speed=6.0, leg_duration=2.0,
                 bounds=(0.0, 0.0, 500.0, 500.0), start=0.0):
        initial = np.asarray(initial, dtype=float).reshape(-1, 2)
        self._tracks = []
        for i, (x, y) in enumerate(initial):
            rng = rngs[i]
            st = RandomWalkState(float(x), float(y), float(rng.uniform(0.0, TWO_PI)),
                                 speed, leg_duration, leg_duration, tuple(bounds))
            self._tracks.append(_Trajectory(st, rng, start))
        self.bounds = tuple(bounds)
        self._last = (None, None)

    @property
    def n(self):
        return len(self._tracks)

    def positions(self, t):
        if self._last[0] == t:
            return self._last[1]
        ts = t / S
        pos = np.array([tr.at(ts) for tr in self._tracks])
        self._last = (t, pos)
        return pos

    def position_at(self, node, t):
        if t < 0:
            raise ValueError("t must be >= 0")
        if not 0 <= node < self.n:
            raise KeyError(f"unknown node {node}")
        x, y = self._tracks[node].at(t / S)
        return Position(float(x), float(y))

    def static_key(self, t):
        return None

    def is_mobile(self, node):
        return True
