"""Random-waypoint motion for all nodes, advanced lazily to event times.

Every node moves in a straight line toward its waypoint at its fixed
speed; on arrival it pauses (zero by default) and draws the next waypoint
uniformly inside the area.  Waypoints come from one numpy Generator per
node, so a node's itinerary depends only on the seed, never on when the
simulation happens to sample positions.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import Point2D


@dataclass(frozen=True)
class MobilityState:
    """Snapshot of one node's motion, for inspection and tests."""

    position: Point2D
    waypoint: Point2D
    speed: float
    pause_until: float


def init_positions(seed, n: int, width: float, height: float) -> np.ndarray:
    """Draw ``n`` i.i.d. uniform positions in the area; shape (n, 2).

    ``seed`` may be anything ``np.random.default_rng`` accepts.
    """
    if n <= 0:
        raise ValueError(f"need at least one node, got n={n}")
    if width <= 0 or height <= 0:
        raise ValueError(f"area must be positive, got {width}x{height}")
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    pts[:, 0] *= width
    pts[:, 1] *= height
    return pts


class WaypointField:
    """Positions of ``n`` nodes over time inside [0, width] x [0, height]."""

    def __init__(self, n, width, height, speed, position_seed, waypoint_seed,
                 pause_s=0.0, positions=None):
        if n <= 0:
            raise ValueError(f"need at least one node, got n={n}")
        self.width = float(width)
        self.height = float(height)
        self.pause_s = float(pause_s)
        if positions is None:
            pts = init_positions(position_seed, n, width, height)
        else:
            pts = np.asarray(positions, dtype=np.float64).reshape(n, 2).copy()
            if (pts[:, 0] < 0).any() or (pts[:, 0] > width).any() \
                    or (pts[:, 1] < 0).any() or (pts[:, 1] > height).any():
                raise ValueError("explicit positions fall outside the area")
        self.x = pts[:, 0].copy()
        self.y = pts[:, 1].copy()
        self.speed = np.full(n, float(speed))
        way_ss = (waypoint_seed if isinstance(waypoint_seed, np.random.SeedSequence)
                  else np.random.SeedSequence(waypoint_seed))
        self._node_rngs = [np.random.default_rng(s) for s in way_ss.spawn(n)]
        self.wx = np.empty(n)
        self.wy = np.empty(n)
        for i in range(n):
            self.wx[i], self.wy[i] = self._draw_waypoint(i)
        self.t_last = np.zeros(n)
        self.pause_until = np.zeros(n)
        self._arrived = np.zeros(n, dtype=np.bool_)
        self._t = 0.0

    def __len__(self):
        return self.x.shape[0]

    def _draw_waypoint(self, i):
        rng = self._node_rngs[i]
        while True:
            wx = rng.uniform(0.0, self.width)
            wy = rng.uniform(0.0, self.height)
            if wx != self.x[i] or wy != self.y[i]:
                return wx, wy

    def advance_to(self, t: float) -> None:
        """Move every node to time ``t``. ``t`` must not go backwards."""
        if t == self._t:
            return
        if t < self._t:
            raise ValueError(f"time moved backwards: {t} < {self._t}")
        while True:
            n_arrived = kernels.advance_legs(
                self.x, self.y, self.wx, self.wy, self.speed,
                self.pause_until, self.t_last, self.pause_s, t, self._arrived)
            if n_arrived == 0:
                break
            for i in np.nonzero(self._arrived)[0]:
                self.wx[i], self.wy[i] = self._draw_waypoint(i)
        self._t = t

    def position_of(self, i: int) -> tuple[float, float]:
        return (float(self.x[i]), float(self.y[i]))

    def state_of(self, i: int) -> MobilityState:
        return MobilityState(
            position=Point2D(float(self.x[i]), float(self.y[i])),
            waypoint=Point2D(float(self.wx[i]), float(self.wy[i])),
            speed=float(self.speed[i]),
            pause_until=float(self.pause_until[i]),
        )
