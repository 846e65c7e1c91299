"""Hot numeric kernels shared by the geometry, mobility and protocol layers.

Each kernel exists as a plain loop over numpy arrays.  With numba enabled
(see :mod:`lpor.accel`) the loop is compiled; without it, ``distances_to``
and ``advance_legs`` fall back to vectorized numpy while the small
per-selection loops run interpreted.  All paths are arranged so the
floating-point operations are performed in the same order, which keeps
results bit-identical between backends (fastmath is off).

Node ids are array indices (int64); positions are float64 metres.
"""

import numpy as np

from .accel import NUMBA_ENABLED, maybe_njit

NO_NODE = -1  # sentinel id returned when no node qualifies


def _friis_power_k(k: float, d: float) -> float:
    # k = Pt*Gt*Gr*lambda^2 / L, received power = k / (4*pi*d)^2
    x = 4.0 * np.pi * d
    return k / (x * x)


def _two_ray_power_k(k_friis: float, k_ground: float, crossover: float, d: float) -> float:
    # k_ground = Pt*Gt*Gr*(ht*hr)^2 / L; below crossover the free-space
    # value applies, beyond it the d^-4 ground-reflection law.
    if d < crossover:
        x = 4.0 * np.pi * d
        return k_friis / (x * x)
    return k_ground / (d * d * d * d)


def _distances_to_loop(xs, ys, px, py, out):
    for i in range(xs.shape[0]):
        dx = xs[i] - px
        dy = ys[i] - py
        out[i] = np.sqrt(dx * dx + dy * dy)
    return out


def _advance_legs(x, y, wx, wy, speed, pause_until, t_last, pause_s, t, arrived):
    """Advance every node toward its waypoint until time ``t`` or arrival.

    Mutates position/time arrays in place.  Nodes that reach their waypoint
    are flagged in ``arrived`` (they need a fresh waypoint drawn by the
    caller, which then re-invokes this kernel for the remaining time).
    Returns the number of arrivals.
    """
    n_arrived = 0
    for i in range(x.shape[0]):
        arrived[i] = False
        t0 = t_last[i]
        if t0 >= t:
            continue
        if pause_until[i] > t0:
            t0 = min(pause_until[i], t)
            t_last[i] = t0
            if t0 >= t:
                continue
        if speed[i] <= 0.0:
            t_last[i] = t
            continue
        dx = wx[i] - x[i]
        dy = wy[i] - y[i]
        dist = np.sqrt(dx * dx + dy * dy)
        if dist <= 0.0:
            arrived[i] = True
            n_arrived += 1
            continue
        travel = dist / speed[i]
        if t0 + travel <= t:
            x[i] = wx[i]
            y[i] = wy[i]
            t_last[i] = t0 + travel
            pause_until[i] = t0 + travel + pause_s
            arrived[i] = True
            n_arrived += 1
        else:
            frac = speed[i] * (t - t0) / dist
            x[i] = x[i] + dx * frac
            y[i] = y[i] + dy * frac
            t_last[i] = t
    return n_arrived


def _pick_forwarder_power(nids, nxs, nys, cx, cy, dstx, dsty, k, excluded):
    """Highest reception power among neighbors with positive progress.

    Neighbors must be passed in ascending id order; the strict ``>``
    comparison then resolves power ties toward the smallest id.
    Returns NO_NODE when no neighbor qualifies.
    """
    ddx = cx - dstx
    ddy = cy - dsty
    d_cur = np.sqrt(ddx * ddx + ddy * ddy)
    best = NO_NODE
    best_p = -1.0
    for i in range(nids.shape[0]):
        nid = nids[i]
        skip = False
        for j in range(excluded.shape[0]):
            if excluded[j] == nid:
                skip = True
                break
        if skip:
            continue
        dx = nxs[i] - dstx
        dy = nys[i] - dsty
        d_dst = np.sqrt(dx * dx + dy * dy)
        if d_dst >= d_cur:
            continue
        dx = nxs[i] - cx
        dy = nys[i] - cy
        d = np.sqrt(dx * dx + dy * dy)
        if d <= 0.0:
            p = np.inf
        else:
            x = 4.0 * np.pi * d
            p = k / (x * x)
        if p > best_p:
            best_p = p
            best = nid
    return best


def _pick_forwarder_nearest_dest(nids, nxs, nys, cx, cy, dstx, dsty, excluded):
    """Greedy-distance variant: least remaining distance to destination."""
    ddx = cx - dstx
    ddy = cy - dsty
    d_cur = np.sqrt(ddx * ddx + ddy * ddy)
    best = NO_NODE
    best_d = np.inf
    for i in range(nids.shape[0]):
        nid = nids[i]
        skip = False
        for j in range(excluded.shape[0]):
            if excluded[j] == nid:
                skip = True
                break
        if skip:
            continue
        dx = nxs[i] - dstx
        dy = nys[i] - dsty
        d_dst = np.sqrt(dx * dx + dy * dy)
        if d_dst >= d_cur:
            continue
        if d_dst < best_d:
            best_d = d_dst
            best = nid
    return best


def _pick_candidates(nids, nxs, nys, cx, cy, fx, fy, fid, dstx, dsty, r, k):
    """Top-2 backup receivers for a chosen forwarder.

    A neighbor qualifies when it sits within half the range of the
    forwarder, within range of the sender, strictly closer to the
    destination than the sender and strictly farther than the forwarder.
    Ranked by reception power at the sender, ties toward smaller ids.
    Returns (cn1, cn2) with NO_NODE filling empty slots.
    """
    ddx = cx - dstx
    ddy = cy - dsty
    d_cur = np.sqrt(ddx * ddx + ddy * ddy)
    fdx = fx - dstx
    fdy = fy - dsty
    d_fwd = np.sqrt(fdx * fdx + fdy * fdy)
    half_r = r / 2.0
    id1 = NO_NODE
    id2 = NO_NODE
    p1 = -1.0
    p2 = -1.0
    for i in range(nids.shape[0]):
        nid = nids[i]
        if nid == fid:
            continue
        dx = nxs[i] - fx
        dy = nys[i] - fy
        if np.sqrt(dx * dx + dy * dy) > half_r:
            continue
        dx = nxs[i] - cx
        dy = nys[i] - cy
        d_self = np.sqrt(dx * dx + dy * dy)
        if d_self > r:
            continue
        dx = nxs[i] - dstx
        dy = nys[i] - dsty
        d_dst = np.sqrt(dx * dx + dy * dy)
        if d_dst >= d_cur or d_dst <= d_fwd:
            continue
        if d_self <= 0.0:
            p = np.inf
        else:
            x = 4.0 * np.pi * d_self
            p = k / (x * x)
        if p > p1:
            id2 = id1
            p2 = p1
            id1 = nid
            p1 = p
        elif p > p2:
            id2 = nid
            p2 = p
    return id1, id2


# Compiled (or interpreted) entry points. The *_loop originals stay
# importable for the benchmark and backend-equivalence tests.
friis_power_k = maybe_njit(_friis_power_k)
two_ray_power_k = maybe_njit(_two_ray_power_k)
advance_legs = maybe_njit(_advance_legs)
pick_forwarder_power = maybe_njit(_pick_forwarder_power)
pick_forwarder_nearest_dest = maybe_njit(_pick_forwarder_nearest_dest)
pick_candidates = maybe_njit(_pick_candidates)

if NUMBA_ENABLED:
    _distances_to_jit = maybe_njit(_distances_to_loop)

    def distances_to(xs, ys, px, py):
        out = np.empty(xs.shape[0], dtype=np.float64)
        return _distances_to_jit(xs, ys, px, py, out)

else:

    def distances_to(xs, ys, px, py):
        dx = xs - px
        dy = ys - py
        return np.sqrt(dx * dx + dy * dy)


PURE_KERNELS = {
    "friis_power_k": _friis_power_k,
    "two_ray_power_k": _two_ray_power_k,
    "advance_legs": _advance_legs,
    "pick_forwarder_power": _pick_forwarder_power,
    "pick_forwarder_nearest_dest": _pick_forwarder_nearest_dest,
    "pick_candidates": _pick_candidates,
    "distances_to": lambda xs, ys, px, py: _distances_to_loop(
        xs, ys, px, py, np.empty(xs.shape[0], dtype=np.float64)
    ),
}

EMPTY_IDS = np.empty(0, dtype=np.int64)


def warmup():
    """Force compilation of every jitted kernel (no-op without numba)."""
    xs = np.array([1.0, 2.0])
    ys = np.array([0.0, 1.0])
    ids = np.array([0, 1], dtype=np.int64)
    distances_to(xs, ys, 0.0, 0.0)
    friis_power_k(1.0, 1.0)
    two_ray_power_k(1.0, 1.0, 10.0, 5.0)
    pick_forwarder_power(ids, xs, ys, 0.0, 0.0, 5.0, 0.0, 1.0, EMPTY_IDS)
    pick_forwarder_nearest_dest(ids, xs, ys, 0.0, 0.0, 5.0, 0.0, EMPTY_IDS)
    pick_candidates(ids, xs, ys, 0.0, 0.0, 1.0, 0.0, 0, 5.0, 0.0, 3.0, 1.0)
    arrived = np.zeros(2, dtype=np.bool_)
    advance_legs(
        xs.copy(), ys.copy(), xs + 1.0, ys + 1.0,
        np.ones(2), np.zeros(2), np.zeros(2), 0.0, 0.5, arrived,
    )
