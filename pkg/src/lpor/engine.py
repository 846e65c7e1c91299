"""Deterministic discrete-event core and the idealized broadcast medium.

Events execute in (time, insertion order) so runs with one seed replay
byte-for-byte.  The medium is collision free: a broadcast reaches every
node within the delivery radius at send time, after a serialization delay
(frame bits over bandwidth) plus per-receiver propagation delay, with an
optional independent per-link drop probability.

One Simulation owns all node state and runs single threaded; parallelism
belongs across independent runs, which share nothing.
"""

import itertools
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import NamedTuple, Optional

import numpy as np

from . import holes, kernels, protocol
from .config import ConfigError, ScenarioConfig
from .geometry import SPEED_OF_LIGHT
from .metrics import MetricsAccumulator
from .mobility import WaypointField
from .protocol import ControlFrame, DataPacket, NodeState

DELIVERY = "delivery"
HELLO_BATCH = "hello_batch"
TIMER = "timer"
TRAFFIC = "traffic"
BEACON = "beacon"
TABLE_EXPIRY = "table_expiry"


class CausalityError(Exception):
    """An event was scheduled in the past."""


class Event(NamedTuple):
    time: float
    seq_no: int
    kind: str
    payload: object


class EventQueue:
    """Min-heap keyed by (time, seq_no); seq_no keeps ties in insertion order."""

    def __init__(self):
        self._heap = []

    def __len__(self):
        return len(self._heap)

    def schedule(self, event: Event, now: float) -> None:
        if event.time < now:
            raise CausalityError(
                f"event at t={event.time} scheduled while clock is at {now}")
        heappush(self._heap, (event.time, event.seq_no, event))

    def peek_time(self) -> Optional[float]:
        return self._heap[0][0] if self._heap else None

    def pop(self) -> Event:
        return heappop(self._heap)[2]


@dataclass(frozen=True)
class TraceRecord:
    """One protocol action. ``line()`` renders the stable text format;
    ``packet``/``failure``/``reroute`` are structured extras for listeners."""

    t: float
    ev: str
    node: int
    src: int
    dst: int
    seq: int
    packet: Optional[DataPacket] = None
    failure: bool = False
    reroute: bool = False

    def line(self) -> str:
        return (f"t={self.t:.9f} ev={self.ev} node={self.node} "
                f"src={self.src} dst={self.dst} seq={self.seq}")


class Simulation:
    """One protocol, one node speed, one seed, one run."""

    def __init__(self, cfg: ScenarioConfig, protocol_name: str, speed: float,
                 seed: int, *, positions=None, flows=None, failed_nodes=(),
                 listeners=()):
        if protocol_name not in ("lpor", "por"):
            raise ConfigError(f"unknown protocol {protocol_name!r}")
        self.cfg = cfg
        self.protocol_name = protocol_name
        self.speed = float(speed)
        self.seed = int(seed)
        self.radio = cfg.radio()
        self.n_nodes = cfg.nodes
        self.now = 0.0
        self.queue = EventQueue()
        self._seq = itertools.count()
        self.failed_nodes = frozenset(failed_nodes)
        self.metrics = MetricsAccumulator()
        self.listeners = list(listeners)

        pos_ss, way_ss, traffic_ss, drop_ss = np.random.SeedSequence(seed).spawn(4)
        self.mob = WaypointField(
            cfg.nodes, cfg.area_w, cfg.area_h, speed, pos_ss, way_ss,
            pause_s=cfg.pause_s, positions=positions)
        self.nodes = [NodeState(id=i) for i in range(cfg.nodes)]
        self.drop_rng = np.random.default_rng(drop_ss)
        if flows is not None:
            self.flows = [(int(s), int(d)) for s, d in flows]
            for s, d in self.flows:
                if s == d or not (0 <= s < cfg.nodes and 0 <= d < cfg.nodes):
                    raise ConfigError(f"bad flow ({s}, {d})")
        else:
            self.flows = self._draw_flows(np.random.default_rng(traffic_ss))

    def _draw_flows(self, rng) -> list:
        if self.cfg.flows > self.cfg.nodes * (self.cfg.nodes - 1):
            raise ConfigError("more flows than distinct source/destination pairs")
        flows: list = []
        used = set()
        while len(flows) < self.cfg.flows:
            src = int(rng.integers(0, self.cfg.nodes))
            dst = int(rng.integers(0, self.cfg.nodes))
            if src == dst or (src, dst) in used:
                continue
            used.add((src, dst))
            flows.append((src, dst))
        return flows

    # -- clock and queue ---------------------------------------------------

    def schedule(self, time: float, kind: str, payload) -> Event:
        event = Event(time=time, seq_no=next(self._seq), kind=kind,
                      payload=payload)
        self.queue.schedule(event, self.now)
        return event

    def schedule_candidate_timer(self, node_id, key, token, fire_at) -> None:
        self.schedule(fire_at, TIMER, (node_id, key, token))

    def schedule_table_expiry(self, node_id, route_key, expiry) -> None:
        self.schedule(expiry, TABLE_EXPIRY, (node_id, route_key))

    def run_until(self, t_end: float) -> None:
        """Execute every event with time <= t_end; later ones never run."""
        if t_end < self.now:
            raise CausalityError(
                f"cannot run to t={t_end}: clock is already at {self.now}")
        while True:
            t = self.queue.peek_time()
            if t is None or t > t_end:
                break
            event = self.queue.pop()
            self.now = event.time
            self._dispatch(event)
        self.now = t_end

    def run(self) -> MetricsAccumulator:
        """Schedule traffic (and beacons, in beacon mode), then run to the end."""
        for idx in range(len(self.flows)):
            self.schedule(self.cfg.traffic_start, TRAFFIC, idx)
        if self.cfg.neighbor_mode == "beacon":
            # stagger first beacons across one interval
            for i in range(self.n_nodes):
                self.schedule(i * self.cfg.beacon_interval / self.n_nodes,
                              BEACON, i)
        self.run_until(self.cfg.sim_time)
        return self.metrics

    def _dispatch(self, event: Event) -> None:
        kind = event.kind
        if kind == DELIVERY:
            receiver, frame = event.payload
            self._deliver(receiver, frame)
        elif kind == HELLO_BATCH:
            receivers, frame = event.payload
            for rid in receivers:
                self.nodes[rid].neighbors[frame.sender] = (
                    frame.pos[0], frame.pos[1], self.now)
        elif kind == TIMER:
            node_id, key, token = event.payload
            protocol.on_candidate_timeout(
                self, self.nodes[node_id], key, token, self.now)
        elif kind == TRAFFIC:
            self._traffic_fire(event.payload)
        elif kind == BEACON:
            self._beacon_fire(event.payload)
        elif kind == TABLE_EXPIRY:
            node_id, route_key = event.payload
            node = self.nodes[node_id]
            entry = node.fwd_table.get(route_key)
            if entry is not None and self.now >= entry.expiry:
                del node.fwd_table[route_key]
        else:
            raise ValueError(f"unknown event kind {kind!r}")

    # -- medium ------------------------------------------------------------

    def broadcast(self, sender_id: int, frame, now: float) -> None:
        """Deliver ``frame`` to every live node inside the radius.

        The receiver set is evaluated at send time; positions drift
        negligibly over sub-millisecond flight times.  Each in-range link
        independently loses the frame with probability ``drop_prob``.
        """
        self.mob.advance_to(now)
        dists = kernels.distances_to(
            self.mob.x, self.mob.y,
            self.mob.x[sender_id], self.mob.y[sender_id])
        mask = dists <= self.radio.range_m
        mask[sender_id] = False
        rids = np.nonzero(mask)[0]
        if self.cfg.drop_prob > 0.0 and rids.size:
            rids = rids[self.drop_rng.random(rids.size) >= self.cfg.drop_prob]
        if self.failed_nodes:
            rids = np.array([r for r in rids if int(r) not in self.failed_nodes],
                            dtype=np.int64)
        tx_delay = frame.size_bytes * 8.0 / self.cfg.bandwidth_bps
        if isinstance(frame, ControlFrame) and frame.kind == "HELLO":
            # One event per beacon: the per-receiver propagation spread is
            # sub-microsecond here, far below every protocol timescale, so
            # neighbor-table updates land together after the tx delay.
            if rids.size:
                self.schedule(now + tx_delay, HELLO_BATCH,
                              (tuple(int(r) for r in rids), frame))
            return
        arrivals = now + tx_delay + dists[rids] / SPEED_OF_LIGHT
        for i in range(rids.size):
            self.schedule(float(arrivals[i]), DELIVERY, (int(rids[i]), frame))

    def _deliver(self, receiver_id: int, frame) -> None:
        node = self.nodes[receiver_id]
        if isinstance(frame, DataPacket):
            protocol.on_receive(self, node, frame, self.now)
            return
        if frame.kind == "HELLO":
            node.neighbors[frame.sender] = (frame.pos[0], frame.pos[1], self.now)
            return
        if frame.addressee != receiver_id:
            return  # overheard control traffic for someone else
        if frame.kind == "VOID":
            holes.on_void_warning(self, node, frame.key, frame.sender, self.now)
        elif frame.kind == "DISRUPT":
            holes.on_disrupt(self, node, frame.key, frame.sender, self.now)
        elif frame.kind == "ACK":
            holes.on_ack(self, node, frame.key, self.now)

    # -- node services -----------------------------------------------------

    def true_position(self, node_id: int) -> tuple[float, float]:
        self.mob.advance_to(self.now)
        return (float(self.mob.x[node_id]), float(self.mob.y[node_id]))

    def neighbor_arrays(self, node_id: int):
        """(ids, xs, ys) of this node's current neighbors, ids ascending.

        Oracle mode reads true positions; beacon mode reads the positions
        heard in HELLOs, dropping entries older than the hold time (so the
        view can be stale or wrong, which is the point).
        """
        if self.cfg.neighbor_mode == "oracle":
            self.mob.advance_to(self.now)
            dists = kernels.distances_to(
                self.mob.x, self.mob.y,
                self.mob.x[node_id], self.mob.y[node_id])
            mask = dists <= self.radio.range_m
            mask[node_id] = False
            ids = np.nonzero(mask)[0]
            return ids, self.mob.x[ids], self.mob.y[ids]
        nbrs = self.nodes[node_id].neighbors
        cutoff = self.now - self.cfg.neighbor_hold
        for nid in [n for n, (_, _, heard) in nbrs.items() if heard < cutoff]:
            del nbrs[nid]
        ids = np.array(sorted(nbrs), dtype=np.int64)
        xs = np.empty(ids.size)
        ys = np.empty(ids.size)
        for i, nid in enumerate(ids):
            x, y, _ = nbrs[int(nid)]
            xs[i] = x
            ys[i] = y
        return ids, xs, ys

    def trace(self, ev: str, node: int, pkt: DataPacket,
              failure: bool = False, reroute: bool = False) -> None:
        rec = TraceRecord(t=self.now, ev=ev, node=node, src=pkt.header.src,
                          dst=pkt.header.dst, seq=pkt.header.seq, packet=pkt,
                          failure=failure, reroute=reroute)
        self.metrics.observe(rec)
        for listener in self.listeners:
            listener(rec)

    # -- event sources -----------------------------------------------------

    def _traffic_fire(self, flow_idx: int) -> None:
        src, dst = self.flows[flow_idx]
        if src not in self.failed_nodes:
            protocol.originate(self, self.nodes[src], dst, self.now)
        self.schedule(self.now + 1.0 / self.cfg.rate_pps, TRAFFIC, flow_idx)

    def _beacon_fire(self, node_id: int) -> None:
        if node_id not in self.failed_nodes:
            pos = self.true_position(node_id)
            self.broadcast(node_id, ControlFrame(
                kind="HELLO", sender=node_id, addressee=None, pos=pos,
                size_bytes=self.cfg.control_bytes), self.now)
        self.schedule(self.now + self.cfg.beacon_interval, BEACON, node_id)
