"""Per-node opportunistic routing state machine and forwarder selection.

Two selection policies share all other machinery:

  - ``lpor``: the next hop is the positive-progress neighbor with the
    highest free-space reception power (equivalently, the nearest one
    under homogeneous radios).
  - ``por``: the greedy-distance baseline; the next hop is the
    positive-progress neighbor closest to the destination.

Each data broadcast names a best forwarder plus up to two backup
candidates chosen near the forwarder.  Candidates cache the packet and
take over, staggered by rank, if they never overhear a retransmission.
Duplicate copies are recognized by (source, seq) and never re-forwarded.
"""

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import holes, kernels
from .geometry import Point2D, RadioParams

NO_NODE = kernels.NO_NODE


@dataclass(frozen=True)
class PacketHeader:
    """The routing fields rewritten at every hop."""

    seq: int
    src: int
    dst: int
    forwarder: int
    cand1: Optional[int] = None
    cand2: Optional[int] = None
    sent_at: float = 0.0

    def __post_init__(self):
        if self.forwarder in (self.cand1, self.cand2):
            raise ValueError("forwarder may not appear among the candidates")
        if self.cand1 is not None and self.cand1 == self.cand2:
            raise ValueError("candidate slots must name distinct nodes")


@dataclass(frozen=True)
class DataPacket:
    """A data frame in flight: header plus simulator instrumentation.

    ``hops`` counts the transmissions along this copy's own lineage and
    ``tx_path`` records (node, x, y, t) per transmission; ``created_at``
    and ``dest_pos`` freeze the origination time and the destination
    position looked up once at the source.  None of these travel in the
    header.
    """

    header: PacketHeader
    size_bytes: int
    created_at: float
    dest_pos: tuple[float, float]
    hops: int = 0
    prev_hop: Optional[int] = None
    ack_to: Optional[int] = None
    rerouted: bool = False
    tx_path: tuple = ()

    @property
    def key(self) -> tuple[int, int]:
        return (self.header.src, self.header.seq)


@dataclass(frozen=True)
class ControlFrame:
    """VOID / DISRUPT / ACK / HELLO. Physically broadcast, logically
    addressed; carries no candidate list."""

    kind: str
    sender: int
    addressee: Optional[int]         # None: anyone may process (HELLO)
    key: Optional[tuple[int, int]] = None
    pos: Optional[tuple[float, float]] = None
    size_bytes: int = 64


@dataclass
class ForwardingTableEntry:
    next_hop: int
    candidates: tuple
    expiry: float


@dataclass
class VoidRecord:
    """One hole-recovery episode as seen by the trigger node."""

    trigger: int
    void_node: int
    pkt_key: tuple[int, int]
    state: str  # rerouting | acked | disrupted


@dataclass
class _CandidateHold:
    pkt: DataPacket
    token: int
    rank: int


@dataclass
class _CachedForward:
    pkt: DataPacket   # the copy this node received (or originated)
    expiry: float


@dataclass
class NodeState:
    """Everything one node remembers across events."""

    id: int
    next_seq: int = 0
    seen: set = field(default_factory=set)
    neighbors: dict = field(default_factory=dict)      # id -> (x, y, heard_at)
    fwd_table: dict = field(default_factory=dict)      # (src, dst) -> entry
    pkt_cache: dict = field(default_factory=dict)      # key -> _CachedForward
    cand_cache: dict = field(default_factory=dict)     # key -> _CandidateHold
    void_exclude: dict = field(default_factory=dict)   # key -> set of node ids
    void_records: dict = field(default_factory=dict)   # key -> [VoidRecord]
    self_void: set = field(default_factory=set)
    _token: int = 0

    def alloc_seq(self) -> int:
        seq = self.next_seq
        self.next_seq += 1
        return seq

    def alloc_token(self) -> int:
        self._token += 1
        return self._token

    def route_for(self, src: int, dst: int, now: float):
        """Forwarding-table lookup; expired entries are invisible."""
        entry = self.fwd_table.get((src, dst))
        if entry is None or now >= entry.expiry:
            return None
        return entry


def _pack_neighbors(neighbors) -> tuple:
    ids = np.array(sorted(neighbors), dtype=np.int64)
    xs = np.empty(len(ids))
    ys = np.empty(len(ids))
    for i, nid in enumerate(ids):
        pos = neighbors[int(nid)]
        xs[i] = pos[0]
        ys[i] = pos[1]
    return ids, xs, ys


def _pack_exclude(exclude) -> np.ndarray:
    if not exclude:
        return kernels.EMPTY_IDS
    return np.array(sorted(exclude), dtype=np.int64)


def _as_xy(p) -> tuple[float, float]:
    if isinstance(p, Point2D):
        return (p.x, p.y)
    return (float(p[0]), float(p[1]))


def select_best_forwarder(cur_id, cur_pos, neighbors, dest_id, dest_pos,
                          rp: RadioParams, exclude=frozenset()) -> Optional[int]:
    """Power-ranked forwarder choice; ``neighbors`` maps id -> position.

    The destination wins outright whenever it appears in the neighbor
    list.  Returns None when no neighbor makes strict progress (a routing
    hole), ties break toward the smaller id.
    """
    if dest_id in neighbors:
        return dest_id
    ids, xs, ys = _pack_neighbors(neighbors)
    cx, cy = _as_xy(cur_pos)
    dx, dy = _as_xy(dest_pos)
    got = int(kernels.pick_forwarder_power(
        ids, xs, ys, cx, cy, dx, dy, rp.friis_factor, _pack_exclude(exclude)))
    return None if got == NO_NODE else got


def por_select_forwarder(cur_id, cur_pos, neighbors, dest_id, dest_pos,
                         exclude=frozenset()) -> Optional[int]:
    """Greedy-distance forwarder choice for the baseline protocol."""
    if dest_id in neighbors:
        return dest_id
    ids, xs, ys = _pack_neighbors(neighbors)
    cx, cy = _as_xy(cur_pos)
    dx, dy = _as_xy(dest_pos)
    got = int(kernels.pick_forwarder_nearest_dest(
        ids, xs, ys, cx, cy, dx, dy, _pack_exclude(exclude)))
    return None if got == NO_NODE else got


def select_candidates(cur_pos, forwarder_id, forwarder_pos, neighbors,
                      dest_pos, rp: RadioParams) -> list[int]:
    """Up to two backups near the forwarder, strongest reception first."""
    ids, xs, ys = _pack_neighbors(neighbors)
    cx, cy = _as_xy(cur_pos)
    fx, fy = _as_xy(forwarder_pos)
    dx, dy = _as_xy(dest_pos)
    c1, c2 = kernels.pick_candidates(
        ids, xs, ys, cx, cy, fx, fy, int(forwarder_id), dx, dy,
        rp.range_m, rp.friis_factor)
    out = []
    if int(c1) != NO_NODE:
        out.append(int(c1))
    if int(c2) != NO_NODE:
        out.append(int(c2))
    return out


# Event-driven handlers below run inside the simulation loop. ``sim`` is
# the owning engine.Simulation, which holds clocks, the medium and all
# NodeState instances; handlers never touch other nodes' state directly.


def originate(sim, node: NodeState, dst_id: int, now: float) -> None:
    """Build and broadcast a fresh packet at its source."""
    if not 0 <= dst_id < sim.n_nodes:
        raise ValueError(f"unknown destination id {dst_id}")
    seq = node.alloc_seq()
    key = (node.id, seq)
    node.seen.add(key)
    seed_pkt = DataPacket(
        header=PacketHeader(seq=seq, src=node.id, dst=dst_id, forwarder=node.id,
                            sent_at=now),
        size_bytes=sim.cfg.packet_bytes,
        created_at=now,
        dest_pos=sim.true_position(dst_id),
    )
    if not forward_data(sim, node, seed_pkt, now, trace_ev="SEND"):
        holes.detect_void(sim, node, seed_pkt, now)


def forward_data(sim, node: NodeState, base_pkt: DataPacket, now: float, *,
                 trace_ev: str = "FWD", exclude=frozenset(),
                 reroute: bool = False) -> bool:
    """Select the next hop for ``base_pkt`` and put it on the air.

    ``base_pkt`` is the copy this node received (for the source, a
    zero-hop seed).  Returns False without transmitting when no eligible
    forwarder exists; the caller decides whether that is a routing hole.
    """
    header = base_pkt.header
    ids, xs, ys = sim.neighbor_arrays(node.id)
    cx, cy = sim.true_position(node.id)
    dstx, dsty = base_pkt.dest_pos
    rp = sim.radio
    excl = _pack_exclude(exclude)

    if ids.size and (ids == header.dst).any():
        fwd = header.dst
    elif sim.protocol_name == "por":
        fwd = int(kernels.pick_forwarder_nearest_dest(
            ids, xs, ys, cx, cy, dstx, dsty, excl))
    else:
        fwd = int(kernels.pick_forwarder_power(
            ids, xs, ys, cx, cy, dstx, dsty, rp.friis_factor, excl))
    if fwd == NO_NODE:
        return False

    cand1 = cand2 = None
    if fwd != header.dst and not reroute:
        idx = int(np.searchsorted(ids, fwd))
        c1, c2 = kernels.pick_candidates(
            ids, xs, ys, cx, cy, xs[idx], ys[idx], fwd, dstx, dsty,
            rp.range_m, rp.friis_factor)
        cand1 = None if int(c1) == NO_NODE else int(c1)
        cand2 = None if int(c2) == NO_NODE else int(c2)

    new_header = PacketHeader(seq=header.seq, src=header.src, dst=header.dst,
                              forwarder=fwd, cand1=cand1, cand2=cand2,
                              sent_at=now)
    expiry = now + sim.cfg.t_table
    cands = tuple(c for c in (cand1, cand2) if c is not None)
    node.fwd_table[(header.src, header.dst)] = ForwardingTableEntry(
        next_hop=fwd, candidates=cands, expiry=expiry)
    sim.schedule_table_expiry(node.id, (header.src, header.dst), expiry)
    node.pkt_cache[base_pkt.key] = _CachedForward(pkt=base_pkt, expiry=expiry)

    out = replace(
        base_pkt,
        header=new_header,
        hops=base_pkt.hops + 1,
        prev_hop=node.id,
        ack_to=node.id if reroute else base_pkt.ack_to,
        rerouted=base_pkt.rerouted or reroute,
        tx_path=base_pkt.tx_path + ((node.id, cx, cy, now),),
    )
    sim.trace(trace_ev, node=node.id, pkt=out, reroute=reroute)
    sim.broadcast(node.id, out, now)
    return True


def on_receive(sim, node: NodeState, pkt: DataPacket, now: float) -> None:
    """Dispatch one delivered data frame according to this node's role."""
    key = pkt.key
    header = pkt.header

    # A cached candidate copy plus any later copy of the same packet means
    # some forwarder already acted: suppress ourselves.
    if key in node.cand_cache:
        del node.cand_cache[key]
        sim.trace("SUPPRESS", node=node.id, pkt=pkt)
        return

    if key in node.seen:
        if node.id in (header.dst, header.forwarder, header.cand1, header.cand2):
            sim.trace("DROP", node=node.id, pkt=pkt)
        return

    if node.id == header.dst:
        node.seen.add(key)
        sim.trace("RECV", node=node.id, pkt=pkt)
        if pkt.ack_to is not None and pkt.ack_to != node.id:
            sim.trace("ACK", node=node.id, pkt=pkt)
            sim.broadcast(node.id, ControlFrame(
                kind="ACK", sender=node.id, addressee=pkt.ack_to, key=key,
                size_bytes=sim.cfg.control_bytes), now)
        return

    if node.id == header.forwarder:
        node.seen.add(key)
        exclude = node.void_exclude.get(key, frozenset())
        if not forward_data(sim, node, pkt, now, exclude=exclude):
            holes.detect_void(sim, node, pkt, now)
        return

    if node.id == header.cand1 or node.id == header.cand2:
        rank = 1 if node.id == header.cand1 else 2
        node.seen.add(key)
        token = node.alloc_token()
        node.cand_cache[key] = _CandidateHold(pkt=pkt, token=token, rank=rank)
        fire_at = max(now, header.sent_at + rank * sim.cfg.t_threshold)
        sim.schedule_candidate_timer(node.id, key, token, fire_at)
        return

    # bystander: not addressed, nothing cached, no state change


def on_candidate_timeout(sim, node: NodeState, key, token: int, now: float) -> None:
    """The forwarder stayed silent past our rank's deadline: take over."""
    hold = node.cand_cache.get(key)
    if hold is None or hold.token != token:
        return  # suppressed in the meantime
    del node.cand_cache[key]
    if not forward_data(sim, node, hold.pkt, now):
        holes.detect_void(sim, node, hold.pkt, now)
