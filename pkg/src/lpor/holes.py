"""Recovery from communication voids.

When a forwarder finds nobody making progress toward the destination it
broadcasts a VOID naming itself back to the node it got the packet from.
That previous hop becomes the trigger: it retransmits the packet with the
void node (and any voids seen earlier for the same packet) excluded from
selection.  A trigger with no alternative left sends DISRUPT one hop
further upstream, which repeats the procedure there; a source that runs
out of neighbors counts the packet as a routing failure.  When a rerouted
packet reaches the destination, the destination answers the most recent
trigger with a single hop-level ACK.

The exclusion set per packet only grows, so reroute attempts at one
trigger are bounded by its neighbor count and an excluded node is never
written into the forwarder field again by that trigger.
"""


def detect_void(sim, node, pkt, now: float) -> None:
    """``node`` holds ``pkt`` but sees no forwarder: raise the alarm.

    A source with no forwarder has no upstream node to warn, so it acts
    as its own trigger and retries (then disrupts) locally.
    """
    from .protocol import ControlFrame  # deferred: protocol imports us

    key = pkt.key
    node.self_void.add(key)
    sim.trace("VOID", node=node.id, pkt=pkt)
    if pkt.prev_hop is None:
        reroute(sim, node, pkt, void_node=node.id, now=now)
    else:
        sim.broadcast(node.id, ControlFrame(
            kind="VOID", sender=node.id, addressee=pkt.prev_hop, key=key,
            size_bytes=sim.cfg.control_bytes), now)


def on_void_warning(sim, trigger, key, void_node: int, now: float) -> None:
    """A downstream forwarder reported a hole for a packet we sent it."""
    cached = trigger.pkt_cache.get(key)
    if cached is None:
        return  # unknown packet: stale or misdelivered warning
    if now >= cached.expiry:
        sim.trace("DROP", node=trigger.id, pkt=cached.pkt, failure=True)
        return
    reroute(sim, trigger, cached.pkt, void_node, now)


def on_disrupt(sim, node, key, sender: int, now: float) -> None:
    """The trigger below us gave up; treat it as void and reroute here."""
    cached = node.pkt_cache.get(key)
    if cached is None:
        return
    if now >= cached.expiry:
        sim.trace("DROP", node=node.id, pkt=cached.pkt, failure=True)
        return
    reroute(sim, node, cached.pkt, sender, now)


def on_ack(sim, node, key, now: float) -> None:
    """Delivery confirmation for a reroute this node triggered."""
    for rec in node.void_records.get(key, ()):
        if rec.state == "rerouting":
            rec.state = "acked"


def reroute(sim, trigger, base_pkt, void_node: int, now: float) -> None:
    """Retry ``base_pkt`` at ``trigger`` with all known voids excluded."""
    from . import protocol
    from .protocol import ControlFrame, VoidRecord

    key = base_pkt.key
    excl = trigger.void_exclude.setdefault(key, set())
    excl.add(void_node)
    rec = None
    if void_node != trigger.id:  # a source retrying for itself keeps no record
        rec = VoidRecord(trigger=trigger.id, void_node=void_node, pkt_key=key,
                         state="rerouting")
        trigger.void_records.setdefault(key, []).append(rec)

    sent = protocol.forward_data(sim, trigger, base_pkt, now,
                                 exclude=frozenset(excl), reroute=True)
    if sent:
        return
    if rec is not None:
        rec.state = "disrupted"
    prev = base_pkt.prev_hop
    if prev is None:
        sim.trace("DISRUPT", node=trigger.id, pkt=base_pkt, failure=True)
    else:
        sim.trace("DISRUPT", node=trigger.id, pkt=base_pkt)
        sim.broadcast(trigger.id, ControlFrame(
            kind="DISRUPT", sender=trigger.id, addressee=prev, key=key,
            size_bytes=sim.cfg.control_bytes), now)
