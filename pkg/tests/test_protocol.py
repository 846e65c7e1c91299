import math

import numpy as np
import pytest

from lpor import (RadioParams, por_select_forwarder, select_best_forwarder,
                  select_candidates)
from lpor import protocol
from lpor.protocol import DataPacket, PacketHeader

from oracles import brute_candidates, brute_forwarder, random_scene
from simutil import ev_nodes, make_sim

RP = RadioParams()

# Forced-failure scenario: source, forwarder, two candidates, destination.
# The forwarder is the nearest progressing neighbor of the source; both
# candidates sit inside half range of it, between it and the source in
# destination distance, and within reach of the destination for takeover.
TAKEOVER_POSITIONS = [
    (0.0, 400.0),    # 0: source
    (100.0, 400.0),  # 1: best forwarder
    (95.0, 440.0),   # 2: candidate 1 (power rank just below the forwarder)
    (90.0, 325.0),   # 3: candidate 2
    (300.0, 400.0),  # 4: destination, out of the source's range
]


def run_takeover(failed):
    sim, rec = make_sim(TAKEOVER_POSITIONS, flows=[(0, 4)], failed=failed,
                        rate_pps=0.5, sim_time=1.5)
    sim.run()
    return sim, rec


def test_select_returns_destination_when_in_neighbor_list():
    neighbors = {3: (100.0, 0.0), 7: (50.0, 20.0)}
    assert select_best_forwarder(0, (0, 0), neighbors, 7, (50.0, 20.0), RP) == 7


def test_select_max_power_vs_greedy_distance():
    # same scene, different metric: power picks the near node, the
    # baseline picks the one closest to the destination
    neighbors = {1: (100.0, 0.0), 2: (200.0, 0.0), 3: (-50.0, 0.0)}
    assert select_best_forwarder(0, (0, 0), neighbors, 9, (500.0, 0.0), RP) == 1
    assert por_select_forwarder(0, (0, 0), neighbors, 9, (500.0, 0.0)) == 2


def test_select_no_progress_returns_none():
    neighbors = {1: (-50.0, 0.0), 2: (0.0, 600.0)}
    assert select_best_forwarder(0, (0, 0), neighbors, 9, (500.0, 0.0), RP) is None
    assert por_select_forwarder(0, (0, 0), neighbors, 9, (500.0, 0.0)) is None


def test_select_tie_breaks_to_smaller_id():
    neighbors = {9: (100.0, -50.0), 5: (100.0, 50.0)}  # mirror images
    assert select_best_forwarder(0, (0, 0), neighbors, 2, (500.0, 0.0), RP) == 5
    assert por_select_forwarder(0, (0, 0), neighbors, 2, (500.0, 0.0)) == 5


def test_select_honors_exclusions():
    neighbors = {1: (100.0, 0.0), 2: (150.0, 0.0)}
    pick = select_best_forwarder(0, (0, 0), neighbors, 9, (500.0, 0.0), RP,
                                 exclude={1})
    assert pick == 2
    assert select_best_forwarder(0, (0, 0), neighbors, 9, (500.0, 0.0), RP,
                                 exclude={1, 2}) is None


def test_candidates_worked_example():
    # forwarder at (100,0); (60,30) qualifies, (150,0) is nearer to the
    # destination than the forwarder and must be rejected
    neighbors = {0: (100.0, 0.0), 1: (60.0, 30.0), 2: (150.0, 0.0)}
    got = select_candidates((0.0, 0.0), 0, (100.0, 0.0), neighbors,
                            (500.0, 0.0), RP)
    assert got == [1]


def test_candidates_empty_when_only_forwarder_in_range():
    neighbors = {0: (100.0, 0.0)}
    assert select_candidates((0, 0), 0, (100.0, 0.0), neighbors,
                             (500.0, 0.0), RP) == []


def test_candidates_keep_two_strongest():
    neighbors = {
        0: (100.0, 0.0),   # the forwarder itself
        1: (60.0, 30.0),   # strongest qualifier
        2: (95.0, 40.0),
        3: (90.0, -75.0),  # weakest, must be cut
    }
    got = select_candidates((0, 0), 0, (100.0, 0.0), neighbors, (500.0, 0.0), RP)
    assert got == [1, 2]


def test_candidate_geometry_matches_brute_force():
    rng = np.random.default_rng(31)
    for _ in range(300):
        neighbors, cur, dest_id, dest = random_scene(rng, max_nodes=30)
        fwd = select_best_forwarder(-1, cur, neighbors, dest_id, dest, RP)
        if fwd is None or fwd == dest_id:
            continue
        got = select_candidates(cur, fwd, neighbors[fwd], neighbors, dest, RP)
        want, qualifying = brute_candidates(cur, fwd, neighbors[fwd],
                                            neighbors, dest, RP)
        assert got == want
        # every emitted candidate satisfies all four predicates
        ids = {nid for nid, _ in qualifying}
        assert all(c in ids for c in got)


def test_forwarder_matches_brute_force_oracle():
    rng = np.random.default_rng(17)
    for _ in range(300):
        neighbors, cur, dest_id, dest = random_scene(rng, max_nodes=30)
        assert select_best_forwarder(-1, cur, neighbors, dest_id, dest, RP) \
            == brute_forwarder(cur, neighbors, dest_id, dest, RP)
        assert por_select_forwarder(-1, cur, neighbors, dest_id, dest) \
            == brute_forwarder(cur, neighbors, dest_id, dest, RP,
                               metric="distance")


def test_power_selection_equals_nearest_progressing_neighbor():
    rng = np.random.default_rng(29)
    for _ in range(300):
        neighbors, cur, dest_id, dest = random_scene(rng, max_nodes=30)
        if dest_id in neighbors:
            continue
        pick = select_best_forwarder(-1, cur, neighbors, dest_id, dest, RP)
        progressing = {nid: pos for nid, pos in neighbors.items()
                       if math.dist(pos, dest) < math.dist(cur, dest)}
        if not progressing:
            assert pick is None
        else:
            nearest = min(progressing,
                          key=lambda nid: (math.dist(cur, progressing[nid]), nid))
            assert pick == nearest


def test_header_rejects_forwarder_among_candidates():
    with pytest.raises(ValueError):
        PacketHeader(seq=0, src=0, dst=1, forwarder=2, cand1=2)
    with pytest.raises(ValueError):
        PacketHeader(seq=0, src=0, dst=1, forwarder=2, cand1=3, cand2=3)


def test_one_hop_delivery_when_destination_in_range():
    sim, rec = make_sim([(0.0, 0.0), (100.0, 0.0)], flows=[(0, 1)],
                        rate_pps=0.5, sim_time=1.5)
    sim.run()
    sends = [r for r in rec if r.ev == "SEND"]
    assert len(sends) == 1
    h = sends[0].packet.header
    assert (h.src, h.dst, h.forwarder, h.cand1, h.cand2) == (0, 1, 1, None, None)
    assert h.sent_at == 1.0
    recvs = [r for r in rec if r.ev == "RECV"]
    assert len(recvs) == 1 and recvs[0].packet.hops == 1


def test_sequence_numbers_strictly_increase():
    sim, rec = make_sim([(0.0, 0.0), (100.0, 0.0)], flows=[(0, 1)],
                        rate_pps=4.0, sim_time=1.6)
    sim.run()
    seqs = [r.seq for r in rec if r.ev == "SEND"]
    assert len(seqs) >= 2
    assert all(b > a for a, b in zip(seqs, seqs[1:]))


def test_originate_rejects_unknown_destination():
    sim, _ = make_sim([(0.0, 0.0), (100.0, 0.0)])
    with pytest.raises(ValueError):
        protocol.originate(sim, sim.nodes[0], 99, 0.0)


def test_full_header_written_on_multihop_send():
    sim, rec = make_sim(TAKEOVER_POSITIONS, flows=[(0, 4)],
                        rate_pps=0.5, sim_time=1.5)
    sim.run()
    h = next(r for r in rec if r.ev == "SEND").packet.header
    assert (h.seq, h.src, h.dst, h.forwarder, h.cand1, h.cand2) \
        == (0, 0, 4, 1, 2, 3)


def test_normal_forward_suppresses_both_candidates():
    sim, rec = run_takeover(failed=frozenset())
    assert ev_nodes(rec, "FWD") == [("FWD", 1)]
    assert sorted(ev_nodes(rec, "SUPPRESS")) == [("SUPPRESS", 2), ("SUPPRESS", 3)]
    assert ev_nodes(rec, "RECV") == [("RECV", 4)]


def test_candidate_one_takes_over_silent_forwarder():
    sim, rec = run_takeover(failed={1})
    assert ev_nodes(rec, "SEND", "FWD", "SUPPRESS", "RECV") == [
        ("SEND", 0), ("FWD", 2), ("SUPPRESS", 3), ("RECV", 4)]
    fwd = next(r for r in rec if r.ev == "FWD")
    assert fwd.t == pytest.approx(1.0 + 0.010, abs=1e-12)  # rank-1 deadline
    assert fwd.packet.header.forwarder == 4  # destination now in range
    assert len([r for r in rec if r.ev == "RECV"]) == 1


def test_candidate_two_fires_at_rank_two_deadline():
    sim, rec = run_takeover(failed={1, 2})
    assert ev_nodes(rec, "SEND", "FWD", "RECV") == [
        ("SEND", 0), ("FWD", 3), ("RECV", 4)]
    fwd = next(r for r in rec if r.ev == "FWD")
    assert fwd.t == pytest.approx(1.0 + 0.020, abs=1e-12)
    assert not any(r.ev == "SUPPRESS" for r in rec)


def test_duplicate_key_is_dropped_not_reforwarded():
    sim, _ = make_sim(TAKEOVER_POSITIONS)
    node = sim.nodes[1]
    pkt = DataPacket(header=PacketHeader(seq=5, src=0, dst=4, forwarder=1,
                                         sent_at=0.0),
                     size_bytes=512, created_at=0.0, dest_pos=(300.0, 400.0),
                     hops=1, prev_hop=0)
    node.seen.add((0, 5))
    records = []
    sim.listeners.append(records.append)
    protocol.on_receive(sim, node, pkt, 0.01)
    assert [r.ev for r in records] == ["DROP"]
    assert len(sim.queue) == 0  # nothing rebroadcast, no timers


def test_candidate_caches_packet_and_arms_timer():
    sim, _ = make_sim(TAKEOVER_POSITIONS)
    node = sim.nodes[2]
    pkt = DataPacket(header=PacketHeader(seq=5, src=0, dst=4, forwarder=1,
                                         cand1=2, cand2=3, sent_at=0.5),
                     size_bytes=512, created_at=0.5, dest_pos=(300.0, 400.0),
                     hops=1, prev_hop=0)
    sim.now = 0.502
    protocol.on_receive(sim, node, pkt, 0.502)
    assert (0, 5) in node.cand_cache
    assert (0, 5) in node.seen
    assert len(sim.queue) == 1
    timer = sim.queue.pop()
    assert timer.time == pytest.approx(0.5 + 0.010, abs=1e-12)


def test_bystander_drops_silently_without_state_change():
    sim, rec = make_sim(TAKEOVER_POSITIONS)
    node = sim.nodes[3]
    pkt = DataPacket(header=PacketHeader(seq=5, src=0, dst=4, forwarder=1,
                                         cand1=2, sent_at=0.0),
                     size_bytes=512, created_at=0.0, dest_pos=(300.0, 400.0),
                     hops=1, prev_hop=0)
    protocol.on_receive(sim, node, pkt, 0.01)
    assert not node.seen and not node.cand_cache and len(sim.queue) == 0
    assert rec == []


def test_stale_timeout_token_is_ignored():
    sim, rec = make_sim(TAKEOVER_POSITIONS)
    protocol.on_candidate_timeout(sim, sim.nodes[2], (0, 5), token=99, now=0.5)
    assert rec == []


def test_destination_counts_each_packet_once():
    sim, rec = make_sim(TAKEOVER_POSITIONS)
    node = sim.nodes[4]
    pkt = DataPacket(header=PacketHeader(seq=5, src=0, dst=4, forwarder=4,
                                         sent_at=0.0),
                     size_bytes=512, created_at=0.0, dest_pos=(300.0, 400.0),
                     hops=1, prev_hop=0)
    protocol.on_receive(sim, node, pkt, 0.01)
    protocol.on_receive(sim, node, pkt, 0.02)
    assert [r.ev for r in rec] == ["RECV", "DROP"]
    assert sim.metrics.delivered == 1


def test_forwarding_table_entry_lifecycle():
    sim, rec = make_sim(TAKEOVER_POSITIONS, flows=[(0, 4)],
                        rate_pps=0.1, sim_time=1.5)
    sim.run()
    node = sim.nodes[0]
    entry = node.route_for(0, 4, now=1.5)
    assert entry is not None
    assert entry.next_hop == 1
    assert entry.candidates == (2, 3)
    assert entry.next_hop not in entry.candidates
    assert entry.expiry == pytest.approx(3.0)  # install time + hold
    assert node.route_for(0, 4, now=3.0) is None  # unreadable after expiry
    # the expiry event purges the entry once the clock passes it
    sim.run_until(3.5)
    assert (0, 4) not in node.fwd_table


def test_stale_beacon_neighbor_sends_into_the_void():
    # the neighbor table says the destination is close; the truth is that
    # it left range long ago, so the transmission counts but nobody hears
    sim, rec = make_sim([(0.0, 400.0), (600.0, 400.0)], flows=[(0, 1)],
                        rate_pps=0.5, sim_time=1.5, neighbor_mode="beacon",
                        beacon_interval=1e6, neighbor_hold=1e7)
    sim.nodes[0].neighbors[1] = (100.0, 400.0, 0.9)  # stale HELLO entry
    sim.run()
    assert ev_nodes(rec) == [("SEND", 0)]
    assert sim.metrics.source_sends == 1
    assert sim.metrics.delivered == 0


def test_beacons_populate_neighbor_tables():
    sim, _ = make_sim([(0.0, 400.0), (100.0, 400.0), (600.0, 400.0)],
                      neighbor_mode="beacon", sim_time=2.0)
    sim.run()
    assert set(sim.nodes[0].neighbors) == {1}  # node 2 is out of range
    x, y, heard = sim.nodes[0].neighbors[1]
    assert (x, y) == (100.0, 400.0)
    assert 0.0 <= heard <= 2.0
    assert set(sim.nodes[2].neighbors) == set()


def test_expired_beacon_entries_are_dropped_from_selection():
    sim, _ = make_sim([(0.0, 400.0), (100.0, 400.0)], neighbor_mode="beacon",
                      neighbor_hold=2.0)
    sim.nodes[0].neighbors[1] = (100.0, 400.0, 0.5)
    sim.now = 2.4  # heard 1.9s ago: still held
    ids, _, _ = sim.neighbor_arrays(0)
    assert list(ids) == [1]
    sim.now = 2.6  # heard 2.1s ago: stale
    ids, _, _ = sim.neighbor_arrays(0)
    assert list(ids) == []
    assert 1 not in sim.nodes[0].neighbors


def test_progress_monotone_along_delivered_static_path():
    # static chain: every recorded hop strictly approaches the destination
    positions = [(0.0, 400.0), (60.0, 410.0), (140.0, 380.0), (260.0, 400.0),
                 (390.0, 415.0), (500.0, 400.0)]
    sim, rec = make_sim(positions, flows=[(0, 5)], rate_pps=0.5, sim_time=1.5)
    sim.run()
    recvs = [r for r in rec if r.ev == "RECV"]
    assert len(recvs) == 1
    pkt = recvs[0].packet
    dx, dy = pkt.dest_pos
    dists = [math.hypot(x - dx, y - dy) for _, x, y, _ in pkt.tx_path]
    assert all(b < a for a, b in zip(dists, dists[1:]))
    assert pkt.hops == len(pkt.tx_path)
