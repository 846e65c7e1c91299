"""Run counters and the evaluation metrics derived from them.

Counting rules (control frames never count):
  - source_sends: data packets broadcast by their source, first
    transmission only.  An origination that finds no forwarder at all
    never hits the air and is counted as a routing failure instead.
  - forwards: every other data-packet broadcast, including candidate
    takeovers and reroute retransmissions; wasted transmissions of lost
    packets stay in the count.
  - hop counts and delays are recorded per delivered packet from the
    delivered copy itself: the number of transmissions along its own
    lineage and (receive time - origination time).

So source_sends + forwards always equals the number of SEND/FWD trace
lines, and delivered <= source_sends.
"""

from dataclasses import dataclass, field


class MetricsError(Exception):
    """A metric was requested that is undefined for the counters so far."""


@dataclass
class MetricsAccumulator:
    source_sends: int = 0
    forwards: int = 0
    delivered: int = 0
    routing_failures: int = 0
    hop_counts: list = field(default_factory=list)
    delays: list = field(default_factory=list)

    def observe(self, rec) -> None:
        """Update counters from one trace record (see engine.TraceRecord)."""
        if rec.ev == "SEND":
            self.source_sends += 1
        elif rec.ev == "FWD":
            self.forwards += 1
        elif rec.ev == "RECV":
            self.delivered += 1
            self.hop_counts.append(rec.packet.hops)
            self.delays.append(rec.t - rec.packet.created_at)
        if rec.failure:
            self.routing_failures += 1

    @property
    def transmissions(self) -> int:
        return self.source_sends + self.forwards

    def pdr(self) -> float:
        """Delivered fraction of the data packets sources put on the air."""
        if self.source_sends == 0:
            raise MetricsError("no packets sent; delivery ratio undefined")
        return self.delivered / self.source_sends

    def fth(self) -> float:
        """Transmissions per delivered hop: total sends over summed hop counts."""
        total_hops = sum(self.hop_counts)
        if total_hops == 0:
            raise MetricsError("no deliveries; per-hop forwarding cost undefined")
        return self.transmissions / total_hops

    def ftp(self) -> float:
        """Transmissions per delivered packet."""
        if self.delivered == 0:
            raise MetricsError("no deliveries; per-packet forwarding cost undefined")
        return self.transmissions / self.delivered

    def avg_path_length(self) -> float:
        """Mean hop count over delivered packets."""
        if self.delivered == 0:
            raise MetricsError("no deliveries; path length undefined")
        return sum(self.hop_counts) / len(self.hop_counts)

    def avg_e2e_delay(self) -> float:
        """Mean origination-to-delivery latency, seconds."""
        if self.delivered == 0:
            raise MetricsError("no deliveries; delay undefined")
        return sum(self.delays) / len(self.delays)


CSV_HEADER = "protocol,seed,speed,nodes,pdr,fth,ftp,path_len,delay_s"


def _fmt(value) -> str:
    return "nan" if value is None else f"{value:.6f}"


def csv_row(protocol: str, seed: int, speed: float, nodes: int,
            m: MetricsAccumulator) -> str:
    """One result line; undefined metrics render as nan so sweeps with dead
    cells still produce a complete table."""

    def metric(fn):
        try:
            return fn()
        except MetricsError:
            return None

    return ",".join([
        protocol,
        str(seed),
        f"{speed:g}",
        str(nodes),
        _fmt(metric(m.pdr)),
        _fmt(metric(m.fth)),
        _fmt(metric(m.ftp)),
        _fmt(metric(m.avg_path_length)),
        _fmt(metric(m.avg_e2e_delay)),
    ])
