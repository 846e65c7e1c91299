"""Experiment driver: sweeps (protocol, speed, seed) and emits CSV rows.

Runs execute sequentially in sorted order, so the same configuration
always yields the same CSV bytes.  Traces, when requested, go to one file
per run.
"""

from pathlib import Path

from .config import ScenarioConfig
from .engine import Simulation
from .metrics import CSV_HEADER, csv_row


def run_single(cfg: ScenarioConfig, protocol_name: str, speed: float, seed: int,
               *, trace_path=None, positions=None, flows=None,
               failed_nodes=()) -> Simulation:
    """Run one simulation to completion and return it (metrics included)."""
    listeners = []
    fh = None
    if trace_path is not None:
        fh = open(trace_path, "w")
        listeners.append(lambda rec: fh.write(rec.line() + "\n"))
    try:
        sim = Simulation(cfg, protocol_name, speed, seed, positions=positions,
                         flows=flows, failed_nodes=failed_nodes,
                         listeners=listeners)
        sim.run()
    finally:
        if fh is not None:
            fh.close()
    return sim


def trace_path_for(template, protocol: str, speed: float, seed: int,
                   multi_run: bool):
    """Resolve the per-run trace path.

    Templates may use {protocol}, {speed} and {seed} placeholders.  A
    plain path is used as-is for a single run; for sweeps a run suffix is
    inserted before the extension so runs never clobber each other.
    """
    if template is None:
        return None
    text = str(template)
    if "{" in text:
        return text.format(protocol=protocol, speed=f"{speed:g}", seed=seed)
    if not multi_run:
        return text
    p = Path(text)
    return str(p.with_name(f"{p.stem}-{protocol}-v{speed:g}-s{seed}{p.suffix}"))


def run_experiment(cfg: ScenarioConfig, trace_template=None) -> str:
    """Run every (protocol, speed, seed) cell; returns the full CSV text."""
    combos = [(p, v, s)
              for p in sorted(cfg.protocols)
              for v in sorted(cfg.speeds)
              for s in sorted(cfg.seeds)]
    multi = len(combos) > 1
    lines = [CSV_HEADER]
    for protocol_name, speed, seed in combos:
        trace = trace_path_for(trace_template, protocol_name, speed, seed, multi)
        sim = run_single(cfg, protocol_name, speed, seed, trace_path=trace)
        lines.append(csv_row(protocol_name, seed, speed, cfg.nodes, sim.metrics))
    return "\n".join(lines) + "\n"
