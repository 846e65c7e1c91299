"""Deterministic MANET simulator for opportunistic geographic routing.

Implements the link-stability (reception power) forwarder-selection
protocol ``lpor`` with candidate takeover and routing-hole recovery, plus
the greedy-distance baseline ``por``, on a collision-free unit-disk
medium with random-waypoint mobility.
"""

from .accel import NUMBA_ENABLED
from .config import ConfigError, ScenarioConfig, parse_config, render_config
from .engine import CausalityError, Event, EventQueue, Simulation, TraceRecord
from .geometry import (Point2D, RadioParams, euclid_distance, friis_power,
                       in_range, positive_progress, two_ray_power)
from .metrics import CSV_HEADER, MetricsAccumulator, MetricsError, csv_row
from .mobility import MobilityState, WaypointField, init_positions
from .protocol import (ControlFrame, DataPacket, ForwardingTableEntry,
                       NodeState, PacketHeader, VoidRecord,
                       por_select_forwarder, select_best_forwarder,
                       select_candidates)
from .runner import run_experiment, run_single

__version__ = "0.1.0"

__all__ = [
    "CSV_HEADER", "CausalityError", "ConfigError", "ControlFrame",
    "DataPacket", "Event", "EventQueue", "ForwardingTableEntry",
    "MetricsAccumulator", "MetricsError", "MobilityState", "NUMBA_ENABLED",
    "NodeState", "PacketHeader", "Point2D", "RadioParams", "ScenarioConfig",
    "Simulation", "TraceRecord", "VoidRecord", "WaypointField", "csv_row",
    "euclid_distance", "friis_power", "in_range", "init_positions",
    "parse_config", "por_select_forwarder", "positive_progress",
    "render_config", "run_experiment", "run_single", "select_best_forwarder",
    "select_candidates", "two_ray_power",
]
