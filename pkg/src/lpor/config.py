"""Scenario configuration: defaults, key-value file parsing and rendering.

The file format is one ``key = value`` pair per line; ``#`` starts a
comment and blank lines are ignored.  Every parameter has a default
matching the reference evaluation setup (160 nodes on 800x800 m, 225 m
range, 0.28 W transmitters, 200 s runs), so an empty file is a valid
complete scenario.  List-valued keys (speed, seed, protocol) take
comma-separated values.
"""

from dataclasses import dataclass, fields, replace

from .geometry import RadioParams


class ConfigError(Exception):
    """Bad key, malformed value or violated constraint, with line context."""


@dataclass(frozen=True)
class ScenarioConfig:
    nodes: int = 160
    area_w: float = 800.0
    area_h: float = 800.0
    range_m: float = 225.0
    speeds: tuple = (10.0, 30.0, 50.0, 100.0)
    sim_time: float = 200.0
    seeds: tuple = (1,)
    protocols: tuple = ("lpor", "por")
    tx_power_w: float = 0.28
    tx_gain: float = 1.0
    rx_gain: float = 1.0
    wavelength_m: float = 0.328
    system_loss: float = 1.0
    antenna_height_m: float = 1.5
    flows: int = 5
    rate_pps: float = 4.0
    packet_bytes: int = 512
    control_bytes: int = 64
    bandwidth_bps: float = 2_000_000.0
    t_threshold: float = 0.010
    t_table: float = 2.0
    beacon_interval: float = 1.0
    neighbor_hold: float = 2.0
    neighbor_mode: str = "oracle"
    drop_prob: float = 0.0
    traffic_start: float = 1.0
    pause_s: float = 0.0

    def __post_init__(self):
        _check(self.nodes >= 1, "nodes must be >= 1")
        _check(self.area_w > 0 and self.area_h > 0, "area must be positive")
        _check(self.range_m > 0, "range must be > 0")
        _check(len(self.speeds) > 0, "at least one speed is required")
        _check(all(s >= 0 for s in self.speeds), "speeds must be >= 0")
        _check(self.sim_time > 0, "sim_time must be > 0")
        _check(len(self.seeds) > 0, "at least one seed is required")
        _check(len(self.protocols) > 0, "at least one protocol is required")
        for p in self.protocols:
            _check(p in ("lpor", "por"), f"unknown protocol {p!r}")
        _check(len(set(self.protocols)) == len(self.protocols),
               "protocols must be distinct")
        _check(self.tx_power_w > 0, "tx_power must be > 0")
        _check(self.tx_gain > 0 and self.rx_gain > 0, "antenna gains must be > 0")
        _check(self.wavelength_m > 0, "wavelength must be > 0")
        _check(self.system_loss >= 1.0, "system_loss must be >= 1")
        _check(self.antenna_height_m > 0, "antenna_height must be > 0")
        _check(self.flows >= 0, "flows must be >= 0")
        _check(self.flows == 0 or self.nodes >= 2,
               "traffic needs at least two nodes")
        _check(self.rate_pps > 0, "rate must be > 0")
        _check(self.packet_bytes > 0 and self.control_bytes > 0,
               "frame sizes must be > 0")
        _check(self.bandwidth_bps > 0, "bandwidth must be > 0")
        _check(self.t_threshold > 0, "t_threshold must be > 0")
        _check(self.t_table > 0, "t_table must be > 0")
        _check(self.beacon_interval > 0, "beacon_interval must be > 0")
        _check(self.neighbor_hold > 0, "neighbor_hold must be > 0")
        _check(self.neighbor_mode in ("oracle", "beacon"),
               f"neighbor_mode must be oracle or beacon, got {self.neighbor_mode!r}")
        _check(0.0 <= self.drop_prob < 1.0, "drop_prob must be in [0, 1)")
        _check(self.traffic_start >= 0, "traffic_start must be >= 0")
        _check(self.pause_s >= 0, "pause must be >= 0")

    def radio(self) -> RadioParams:
        return RadioParams(
            tx_power_w=self.tx_power_w,
            tx_gain=self.tx_gain,
            rx_gain=self.rx_gain,
            wavelength_m=self.wavelength_m,
            system_loss=self.system_loss,
            range_m=self.range_m,
            antenna_height_m=self.antenna_height_m,
        )


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _parse_area(text: str):
    parts = text.lower().replace(" ", "").split("x")
    if len(parts) != 2:
        raise ValueError("expected WIDTHxHEIGHT")
    return float(parts[0]), float(parts[1])


def _parse_float_list(text: str) -> tuple:
    return tuple(float(v.strip()) for v in text.split(","))


def _parse_int_list(text: str) -> tuple:
    return tuple(int(v.strip()) for v in text.split(","))


def _parse_str_list(text: str) -> tuple:
    return tuple(v.strip() for v in text.split(","))


def _render_list(values) -> str:
    return ",".join(str(v) for v in values)


# file key -> (parse, render, config attribute(s))
_KEYS = {
    "nodes": (int, str, "nodes"),
    "area": (_parse_area, lambda c: f"{c[0]:g}x{c[1]:g}", ("area_w", "area_h")),
    "range": (float, repr, "range_m"),
    "speed": (_parse_float_list, _render_list, "speeds"),
    "sim_time": (float, repr, "sim_time"),
    "seed": (_parse_int_list, _render_list, "seeds"),
    "protocol": (_parse_str_list, _render_list, "protocols"),
    "tx_power": (float, repr, "tx_power_w"),
    "tx_gain": (float, repr, "tx_gain"),
    "rx_gain": (float, repr, "rx_gain"),
    "wavelength": (float, repr, "wavelength_m"),
    "system_loss": (float, repr, "system_loss"),
    "antenna_height": (float, repr, "antenna_height_m"),
    "flows": (int, str, "flows"),
    "rate": (float, repr, "rate_pps"),
    "packet_bytes": (int, str, "packet_bytes"),
    "control_bytes": (int, str, "control_bytes"),
    "bandwidth": (float, repr, "bandwidth_bps"),
    "t_threshold": (float, repr, "t_threshold"),
    "t_table": (float, repr, "t_table"),
    "beacon_interval": (float, repr, "beacon_interval"),
    "neighbor_hold": (float, repr, "neighbor_hold"),
    "neighbor_mode": (str, str, "neighbor_mode"),
    "drop_prob": (float, repr, "drop_prob"),
    "traffic_start": (float, repr, "traffic_start"),
    "pause": (float, repr, "pause_s"),
}


# scalar attributes that must be strictly positive, checked at parse time
# so the error can carry a line number
_POSITIVE_ATTRS = {
    "nodes", "range_m", "sim_time", "tx_power_w", "tx_gain", "rx_gain",
    "wavelength_m", "antenna_height_m", "rate_pps", "packet_bytes",
    "control_bytes", "bandwidth_bps", "t_threshold", "t_table",
    "beacon_interval", "neighbor_hold", "area_w", "area_h",
}


def _assign(updates: dict, key: str, raw: str, where: str) -> None:
    try:
        parse, _, attr = _KEYS[key]
    except KeyError:
        raise ConfigError(f"{where}: unknown key {key!r}") from None
    try:
        value = parse(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from None
    if isinstance(attr, tuple):
        for name, part in zip(attr, value):
            if name in _POSITIVE_ATTRS and not part > 0:
                raise ConfigError(f"{where}: {key} must be positive, got {raw!r}")
            updates[name] = part
    else:
        if attr in _POSITIVE_ATTRS and not value > 0:
            raise ConfigError(f"{where}: {key} must be positive, got {raw!r}")
        if attr == "speeds" and any(s < 0 for s in value):
            raise ConfigError(f"{where}: speeds must be >= 0, got {raw!r}")
        updates[attr] = value


def parse_config(text: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Parse key-value scenario text; unset keys keep their defaults."""
    updates: dict = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw_line!r}")
        key, _, raw = line.partition("=")
        _assign(updates, key.strip(), raw.strip(), f"line {lineno}")
    base = base if base is not None else ScenarioConfig()
    return replace(base, **updates)


def apply_overrides(cfg: ScenarioConfig, overrides: dict) -> ScenarioConfig:
    """Apply {file-key: raw-string} overrides, e.g. from command-line flags."""
    updates: dict = {}
    for key, raw in overrides.items():
        _assign(updates, key, raw, f"override --{key.replace('_', '-')}")
    return replace(cfg, **updates)


def render_config(cfg: ScenarioConfig) -> str:
    """Emit the full configuration; parse_config(render_config(c)) == c."""
    lines = []
    for key, (_, render, attr) in _KEYS.items():
        if isinstance(attr, tuple):
            value = render(tuple(getattr(cfg, a) for a in attr))
        else:
            value = render(getattr(cfg, attr))
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def config_field_names() -> list[str]:
    return [f.name for f in fields(ScenarioConfig)]
