"""Distance, progress and reception-power primitives.

The reception-power laws double as the link metric for forwarder ranking:
with one shared radio configuration, higher received power means a shorter
link, so power-maximizing selection is also nearest-neighbor selection.
"""

import math
from dataclasses import dataclass

from . import kernels

SPEED_OF_LIGHT = 299_792_458.0  # m/s, used for propagation delay


@dataclass(frozen=True)
class Point2D:
    """A position in the simulation plane, metres."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"coordinates must be finite, got ({self.x}, {self.y})")

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class RadioParams:
    """Radio configuration shared by every node.

    tx_power_w        transmit power, watts
    tx_gain, rx_gain  dimensionless antenna gains
    wavelength_m      carrier wavelength (default 0.328 m, i.e. 914 MHz)
    system_loss       dimensionless loss factor, >= 1
    range_m           delivery radius of the unit-disk channel
    antenna_height_m  both antenna heights, used only by the two-ray model
    """

    tx_power_w: float = 0.28
    tx_gain: float = 1.0
    rx_gain: float = 1.0
    wavelength_m: float = 0.328
    system_loss: float = 1.0
    range_m: float = 225.0
    antenna_height_m: float = 1.5

    def __post_init__(self):
        for name in ("tx_power_w", "tx_gain", "rx_gain", "wavelength_m",
                     "range_m", "antenna_height_m"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.system_loss < 1.0:
            raise ValueError(f"system_loss must be >= 1, got {self.system_loss}")

    @property
    def friis_factor(self) -> float:
        """Pt*Gt*Gr*lambda^2/L; received power is this over (4*pi*d)^2."""
        return (self.tx_power_w * self.tx_gain * self.rx_gain
                * self.wavelength_m ** 2 / self.system_loss)

    @property
    def ground_factor(self) -> float:
        """Pt*Gt*Gr*(ht*hr)^2/L for the two-ray d^-4 regime."""
        h2 = self.antenna_height_m * self.antenna_height_m
        return (self.tx_power_w * self.tx_gain * self.rx_gain
                * h2 * h2 / self.system_loss)

    @property
    def crossover_m(self) -> float:
        """Distance where the two-ray model switches off the free-space law."""
        return (4.0 * math.pi * self.antenna_height_m * self.antenna_height_m
                / self.wavelength_m)


def euclid_distance(a: Point2D, b: Point2D) -> float:
    """Straight-line distance between two points, metres."""
    dx = a.x - b.x
    dy = a.y - b.y
    return math.sqrt(dx * dx + dy * dy)


def friis_power(rp: RadioParams, d: float) -> float:
    """Free-space received power at distance ``d`` (watts).

    Raises ValueError for d <= 0: co-located antennas have no defined
    path loss.
    """
    if d <= 0.0:
        raise ValueError(f"distance must be > 0, got {d}")
    return float(kernels.friis_power_k(rp.friis_factor, d))


def two_ray_power(rp: RadioParams, d: float) -> float:
    """Two-ray ground received power at distance ``d`` (watts).

    Below the crossover distance the free-space value applies; the two
    laws agree exactly at the crossover.
    """
    if d <= 0.0:
        raise ValueError(f"distance must be > 0, got {d}")
    return float(kernels.two_ray_power_k(
        rp.friis_factor, rp.ground_factor, rp.crossover_m, d))


def in_range(a: Point2D, b: Point2D, range_m: float) -> bool:
    """Unit-disk delivery gate. The boundary d == range_m counts as in range."""
    if range_m <= 0.0:
        raise ValueError(f"range must be > 0, got {range_m}")
    return euclid_distance(a, b) <= range_m


def positive_progress(n: Point2D, cur: Point2D, dest: Point2D) -> bool:
    """True when ``n`` is strictly closer to ``dest`` than ``cur`` is.

    Equal distance counts as no progress.
    """
    return euclid_distance(n, dest) < euclid_distance(cur, dest)
