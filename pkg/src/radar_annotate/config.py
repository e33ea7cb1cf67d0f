"""Radar sensor configuration and derived bin grids.

The default profile reproduces the released sensor: 77 GHz carrier,
0.20 m range bins (256 samples covering 50 m), 0.42 m/s velocity bins
(64 chirps, max unambiguous speed 13.44 m/s), 8 virtual antennas
zero-padded to 256 angle bins spanning the forward half-plane.
"""

import math
from dataclasses import dataclass, asdict

from .errors import AngleOutOfRange, ValidationError

SPEED_OF_LIGHT = 2.998e8

# Effective processed bandwidth behind the 0.20 m bin grid. The hardware
# sweep is wider, but the released maps are gridded at 0.20 m x 256 bins.
DEFAULT_BANDWIDTH_HZ = SPEED_OF_LIGHT / (2.0 * 0.20)

DEFAULT_CARRIER_HZ = 77e9

# Frame duration that yields exactly 0.42 m/s velocity bins at 77 GHz.
DEFAULT_FRAME_PERIOD_S = SPEED_OF_LIGHT / (2.0 * DEFAULT_CARRIER_HZ * 0.42)


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass
class RadarConfig:
    """FMCW sensor parameters plus the grid conventions derived from them.

    ``azimuth_phase_factor`` scales the adjacent-antenna phase step
    ``2*pi*f_c*(factor*h*sin(alpha))/c``. The default 1.0 is the one-way
    relation for a half-wavelength array and keeps synthesized peaks on
    the angle grid below; 2.0 selects the round-trip form.
    """

    carrier_frequency_hz: float = DEFAULT_CARRIER_HZ
    bandwidth_hz: float = DEFAULT_BANDWIDTH_HZ
    sweep_period_s: float = DEFAULT_FRAME_PERIOD_S / 64
    chirps_per_frame: int = 64
    samples_per_chirp: int = 256
    num_rx_virtual: int = 8
    antenna_spacing_m: float | None = None
    frame_period_s: float = DEFAULT_FRAME_PERIOD_S
    num_angle_bins: int = 256
    max_range_m: float = 50.0
    speed_of_light_m_s: float = SPEED_OF_LIGHT
    azimuth_phase_factor: float = 1.0
    hann_window: bool = True

    def __post_init__(self):
        if self.antenna_spacing_m is None:
            self.antenna_spacing_m = self.wavelength_m / 2.0
        self.validate()

    # --- derived quantities ---

    @property
    def wavelength_m(self) -> float:
        return self.speed_of_light_m_s / self.carrier_frequency_hz

    @property
    def range_resolution_m(self) -> float:
        """Range bin size c/(2B)."""
        return self.speed_of_light_m_s / (2.0 * self.bandwidth_hz)

    @property
    def velocity_resolution_mps(self) -> float:
        """Velocity bin size c/(2 f_c T), inverse in the frame duration."""
        return self.speed_of_light_m_s / (2.0 * self.carrier_frequency_hz * self.frame_period_s)

    @property
    def max_unambiguous_speed_mps(self) -> float:
        """Largest radial speed before Doppler aliasing, half the bins' span."""
        return (self.chirps_per_frame / 2.0) * self.velocity_resolution_mps

    @property
    def chirp_interval_s(self) -> float:
        return self.frame_period_s / self.chirps_per_frame

    @property
    def sample_interval_s(self) -> float:
        return self.sweep_period_s / self.samples_per_chirp

    @property
    def doppler_center_bin(self) -> int:
        return self.chirps_per_frame // 2

    @property
    def angle_center_bin(self) -> int:
        return self.num_angle_bins // 2

    def angle_resolution_rad(self, azimuth_rad: float = 0.0) -> float:
        """Minimum separable azimuth c/(f_c N_rx h cos(alpha))."""
        cos_a = math.cos(azimuth_rad)
        if cos_a <= 0.0:
            raise AngleOutOfRange(f"azimuth {azimuth_rad:.4f} rad is at or beyond +-pi/2")
        return self.speed_of_light_m_s / (
            self.carrier_frequency_hz * self.num_rx_virtual * self.antenna_spacing_m * cos_a
        )

    # --- bin grids ---

    def range_bin_of(self, range_m: float) -> int:
        return int(math.floor(range_m / self.range_resolution_m))

    def range_of_bin(self, range_bin: int) -> float:
        """Bin-center range."""
        return (range_bin + 0.5) * self.range_resolution_m

    def doppler_bin_of(self, velocity_mps: float) -> int:
        """Signed velocity to Doppler bin; positive velocities (approaching)
        land above the center bin."""
        return self.doppler_center_bin + int(round(velocity_mps / self.velocity_resolution_mps))

    def velocity_of_doppler_bin(self, doppler_bin: int) -> float:
        return (doppler_bin - self.doppler_center_bin) * self.velocity_resolution_mps

    def sin_of_angle_bin(self, angle_bin: int) -> float:
        return (angle_bin - self.angle_center_bin) / self.angle_center_bin

    def angle_of_bin(self, angle_bin: int) -> float:
        return math.asin(self.sin_of_angle_bin(angle_bin))

    def angle_bin_of(self, azimuth_rad: float) -> int:
        return self.angle_center_bin + int(round(math.sin(azimuth_rad) * self.angle_center_bin))

    # --- validation / serialization ---

    def validate(self):
        positive = (
            "carrier_frequency_hz", "bandwidth_hz", "sweep_period_s",
            "antenna_spacing_m", "frame_period_s", "max_range_m",
            "speed_of_light_m_s", "azimuth_phase_factor",
        )
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be strictly positive")
        for name in ("chirps_per_frame", "samples_per_chirp", "num_angle_bins"):
            if not _is_power_of_two(getattr(self, name)):
                raise ValidationError(f"{name} must be a power of two")
        if self.num_rx_virtual < 1:
            raise ValidationError("num_rx_virtual must be >= 1")
        if self.max_range_m > self.samples_per_chirp * self.range_resolution_m + 1e-9:
            raise ValidationError(
                "max_range_m exceeds the range covered by samples_per_chirp bins"
            )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RadarConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown radar config fields: {sorted(unknown)}")
        return cls(**data)
