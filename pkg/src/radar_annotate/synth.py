"""IF-cube synthesis from point targets and 3D-FFT map processing.

The synthesis model is the standard FMCW point-scatterer response: each
target contributes a separable complex exponential whose per-sample,
per-chirp and per-antenna phase steps encode range, radial velocity and
azimuth. Velocities are signed positive toward the sensor, so an
approaching target lands in the upper (positive) half of the Doppler
axis after the shift to a centered zero-velocity bin.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .config import RadarConfig
from .errors import AmbiguousVelocity, DimensionMismatch, TargetOutOfRange
from .kernels import TWO_PI, accumulate_targets
from .scene import Scene


@dataclass
class RadarFrame:
    """One frame: raw data cube plus its processed magnitude maps.

    raw_cube is [antennas, chirps, samples] complex64; rd_map is
    [samples, chirps] float32 with zero velocity at the center column;
    ra_map is [samples, angle_bins] float32 with boresight at the center
    column.
    """

    frame_index: int
    timestamp_s: float
    raw_cube: np.ndarray | None = None
    rd_map: np.ndarray | None = None
    ra_map: np.ndarray | None = None


def _target_phases(x: float, y: float, velocity: float, config: RadarConfig):
    r = math.hypot(x, y)
    if r == 0.0:
        raise TargetOutOfRange("target at the sensor origin")
    if r > config.max_range_m:
        raise TargetOutOfRange(
            f"target at {r:.2f} m, beyond max range {config.max_range_m:.2f} m"
        )
    if abs(velocity) > config.max_unambiguous_speed_mps:
        warnings.warn(
            f"radial speed {velocity:.2f} m/s exceeds the unambiguous "
            f"{config.max_unambiguous_speed_mps:.2f} m/s and will alias",
            AmbiguousVelocity,
        )
    c = config.speed_of_light_m_s
    sin_az = x / r
    phase_samp = TWO_PI * 2.0 * config.bandwidth_hz * r / (c * config.samples_per_chirp)
    phase_chirp = TWO_PI * (2.0 * config.carrier_frequency_hz * velocity / c) * config.chirp_interval_s
    phase_ant = TWO_PI * config.carrier_frequency_hz * (
        config.azimuth_phase_factor * config.antenna_spacing_m * sin_az
    ) / c
    return phase_samp, phase_chirp, phase_ant


def synthesize_frame(scene: Scene, frame_index: int, config: RadarConfig,
                     noise_sigma: float = 0.0, rng_seed: int = 0) -> RadarFrame:
    """Synthesize the raw IF cube for one frame of a scene.

    Radial velocities come from consecutive trajectory points. Noise is
    i.i.d. circular complex Gaussian with total standard deviation
    ``noise_sigma`` per cube sample, drawn deterministically from
    ``rng_seed``.
    """
    shape = (config.num_rx_virtual, config.chirps_per_frame, config.samples_per_chirp)
    cube = np.zeros(shape, dtype=np.complex128)

    amps, p_samp, p_chirp, p_ant = [], [], [], []
    for obj in scene.objects:
        pos = obj.position(frame_index)
        if pos is None:
            continue
        v = obj.approach_velocity(frame_index, config.frame_period_s)
        ps, pc, pa = _target_phases(pos[0], pos[1], v, config)
        amps.append(obj.reflectivity_amplitude)
        p_samp.append(ps)
        p_chirp.append(pc)
        p_ant.append(pa)

    if amps:
        accumulate_targets(
            cube,
            np.asarray(amps, dtype=np.float64),
            np.asarray(p_samp, dtype=np.float64),
            np.asarray(p_chirp, dtype=np.float64),
            np.asarray(p_ant, dtype=np.float64),
        )
    if noise_sigma > 0.0:
        rng = np.random.default_rng(rng_seed)
        scale = noise_sigma / math.sqrt(2.0)
        cube += rng.normal(scale=scale, size=shape)
        cube += 1j * rng.normal(scale=scale, size=shape)

    return RadarFrame(
        frame_index=frame_index,
        timestamp_s=frame_index * config.frame_period_s,
        raw_cube=cube.astype(np.complex64),
    )


def process_cube(frame: RadarFrame, config: RadarConfig) -> RadarFrame:
    """Fill rd_map and ra_map from the raw cube via the 3D FFT.

    Range FFT along samples, Doppler FFT along chirps (shifted so zero
    velocity is the center column), angle FFT along antennas zero-padded
    to ``num_angle_bins`` (shifted so boresight is the center column).
    The Doppler map averages magnitudes over antennas, the angle map
    over chirps, keeping both maps real.
    """
    if frame.raw_cube is None:
        raise DimensionMismatch("frame has no raw cube")
    expected = (config.num_rx_virtual, config.chirps_per_frame, config.samples_per_chirp)
    if frame.raw_cube.shape != expected:
        raise DimensionMismatch(
            f"raw cube shape {frame.raw_cube.shape} does not match config {expected}"
        )

    cube = frame.raw_cube.astype(np.complex128)
    n_samp = config.samples_per_chirp
    n_chirp = config.chirps_per_frame
    if config.hann_window:
        w_range = np.hanning(n_samp)
        w_dopp = np.hanning(n_chirp)
    else:
        w_range = np.ones(n_samp)
        w_dopp = np.ones(n_chirp)

    range_fft = np.fft.fft(cube * w_range[None, None, :], axis=2)

    rd = np.fft.fft(range_fft * w_dopp[None, :, None], axis=1)
    rd = np.fft.fftshift(rd, axes=1)
    rd_map = np.abs(rd).mean(axis=0).T  # [samples, chirps]

    ra = np.fft.fft(range_fft, n=config.num_angle_bins, axis=0)
    ra = np.fft.fftshift(ra, axes=0)
    ra_map = np.abs(ra).mean(axis=1).T  # [samples, angle_bins]

    frame.rd_map = rd_map.astype(np.float32)
    frame.ra_map = ra_map.astype(np.float32)
    return frame
