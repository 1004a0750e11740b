"""Geometry, phantoms and the shared simulation configuration."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class SimConfig:
    """Acquisition and imaging parameters shared by every stage.

    Lengths in meters, times in seconds, frequencies in Hz.
    """

    sound_speed: float = 1500.0
    sample_rate: float = 40e6
    samples_per_channel: int = 2048
    n_sensors: int = 120
    ring_radius: float = 0.030
    roi_side: float = 0.0384
    grid_size: int = 128
    center_freq: float = 7.5e6
    fractional_bandwidth: float = 0.8
    group_size: int = 30
    # phantom sampling
    n_discs: int = 4
    min_disc_size: float = 0.75e-3
    max_disc_size: float = 2.25e-3
    size_is_radius: bool = True
    random_amplitude: bool = False

    def __post_init__(self):
        for name in ("sound_speed", "sample_rate", "samples_per_channel", "n_sensors",
                     "ring_radius", "roi_side", "grid_size", "center_freq",
                     "fractional_bandwidth", "group_size", "min_disc_size", "max_disc_size"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive, got {getattr(self, name)!r}")
        if self.n_sensors % self.group_size:
            raise ValueError(
                f"n_sensors ({self.n_sensors}) is not divisible by group_size ({self.group_size})")
        if self.roi_side * math.sqrt(2) / 2 >= self.ring_radius:
            raise ValueError("ROI square must be inscribed in the sensor ring")
        if self.min_disc_size > self.max_disc_size:
            raise ValueError("min_disc_size exceeds max_disc_size")
        if self.n_discs < 0:
            raise ValueError("n_discs must be non-negative")

    @property
    def pitch(self) -> float:
        return self.roi_side / self.grid_size

    @property
    def n_groups(self) -> int:
        return self.n_sensors // self.group_size

    @property
    def radius_range(self) -> tuple[float, float]:
        scale = 1.0 if self.size_is_radius else 0.5
        return self.min_disc_size * scale, self.max_disc_size * scale

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "SimConfig":
        with open(path) as f:
            data = json.load(f)
        return cls.from_dict(data.get("sim", data))

    @classmethod
    def desk(cls) -> "SimConfig":
        """Reduced configuration used for CPU training: 4x512 inputs, 64x64 images.

        The sample rate and transducer band are scaled down together so that
        512 samples still cover every time of flight in the ROI.
        """
        return cls(sample_rate=10e6, samples_per_channel=512, grid_size=64,
                   center_freq=2.0e6)


@dataclass(frozen=True)
class Disc:
    center_x: float
    center_y: float
    radius: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"disc radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class Phantom:
    discs: tuple[Disc, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "discs", tuple(self.discs))

    def __len__(self):
        return len(self.discs)

    def check_inside(self, roi_side: float) -> None:
        half = roi_side / 2
        for d in self.discs:
            if (abs(d.center_x) + d.radius > half + 1e-12
                    or abs(d.center_y) + d.radius > half + 1e-12):
                raise ValueError(f"disc {d} extends outside the {roi_side} m ROI")

    def rotated(self, angle: float) -> "Phantom":
        """Rotate all disc centers counterclockwise about the ring center."""
        c, s = math.cos(angle), math.sin(angle)
        return Phantom(tuple(
            Disc(c * d.center_x - s * d.center_y, s * d.center_x + c * d.center_y,
                 d.radius, d.amplitude)
            for d in self.discs))

    def to_array(self) -> np.ndarray:
        """(n, 4) array of [center_x, center_y, radius, amplitude]."""
        out = np.zeros((len(self.discs), 4))
        for i, d in enumerate(self.discs):
            out[i] = (d.center_x, d.center_y, d.radius, d.amplitude)
        return out

    @classmethod
    def from_array(cls, arr) -> "Phantom":
        arr = np.asarray(arr, dtype=np.float64).reshape(-1, 4)
        return cls(tuple(Disc(*map(float, row)) for row in arr))

    def to_dict(self) -> dict:
        return {"units": "m", "discs": [dataclasses.asdict(d) for d in self.discs]}

    @classmethod
    def from_dict(cls, data: dict) -> "Phantom":
        return cls(tuple(Disc(**d) for d in data.get("discs", [])))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path) -> "Phantom":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class RingGeometry:
    positions: np.ndarray  # (n_sensors, 2)

    @property
    def n_sensors(self) -> int:
        return len(self.positions)

    @property
    def angles(self) -> np.ndarray:
        return np.arctan2(self.positions[:, 1], self.positions[:, 0])


def build_ring_geometry(n_sensors: int, ring_radius: float) -> RingGeometry:
    if n_sensors < 1:
        raise ValueError("n_sensors must be >= 1")
    if not ring_radius > 0:
        raise ValueError("ring_radius must be positive")
    theta = 2 * np.pi * np.arange(n_sensors) / n_sensors
    pos = np.stack([ring_radius * np.cos(theta), ring_radius * np.sin(theta)], axis=1)
    return RingGeometry(pos)


def geometry_for(config: SimConfig) -> RingGeometry:
    return build_ring_geometry(config.n_sensors, config.ring_radius)


def sample_random_phantom(rng_seed, config: SimConfig) -> Phantom:
    """Random discs placed fully inside the ROI; a pure function of (seed, config)."""
    rng = np.random.default_rng(rng_seed)
    rmin, rmax = config.radius_range
    half = config.roi_side / 2
    discs = []
    for _ in range(config.n_discs):
        r = rng.uniform(rmin, rmax)
        cx, cy = rng.uniform(-half + r, half - r, size=2)
        amp = rng.uniform(0.5, 1.0) if config.random_amplitude else 1.0
        discs.append(Disc(float(cx), float(cy), float(r), float(amp)))
    return Phantom(tuple(discs))


def pixel_centers(config: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """x and y coordinates of pixel centers; pixel (0, 0) sits at the (-x, -y) corner."""
    n, p = config.grid_size, config.pitch
    coords = -config.roi_side / 2 + (np.arange(n) + 0.5) * p
    return coords, coords.copy()


def rasterize_phantom(phantom: Phantom, config: SimConfig) -> np.ndarray:
    """Paint discs on the image grid; image[row, col] with row indexing y, col indexing x."""
    xs, ys = pixel_centers(config)
    X, Y = np.meshgrid(xs, ys)
    img = np.zeros((config.grid_size, config.grid_size))
    for d in phantom.discs:  # later discs overwrite earlier ones
        inside = (X - d.center_x) ** 2 + (Y - d.center_y) ** 2 <= d.radius ** 2
        img[inside] = d.amplitude
    return img
