"""Delay-and-sum backprojection on the image grid."""

from __future__ import annotations

import numpy as np

from .core import RingGeometry, SimConfig, pixel_centers


def _backproject(data: np.ndarray, positions: np.ndarray, config: SimConfig) -> np.ndarray:
    S, T = data.shape
    xs, ys = pixel_centers(config)
    X, Y = np.meshgrid(xs, ys)
    img = np.zeros(X.shape)
    for j in range(S):  # fixed channel order per pixel
        r = np.hypot(X - positions[j, 0], Y - positions[j, 1])
        tau = r / config.sound_speed * config.sample_rate
        i0 = np.floor(tau).astype(np.int64)
        frac = tau - i0
        trace = np.concatenate([data[j], [0.0, 0.0]])  # zero beyond T - 1
        valid = (i0 >= 0) & (i0 <= T - 1)
        i0c = np.clip(i0, 0, T)
        vals = (1 - frac) * trace[i0c] + frac * trace[i0c + 1]
        img += np.where(valid, vals, 0.0)
    return img


def integrate_traces(data: np.ndarray) -> np.ndarray:
    """Running sum along time, centered on each sample.

    Inverts the central-difference emission wavelet, so a source backprojects to
    a peak instead of a zero crossing.
    """
    return np.cumsum(data, axis=-1) - 0.5 * data


def _finish(img: np.ndarray, clamp: bool, normalize: bool) -> np.ndarray:
    if clamp:
        img = np.maximum(img, 0.0)
    if normalize:
        peak = img.max()
        if peak > 0:
            img = img / peak
    return img


def das_reconstruct(signals, geometry: RingGeometry, config: SimConfig,
                    clamp: bool = True, normalize: bool = True,
                    integrate: bool = True) -> np.ndarray:
    data = np.asarray(getattr(signals, "data", signals), dtype=np.float64)
    if data.shape[0] != geometry.n_sensors:
        raise ValueError(
            f"signal has {data.shape[0]} channels but geometry has {geometry.n_sensors} sensors")
    if integrate:
        data = integrate_traces(data)
    return _finish(_backproject(data, geometry.positions, config), clamp, normalize)


def group_center_positions(geometry: RingGeometry, group_size: int) -> np.ndarray:
    """Position on the ring midway between the first and last sensor of each group."""
    n = geometry.n_sensors
    radius = np.linalg.norm(geometry.positions[0])
    idx = np.arange(0, n, group_size) + (group_size - 1) / 2
    theta = 2 * np.pi * idx / n
    return np.stack([radius * np.cos(theta), radius * np.sin(theta)], axis=1)


def das_on_composites(composites, geometry: RingGeometry, config: SimConfig,
                      clamp: bool = True, normalize: bool = True,
                      integrate: bool = True) -> np.ndarray:
    """Backproject each composite as if a single sensor at its group center recorded it.

    This is the naive route that cannot localize sources; it exists for comparison.
    """
    data = np.asarray(getattr(composites, "data", composites), dtype=np.float64)
    pos = group_center_positions(geometry, config.group_size)
    if data.shape[0] != len(pos):
        raise ValueError(f"expected {len(pos)} composites, got {data.shape[0]}")
    if integrate:
        data = integrate_traces(data)
    return _finish(_backproject(data, pos, config), clamp, normalize)
