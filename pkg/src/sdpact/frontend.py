"""Pre-amplified analog adder: 30 neighbouring channels summed into one composite."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .forward import MultiChannelSignal


@dataclass(frozen=True)
class CompositeSignals:
    data: np.ndarray  # (G, T)
    sample_rate: float
    group_size: int
    # samples dropped per window by demux when windows overlap; None when not demuxed
    truncated: tuple[int, ...] | None = None

    @property
    def n_groups(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]


def superimpose(signals: MultiChannelSignal, group_size: int = 30, gains=None) -> CompositeSignals:
    """composite[g] = sum of gains[i] * signals[i] over the contiguous block of group g."""
    data = np.asarray(signals.data, dtype=np.float64)
    S, T = data.shape
    if group_size < 1 or S % group_size:
        raise ValueError(
            f"cannot split {S} channels into groups of {group_size}: {S} is not divisible by it")
    if gains is not None:
        gains = np.asarray(gains, dtype=np.float64)
        if gains.shape != (S,):
            raise ValueError(f"expected {S} per-channel gains, got shape {gains.shape}")
        data = data * gains[:, None]
    G = S // group_size
    out = np.zeros((G, T))
    blocks = data.reshape(G, group_size, T)
    for i in range(group_size):  # fixed left-to-right summation order
        out += blocks[:, i, :]
    return CompositeSignals(out, signals.sample_rate, group_size)


def add_noise(signals: np.ndarray, snr_db: float, rng_seed) -> np.ndarray:
    """Add white Gaussian noise at the given SNR relative to the input RMS power.

    ``snr_db = inf`` disables noise and returns an unchanged copy.
    """
    x = np.asarray(signals, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("input contains non-finite values")
    if math.isinf(snr_db) and snr_db > 0:
        return x.copy()
    power = np.mean(x ** 2)
    if power == 0:
        raise ValueError("signal power is zero; SNR is undefined")
    noise_power = power / 10 ** (snr_db / 10)
    rng = np.random.default_rng(rng_seed)
    return x + rng.normal(0.0, math.sqrt(noise_power), size=x.shape)
