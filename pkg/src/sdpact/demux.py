"""Recovery of the four composites from the single combined record."""

from __future__ import annotations

import numpy as np

from .delayline import DelaySchedule, mux
from .frontend import CompositeSignals


def default_window_len(schedule: DelaySchedule, sample_rate: float, samples_per_channel: int) -> int:
    """Smallest inter-window spacing in samples, capped at the channel length."""
    off = schedule.offsets(sample_rate)
    return int(min(np.diff(off).min(), samples_per_channel))


def demux(record, window_len: int, group_size: int = 30) -> CompositeSignals:
    """Slice the record at each input's offset and shift the slice back to t = 0.

    A window that would run into the next input's start is cut there; the
    number of dropped samples per window is reported in ``truncated``.
    """
    if record.schedule is None:
        raise ValueError("record carries no delay schedule; cannot demultiplex")
    if window_len < 1:
        raise ValueError("window_len must be >= 1")
    data = np.asarray(record.data)
    off = np.asarray(record.offsets)
    L = len(data)
    if L < off[-1] + 1:
        raise ValueError(f"record of {L} samples is shorter than the last offset {off[-1]}")
    out = np.zeros((4, window_len))
    truncated = []
    for k in range(4):
        n = min(window_len, L - off[k])
        limit = n
        if k < 3:
            limit = min(n, off[k + 1] - off[k])
        truncated.append(int(n - limit))
        out[k, :limit] = data[off[k]:off[k] + limit] / record.schedule.gains[k]
    return CompositeSignals(out, record.sample_rate, group_size, tuple(truncated))


def roundtrip_error(composites: CompositeSignals, schedule: DelaySchedule, window_len: int) -> float:
    """Relative L2 error of demux(mux(x)) against x cut to window_len samples."""
    rec = demux(mux(composites, schedule), window_len, composites.group_size).data
    ref = np.zeros((4, window_len))
    n = min(window_len, composites.n_samples)
    ref[:, :n] = composites.data[:, :n]
    norm = np.linalg.norm(ref)
    if norm == 0:
        return 0.0 if np.linalg.norm(rec) == 0 else float("inf")
    return float(np.linalg.norm(rec - ref) / norm)


def pad_to(composites: CompositeSignals, n_samples: int) -> CompositeSignals:
    """Zero-pad (or cut) each composite to n_samples, as the reconstruction stage expects."""
    out = np.zeros((composites.n_groups, n_samples))
    n = min(n_samples, composites.n_samples)
    out[:, :n] = composites.data[:, :n]
    return CompositeSignals(out, composites.sample_rate, composites.group_size,
                            composites.truncated)
