"""Timing report: modeled acquisition times plus measured processing times."""

from __future__ import annotations

import time

import numpy as np

from .core import SimConfig, geometry_for, sample_random_phantom
from .das import das_on_composites, das_reconstruct
from .delayline import DelaySchedule, mux, built_schedule
from .demux import default_window_len, demux
from .forward import simulate_channels
from .frontend import superimpose

# Hardware numbers reported for the built system (GPU inference) and for a
# conventional one-transducer scan; shown next to ours, never compared.
REFERENCE_TIMES_S = {
    "proposed_acquisition": 2.35e-3,
    "proposed_processing": 28e-3,
    "proposed_total": 30.35e-3,
    "conventional_acquisition": 261.6,
    "conventional_processing": 159e-3,
    "conventional_total": 261.759,
}


def record_duration(schedule: DelaySchedule, config: SimConfig) -> float:
    """Length of one combined record: last delay plus one channel window."""
    return schedule.delays[-1] + config.samples_per_channel / config.sample_rate


def scan_duration(config: SimConfig, rep_rate_hz: float) -> float:
    """A single transducer stepped over every ring position, one laser shot each."""
    if rep_rate_hz <= 0:
        raise ValueError("laser repetition rate must be positive")
    return config.n_sensors / rep_rate_hz


def _best_time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(config: SimConfig | None = None, model=None, schedule: DelaySchedule | None = None,
          rep_rate_hz: float = 10.0, repeats: int = 3, seed: int = 0) -> dict:
    config = config or SimConfig()
    schedule = schedule or built_schedule()
    geom = geometry_for(config)
    signals = simulate_channels(sample_random_phantom(seed, config), geom, config)
    comps = superimpose(signals, config.group_size)
    record = mux(comps, schedule)
    window = default_window_len(schedule, config.sample_rate, config.samples_per_channel)

    measured = {
        "demux": _best_time(lambda: demux(record, window, config.group_size), repeats),
        "das_full": _best_time(lambda: das_reconstruct(signals, geom, config), repeats),
        "das_composite": _best_time(lambda: das_on_composites(comps, geom, config), repeats),
        "nn_inference": None,
    }
    if model is not None:
        model.eval()
        x = comps.data
        if x.shape[1] != model.config.input_length:
            x = np.zeros((x.shape[0], model.config.input_length))
        measured["nn_inference"] = _best_time(lambda: model.forward(x), repeats)

    return {
        "record_duration_s": record_duration(schedule, config),
        "record_samples": int(len(record.data)),
        "scan": {"positions": config.n_sensors, "rep_rate_hz": rep_rate_hz,
                 "duration_s": scan_duration(config, rep_rate_hz)},
        "measured_s": measured,
        "reference_s": dict(REFERENCE_TIMES_S),
        "notes": "reference_s values are hardware-specific and shown for comparison only",
    }
