"""The whole single-DAQ chain in one call: phantom in, image out."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Phantom, SimConfig, geometry_for
from .das import das_on_composites
from .delayline import CombinedRecord, DelaySchedule, mux, built_schedule
from .demux import default_window_len, demux, pad_to
from .forward import MultiChannelSignal, simulate_channels
from .frontend import CompositeSignals, superimpose


@dataclass
class ChainResult:
    image: np.ndarray
    signals: MultiChannelSignal
    composites: CompositeSignals
    record: CombinedRecord | None
    recovered: CompositeSignals  # what the reconstruction stage actually saw


def reconstruct_composites(composites: np.ndarray, config: SimConfig, model=None) -> np.ndarray:
    """NN inference if a model is given, otherwise the naive composite DAS."""
    if model is None:
        return das_on_composites(composites, geometry_for(config), config)
    model.eval()
    return model.forward(composites)


def end_to_end(phantom: Phantom, config: SimConfig, model=None,
               schedule: DelaySchedule | None = None, window_len: int | None = None,
               use_delay_line: bool = True) -> ChainResult:
    """simulate -> superimpose -> mux -> demux -> (NN | composite DAS).

    With ``use_delay_line=False`` the composites go straight to reconstruction;
    for an echo-free schedule and signals shorter than the window both routes
    give bit-identical images.
    """
    geom = geometry_for(config)
    signals = simulate_channels(phantom, geom, config)
    comps = superimpose(signals, config.group_size)
    record = None
    recovered = comps
    if use_delay_line:
        schedule = schedule or built_schedule()
        if window_len is None:
            window_len = default_window_len(schedule, config.sample_rate, config.samples_per_channel)
        record = mux(comps, schedule)
        recovered = pad_to(demux(record, window_len, config.group_size), config.samples_per_channel)
    image = reconstruct_composites(recovered.data, config, model)
    return ChainResult(image, signals, comps, record, recovered)
