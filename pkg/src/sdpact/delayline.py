"""Four-to-one acoustic delay-line multiplexer.

Input 1 reaches the adder directly; inputs 2-4 pass through delay units. A
delay unit may ring: the e-th echo of input k arrives at (2e + 1) times its
delay with amplitude echo_coeff**e.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .frontend import CompositeSignals

US = 1e-6
# overlaps shorter than this are float noise, not aliasing
_OVERLAP_TOL = 1e-12


@dataclass(frozen=True)
class DelaySchedule:
    delays: tuple[float, ...]
    gains: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0)
    echo_coeff: float = 0.0
    n_echoes: int = 1
    T: float | None = None
    b: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "delays", tuple(float(d) for d in self.delays))
        object.__setattr__(self, "gains", tuple(float(g) for g in self.gains))
        if len(self.delays) != 4 or len(self.gains) != 4:
            raise ValueError("a four-to-one schedule needs exactly 4 delays and 4 gains")
        if self.delays[0] != 0:
            raise ValueError("input 1 is connected directly; its delay must be 0")
        if any(b <= a for a, b in zip(self.delays, self.delays[1:])):
            raise ValueError(f"delays must be strictly increasing, got {self.delays}")
        if any(g <= 0 for g in self.gains):
            raise ValueError("gains must be positive")
        if not 0 <= self.echo_coeff < 1:
            raise ValueError("echo_coeff must lie in [0, 1)")
        if self.n_echoes < 0:
            raise ValueError("n_echoes must be non-negative")

    @property
    def has_echoes(self) -> bool:
        return self.echo_coeff > 0 and self.n_echoes > 0

    def echo_times(self, order: int = 1) -> tuple[float | None, ...]:
        """Arrival of the given echo order per input (None for the direct input)."""
        return (None,) + tuple((2 * order + 1) * d for d in self.delays[1:])

    def offsets(self, sample_rate: float) -> np.ndarray:
        """Delays rounded to whole samples."""
        return np.rint(np.asarray(self.delays) * sample_rate).astype(np.int64)

    def quantization_error(self, sample_rate: float) -> np.ndarray:
        """Residual (s) between the exact delays and their rounded sample offsets."""
        return np.asarray(self.delays) - self.offsets(sample_rate) / sample_rate

    def to_dict(self) -> dict:
        d = {"delays_us": [x / US for x in self.delays], "gains": list(self.gains),
             "echo_coeff": self.echo_coeff, "n_echoes": self.n_echoes}
        if self.T is not None:
            d["T_us"] = self.T / US
            d["b_us"] = self.b / US
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "DelaySchedule":
        if "T_us" in data:
            base = schedule_from_table1(data["T_us"] * US, data.get("b_us", 0.0) * US)
            delays, T, b = base.delays, base.T, base.b
        else:
            delays, T, b = [x * US for x in data["delays_us"]], None, None
        return cls(delays, tuple(data.get("gains", (1.0,) * 4)), data.get("echo_coeff", 0.0),
                   data.get("n_echoes", 1), T, b)


@dataclass(frozen=True)
class CombinedRecord:
    data: np.ndarray  # (L,)
    sample_rate: float
    schedule: DelaySchedule | None
    offsets: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.offsets is None and self.schedule is not None:
            object.__setattr__(self, "offsets", self.schedule.offsets(self.sample_rate))

    @property
    def duration(self) -> float:
        return len(self.data) / self.sample_rate


def schedule_from_table1(T: float, b: float, **kwargs) -> DelaySchedule:
    """Delays 0, 1.5T+b, 2.5T+b, 3.5T+b; first echoes fall at three times each delay."""
    if not T > 0:
        raise ValueError(f"delay period T must be positive, got {T}")
    if b < 0:
        raise ValueError(f"delay bias b must be non-negative, got {b}")
    return DelaySchedule((0.0, 1.5 * T + b, 2.5 * T + b, 3.5 * T + b), T=T, b=b, **kwargs)


def built_schedule(**kwargs) -> DelaySchedule:
    """The built hardware: delay units of 50, 100 and 150 us."""
    return DelaySchedule((0.0, 50 * US, 100 * US, 150 * US), **kwargs)


@dataclass(frozen=True)
class AliasReport:
    alias_free: bool
    overlapping_pairs: list  # (label_a, label_b, overlap seconds)

    def __bool__(self):
        return self.alias_free


def schedule_windows(schedule: DelaySchedule, duration: float) -> list[tuple[str, float, float]]:
    windows = [(f"input{k + 1}", d, d + duration) for k, d in enumerate(schedule.delays)]
    if schedule.has_echoes:
        for e in range(1, schedule.n_echoes + 1):
            for k, t in enumerate(schedule.echo_times(e)):
                if t is not None:
                    windows.append((f"echo{e}_input{k + 1}", t, t + duration))
    return windows


def check_alias_free(schedule: DelaySchedule, signal_duration: float) -> AliasReport:
    """Half-open windows [start, start + D) must be pairwise disjoint."""
    if not signal_duration > 0:
        raise ValueError("signal_duration must be positive")
    pairs = []
    for (na, sa, ea), (nb, sb, eb) in itertools.combinations(
            schedule_windows(schedule, signal_duration), 2):
        overlap = min(ea, eb) - max(sa, sb)
        if overlap > _OVERLAP_TOL:
            pairs.append((na, nb, overlap))
    return AliasReport(not pairs, pairs)


def mux(composites: CompositeSignals, schedule: DelaySchedule) -> CombinedRecord:
    x = composites.data
    if x.shape[0] != 4:
        raise ValueError(f"the delay line takes exactly 4 inputs, got {x.shape[0]}")
    T = x.shape[1]
    off = schedule.offsets(composites.sample_rate)
    g = schedule.gains
    terms = [(k, int(off[k]), g[k]) for k in range(4)]
    if schedule.has_echoes:
        for e in range(1, schedule.n_echoes + 1):
            for k in range(1, 4):
                terms.append((k, (2 * e + 1) * int(off[k]), g[k] * schedule.echo_coeff ** e))
    L = max(start for _, start, _ in terms) + T
    out = np.zeros(L)
    for k, start, amp in terms:
        out[start:start + T] += amp * x[k]
    return CombinedRecord(out, composites.sample_rate, schedule, off)
