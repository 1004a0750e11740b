"""Synthetic dataset generation and on-disk layout.

A dataset directory holds ``manifest.json`` plus ``train/NNNNN.patd`` and
``test/NNNNN.patd``; each record file has the entries ``composites`` (4 x T),
``target`` (side x side), ``phantom`` (n x 4: x, y, radius, amplitude) and
``seed`` (scalar).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import tensorio
from .core import Phantom, SimConfig, geometry_for, rasterize_phantom, sample_random_phantom
from .das import das_reconstruct
from .forward import simulate_channels
from .frontend import superimpose

MODES = ("raster_target", "das_target")
SPLITS = {"train": 0, "test": 1}


@dataclass(frozen=True)
class DatasetRecord:
    composites: np.ndarray
    target: np.ndarray
    phantom: Phantom
    seed: int

    def to_table(self) -> dict[str, np.ndarray]:
        return {"composites": self.composites, "target": self.target,
                "phantom": self.phantom.to_array(), "seed": np.array(float(self.seed))}

    @classmethod
    def from_table(cls, t: dict[str, np.ndarray]) -> "DatasetRecord":
        return cls(t["composites"], t["target"], Phantom.from_array(t["phantom"]),
                   int(t["seed"]))


def item_seed(seed: int, split: str, index: int) -> int:
    """Per-record seed; depends only on (seed, split, index), never on generation order."""
    ss = np.random.SeedSequence([seed, SPLITS[split], index])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def make_record(rng_seed: int, config: SimConfig, mode: str = "raster_target") -> DatasetRecord:
    if mode not in MODES:
        raise ValueError(f"unknown dataset mode {mode!r}; expected one of {MODES}")
    geom = geometry_for(config)
    phantom = sample_random_phantom(rng_seed, config)
    signals = simulate_channels(phantom, geom, config)
    comps = superimpose(signals, config.group_size)
    if mode == "raster_target":
        target = rasterize_phantom(phantom, config)
    else:
        target = das_reconstruct(signals, geom, config)
    return DatasetRecord(comps.data, target, phantom, rng_seed)


def generate_records(n: int, seed: int, split: str, config: SimConfig,
                     mode: str = "raster_target") -> list[DatasetRecord]:
    return [make_record(item_seed(seed, split, i), config, mode) for i in range(n)]


def generate_dataset(out_dir, n_train: int, n_test: int, seed: int, config: SimConfig,
                     mode: str = "raster_target") -> dict:
    if n_train < 0 or n_test < 0:
        raise ValueError("record counts must be non-negative")
    out = Path(out_dir)
    counts = {"train": n_train, "test": n_test}
    for split, n in counts.items():
        for i in range(n):
            rec = make_record(item_seed(seed, split, i), config, mode)
            tensorio.save_tensors(rec.to_table(), out / split / f"{i:05d}.patd")
    manifest = {"format": "PATD", "format_version": tensorio.VERSION, "seed": seed,
                "mode": mode, "counts": counts, "sim": config.to_dict()}
    try:
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    except OSError as e:
        raise OSError(f"cannot write manifest {out / 'manifest.json'}: {e}") from e
    return manifest


def load_split(data_dir, split: str) -> tuple[np.ndarray, np.ndarray, list[DatasetRecord]]:
    """Stack a split into (N, 4, T) inputs and (N, side, side) targets."""
    data_dir = Path(data_dir)
    manifest = json.loads((data_dir / "manifest.json").read_text())
    n = manifest["counts"][split]
    recs = [DatasetRecord.from_table(tensorio.load_tensors(data_dir / split / f"{i:05d}.patd"))
            for i in range(n)]
    if not recs:
        return np.zeros((0,)), np.zeros((0,)), []
    return (np.stack([r.composites for r in recs]), np.stack([r.target for r in recs]), recs)


def load_manifest(data_dir) -> dict:
    return json.loads((Path(data_dir) / "manifest.json").read_text())
