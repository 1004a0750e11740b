"""Saving a trained network: weights as PATD, architecture as JSON alongside."""

from __future__ import annotations

import json
from pathlib import Path

from .. import tensorio
from .model import ModelConfig, ReconNet

WEIGHTS = "weights.patd"
CONFIG = "model.json"


def save_model(net: ReconNet, out_dir, extra: dict | None = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tensorio.save_tensors(net.state_dict(), out / WEIGHTS)
    meta = {"model": net.config.to_dict(), **(extra or {})}
    (out / CONFIG).write_text(json.dumps(meta, indent=2, sort_keys=True))
    return out


def load_model(model_dir) -> ReconNet:
    d = Path(model_dir)
    try:
        meta = json.loads((d / CONFIG).read_text())
    except OSError as e:
        raise OSError(f"cannot read model description {d / CONFIG}: {e}") from e
    net = ReconNet(ModelConfig.from_dict(meta["model"]))
    net.load_state_dict(tensorio.load_tensors(d / WEIGHTS))
    return net.eval()
