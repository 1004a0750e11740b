"""Mini-batch training of the reconstruction network with Adam."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .layers import mse_loss
from .model import ModelConfig, ReconNet
from .optim import Adam

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 64
    lr: float = 0.005
    epochs: int = 50
    seed: int = 0
    reduction: str = "mean"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class TrainResult:
    model: ReconNet
    epoch_loss: list[float] = field(default_factory=list)
    step_loss: list[float] = field(default_factory=list)


def epoch_order(n: int, seed: int, epoch: int) -> np.ndarray:
    return np.random.default_rng([seed, epoch]).permutation(n)


def train(inputs: np.ndarray, targets: np.ndarray, model_config: ModelConfig,
          train_config: TrainConfig = TrainConfig(), model: ReconNet | None = None,
          callback=None) -> TrainResult:
    """Fit a network to (N, 4, T) inputs and (N, side, side) targets.

    Returns the trained model (left in inference mode) and the mean training loss
    of every epoch. ``callback(epoch, loss)`` is called after each epoch.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if len(inputs) == 0:
        raise ValueError("cannot train on an empty dataset")
    if len(inputs) != len(targets):
        raise ValueError(f"{len(inputs)} inputs but {len(targets)} targets")
    side = model_config.output_side
    if targets.shape[1:] != (side, side):
        raise ValueError(f"targets must be {side}x{side} for this model, got {targets.shape[1:]}")

    tc = train_config
    net = model if model is not None else ReconNet(model_config, seed=tc.seed)
    net.train()
    opt = Adam(net.params(), lr=tc.lr, beta1=tc.beta1, beta2=tc.beta2, eps=tc.eps)
    result = TrainResult(net)
    n = len(inputs)
    for epoch in range(tc.epochs):
        order = epoch_order(n, tc.seed, epoch)
        losses = []
        for start in range(0, n, tc.batch_size):
            idx = order[start:start + tc.batch_size]
            opt.zero_grad()
            y = net.forward(inputs[idx])
            loss, dy = mse_loss(y, targets[idx], tc.reduction)
            net.backward(dy)
            opt.step()
            losses.append(loss)
            result.step_loss.append(loss)
        result.epoch_loss.append(float(np.mean(losses)))
        log.info("epoch %d loss %.6g", epoch + 1, result.epoch_loss[-1])
        if callback is not None:
            callback(epoch, result.epoch_loss[-1])
    net.eval()
    return result


def predict(net: ReconNet, inputs: np.ndarray, batch_size: int = 64) -> np.ndarray:
    net.eval()
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim == 2:
        return net.forward(inputs)
    return np.concatenate([net.forward(inputs[i:i + batch_size])
                           for i in range(0, len(inputs), batch_size)])
