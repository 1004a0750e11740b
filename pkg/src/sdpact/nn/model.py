"""Encoder-decoder network mapping 4 composite signals to an image.

LSTM over time -> fully connected to a 64-vector -> 1x8x8 map -> a stack of
x2 upsampling blocks -> residual block producing a single-channel image.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .layers import (LSTM, BatchNorm2d, Conv2d, Layer, LeakyReLU, Linear, Upsample2x,
                     leaky_relu, leaky_relu_grad)


@dataclass(frozen=True)
class ModelConfig:
    input_channels: int = 4
    input_length: int = 2048
    encoder_hidden: int = 128
    feature_size: int = 64
    feature_side: int = 8
    n_upsample_blocks: int = 4
    conv_channels: tuple[int, ...] = (64, 32, 16, 8)
    leaky_slope: float = 0.2
    forget_bias: float = 1.0
    # Fixed (not learned) conditioning of the raw composites before the LSTM:
    # energy envelope over a moving window (0 = off), mean-pooling of
    # ``pool`` samples per LSTM step, per-record peak normalization, then a
    # constant gain.
    envelope_window: int = 0
    pool: int = 1
    normalize_input: bool = False
    input_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "conv_channels", tuple(int(c) for c in self.conv_channels))
        if self.feature_size % (self.feature_side ** 2):
            raise ValueError(
                f"feature_size {self.feature_size} is not a multiple of "
                f"feature_side^2 = {self.feature_side ** 2}")
        if len(self.conv_channels) != self.n_upsample_blocks:
            raise ValueError(
                f"need one channel width per upsampling block: got {len(self.conv_channels)} "
                f"widths for {self.n_upsample_blocks} blocks")
        if min(self.input_channels, self.input_length, self.encoder_hidden, self.pool) < 1:
            raise ValueError("input_channels, input_length, encoder_hidden and pool must be >= 1")
        if self.input_length % self.pool:
            raise ValueError(f"input_length {self.input_length} is not a multiple of pool {self.pool}")
        if self.envelope_window < 0:
            raise ValueError("envelope_window must be >= 0")

    @property
    def decoder_channels(self) -> int:
        return self.feature_size // self.feature_side ** 2

    @property
    def sequence_length(self) -> int:
        return self.input_length // self.pool

    @property
    def output_side(self) -> int:
        return self.feature_side * 2 ** self.n_upsample_blocks

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["conv_channels"] = list(self.conv_channels)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)

    @classmethod
    def desk(cls) -> "ModelConfig":
        return cls(input_length=512, encoder_hidden=64, n_upsample_blocks=3,
                   conv_channels=(8, 8, 4), forget_bias=3.0, envelope_window=5, pool=8,
                   normalize_input=True, input_scale=3.0)


def envelope(x: np.ndarray, window: int) -> np.ndarray:
    """Root of the moving-average energy over ``window`` samples, centered, zero-padded."""
    lead = window // 2
    pad = np.zeros(x.shape[:-1] + (1,))
    e = np.concatenate([pad, np.cumsum(x ** 2, axis=-1)], axis=-1)
    T = x.shape[-1]
    hi = np.minimum(np.arange(T) + window - lead, T)
    lo = np.maximum(np.arange(T) - lead, 0)
    return np.sqrt(np.maximum(e[..., hi] - e[..., lo], 0) / window)


def prepare_inputs(x: np.ndarray, config: ModelConfig) -> np.ndarray:
    """(B, C, T) raw composites -> (B, T // pool, C) LSTM input sequence."""
    if config.envelope_window:
        x = envelope(x, config.envelope_window)
    if config.pool > 1:
        x = x.reshape(x.shape[0], x.shape[1], -1, config.pool).mean(axis=-1)
    if config.normalize_input:
        peak = np.abs(x).max(axis=(1, 2), keepdims=True)
        x = x / np.where(peak > 0, peak, 1.0)
    return config.input_scale * x.transpose(0, 2, 1)


class UpBlock(Layer):
    """up(x) -> conv -> BN -> leaky ReLU -> conv -> BN -> leaky ReLU."""

    def __init__(self, c_in, c_out, rng, slope=0.2, batch_norm=True):
        self.up = Upsample2x()
        self.conv1 = Conv2d(c_in, c_out, rng, bias=False)
        self.bn1 = BatchNorm2d(c_out) if batch_norm else None
        self.act1 = LeakyReLU(slope)
        self.conv2 = Conv2d(c_out, c_out, rng, bias=False)
        self.bn2 = BatchNorm2d(c_out) if batch_norm else None
        self.act2 = LeakyReLU(slope)

    def _stages(self):
        return [s for s in (self.up, self.conv1, self.bn1, self.act1,
                            self.conv2, self.bn2, self.act2) if s is not None]

    def forward(self, x):
        for s in self._stages():
            x = s.forward(x)
        return x

    def backward(self, dy):
        for s in reversed(self._stages()):
            dy = s.backward(dy)
        return dy


class ResBlock(Layer):
    """f(w3 * [x + w2 * f(w1 * x)]) with f the leaky ReLU; w3 maps to one channel."""

    def __init__(self, channels, rng, slope=0.2, out_channels=1):
        self.slope = slope
        self.conv1 = Conv2d(channels, channels, rng)
        self.conv2 = Conv2d(channels, channels, rng)
        self.conv3 = Conv2d(channels, out_channels, rng)

    def forward(self, x):
        self._a1 = self.conv1.forward(x)
        z = x + self.conv2.forward(leaky_relu(self._a1, self.slope))
        self._a3 = self.conv3.forward(z)
        return leaky_relu(self._a3, self.slope)

    def backward(self, dy):
        dz = self.conv3.backward(dy * leaky_relu_grad(self._a3, self.slope))
        da1 = self.conv2.backward(dz) * leaky_relu_grad(self._a1, self.slope)
        return dz + self.conv1.backward(da1)


class ReconNet(Layer):
    def __init__(self, config: ModelConfig, seed: int = 0):
        self.config = config
        rng = np.random.default_rng(seed)
        self.lstm = LSTM(config.input_channels, config.encoder_hidden, rng, config.forget_bias)
        self.fc = Linear(config.encoder_hidden, config.feature_size, rng)
        c_prev = config.decoder_channels
        self.blocks = []
        for i, c in enumerate(config.conv_channels):
            blk = UpBlock(c_prev, c, rng, config.leaky_slope)
            setattr(self, f"up{i}", blk)
            self.blocks.append(blk)
            c_prev = c
        self.res = ResBlock(c_prev, rng, config.leaky_slope)

    def encode(self, signals):
        """(B, 4, T) signals -> (B, C, side, side) feature map."""
        cfg = self.config
        x = np.asarray(signals, dtype=np.float64)
        if x.ndim != 3 or x.shape[1] != cfg.input_channels or x.shape[2] != cfg.input_length:
            raise ValueError(
                f"expected input (batch, {cfg.input_channels}, {cfg.input_length}), got {x.shape}")
        h = self.lstm.forward(prepare_inputs(x, cfg))
        f = self.fc.forward(h)
        return f.reshape(len(x), cfg.decoder_channels, cfg.feature_side, cfg.feature_side)

    def forward(self, signals):
        """(B, 4, T) or (4, T) -> (B, side, side) or (side, side)."""
        x = np.asarray(signals, dtype=np.float64)
        single = x.ndim == 2
        if single:
            x = x[None]
        y = self.encode(x)
        for blk in self.blocks:
            y = blk.forward(y)
        y = self.res.forward(y)[:, 0]
        return y[0] if single else y

    def backward(self, dy):
        """Accumulate parameter gradients; returns d loss / d (prepared LSTM input)."""
        cfg = self.config
        dy = np.asarray(dy)
        if dy.ndim == 2:
            dy = dy[None]
        d = self.res.backward(dy[:, None])
        for blk in reversed(self.blocks):
            d = blk.backward(d)
        dh = self.fc.backward(d.reshape(len(d), cfg.feature_size))
        return self.lstm.backward(dh)

    def state_dict(self) -> dict[str, np.ndarray]:
        out = {f"param.{k}": p.value for k, p in self.params().items()}
        out.update({f"buffer.{k}": v for k, v in self.buffers().items()})
        return out

    def load_state_dict(self, table: dict[str, np.ndarray]) -> None:
        params, buffers = self.params(), self.buffers()
        expected = {f"param.{k}" for k in params} | {f"buffer.{k}" for k in buffers}
        if set(table) != expected:
            missing = sorted(expected - set(table))
            extra = sorted(set(table) - expected)
            raise ValueError(f"state mismatch: missing {missing}, unexpected {extra}")
        for k, p in params.items():
            v = np.asarray(table[f"param.{k}"])
            if v.shape != p.shape:
                raise ValueError(f"{k}: expected shape {p.shape}, got {v.shape}")
            p.value[...] = v
        for k, b in buffers.items():
            b[...] = table[f"buffer.{k}"]
