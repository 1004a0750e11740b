"""Layers with explicit forward/backward passes (float64, numpy).

Every layer caches what its backward pass needs during ``forward`` and
accumulates parameter gradients into ``Param.grad`` during ``backward``.
Image tensors are laid out (batch, channels, height, width).
"""

from __future__ import annotations

import numpy as np


class Param:
    """A trainable array and its accumulated gradient."""

    def __init__(self, value):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self):
        self.grad[...] = 0.0

    def __repr__(self):
        return f"Param(shape={self.shape})"


class Layer:
    training = True

    def params(self) -> dict[str, Param]:
        """Trainable parameters keyed by dotted name."""
        out = {}
        for name, attr in vars(self).items():
            if isinstance(attr, Param):
                out[name] = attr
            elif isinstance(attr, Layer):
                out.update({f"{name}.{k}": v for k, v in attr.params().items()})
        return out

    def buffers(self) -> dict[str, np.ndarray]:
        """Non-trainable state (batch-norm running statistics)."""
        out = {}
        for name, attr in vars(self).items():
            if isinstance(attr, Layer):
                out.update({f"{name}.{k}": v for k, v in attr.buffers().items()})
        return out

    def train(self, mode: bool = True):
        self.training = mode
        for attr in vars(self).values():
            if isinstance(attr, Layer):
                attr.train(mode)
        return self

    def eval(self):
        return self.train(False)

    def zero_grad(self):
        for p in self.params().values():
            p.zero_grad()

    def __call__(self, x):
        return self.forward(x)


def leaky_relu(x, slope=0.2):
    return np.where(x > 0, x, slope * x)


def leaky_relu_grad(x, slope=0.2):
    # slope is used at exactly 0 as the subgradient
    return np.where(x > 0, 1.0, slope)


def sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class LeakyReLU(Layer):
    def __init__(self, slope=0.2):
        self.slope = slope

    def forward(self, x):
        self._x = x
        return leaky_relu(x, self.slope)

    def backward(self, dy):
        return dy * leaky_relu_grad(self._x, self.slope)


class Linear(Layer):
    def __init__(self, n_in, n_out, rng):
        lim = 1.0 / np.sqrt(n_in)
        self.weight = Param(rng.uniform(-lim, lim, (n_in, n_out)))
        self.bias = Param(rng.uniform(-lim, lim, n_out))

    def forward(self, x):
        self._x = x
        return x @ self.weight.value + self.bias.value

    def backward(self, dy):
        self.weight.grad += self._x.T @ dy
        self.bias.grad += dy.sum(axis=0)
        return dy @ self.weight.value.T


class LSTM(Layer):
    """Single-layer LSTM over (batch, time, features); returns the last hidden state.

    Gate order in the packed weights is input, forget, output, candidate.
    """

    def __init__(self, n_in, hidden, rng, forget_bias=1.0):
        lim = 1.0 / np.sqrt(hidden)
        self.hidden = hidden
        self.w_x = Param(rng.uniform(-lim, lim, (n_in, 4 * hidden)))
        self.w_h = Param(rng.uniform(-lim, lim, (hidden, 4 * hidden)))
        b = np.zeros(4 * hidden)
        b[hidden:2 * hidden] = forget_bias
        self.bias = Param(b)

    def forward(self, x):
        B, T, _ = x.shape
        H = self.hidden
        h = np.zeros((B, H))
        c = np.zeros((B, H))
        # input projection for all steps at once
        xw = x @ self.w_x.value + self.bias.value
        self._x = x
        self._gates = np.empty((T, B, 4 * H))
        self._c = np.empty((T + 1, B, H))
        self._h = np.empty((T + 1, B, H))
        self._tc = np.empty((T, B, H))
        self._c[0] = c
        self._h[0] = h
        w_h = self.w_h.value
        for t in range(T):
            a = xw[:, t] + h @ w_h
            g = self._gates[t]
            g[:, :3 * H] = sigmoid(a[:, :3 * H])
            g[:, 3 * H:] = np.tanh(a[:, 3 * H:])
            i, f, o, gg = g[:, :H], g[:, H:2 * H], g[:, 2 * H:3 * H], g[:, 3 * H:]
            c = f * c + i * gg
            tc = np.tanh(c)
            h = o * tc
            self._c[t + 1] = c
            self._h[t + 1] = h
            self._tc[t] = tc
        return h

    def backward(self, dh_last):
        x = self._x
        B, T, _ = x.shape
        H = self.hidden
        w_h = self.w_h.value
        da_all = np.empty((T, B, 4 * H))
        dh = dh_last
        dc = np.zeros((B, H))
        for t in range(T - 1, -1, -1):
            g = self._gates[t]
            i, f, o, gg = g[:, :H], g[:, H:2 * H], g[:, 2 * H:3 * H], g[:, 3 * H:]
            tc = self._tc[t]
            dc = dc + dh * o * (1 - tc ** 2)
            da = da_all[t]
            da[:, :H] = dc * gg * i * (1 - i)
            da[:, H:2 * H] = dc * self._c[t] * f * (1 - f)
            da[:, 2 * H:3 * H] = dh * tc * o * (1 - o)
            da[:, 3 * H:] = dc * i * (1 - gg ** 2)
            dc = dc * f
            dh = da @ w_h.T
        da_bt = da_all.transpose(1, 0, 2)  # (B, T, 4H)
        self.w_x.grad += np.tensordot(x, da_bt, axes=([0, 1], [0, 1]))
        self.w_h.grad += np.tensordot(self._h[:T], da_all, axes=([0, 1], [0, 1]))
        self.bias.grad += da_all.sum(axis=(0, 1))
        return da_bt @ self.w_x.value.T


class Conv2d(Layer):
    """k x k convolution (default 3x3), stride 1, zero padding k // 2.

    The padded NHWC batch is flattened to one long row of pixels, so each kernel
    tap becomes a constant offset into that row and every tap is one contiguous
    matmul. Offsets from valid output pixels never leave their own image.
    """

    def __init__(self, c_in, c_out, rng, kernel=3, bias=True):
        lim = 1.0 / np.sqrt(c_in * kernel * kernel)
        self.kernel = kernel
        self.weight = Param(rng.uniform(-lim, lim, (c_out, c_in, kernel, kernel)))
        self.bias = Param(rng.uniform(-lim, lim, c_out)) if bias else None

    def _geometry(self, shape):
        k, p = self.kernel, self.kernel // 2
        B, C, H, W = shape
        Hp, Wp = H + 2 * p, W + 2 * p
        offsets = [(di, dj, di * Wp + dj) for di in range(k) for dj in range(k)]
        span = B * Hp * Wp - offsets[-1][2]
        return B, C, H, W, Hp, Wp, offsets, span

    def forward(self, x):
        B, C, H, W, Hp, Wp, offsets, span = self._geometry(x.shape)
        p = self.kernel // 2
        xp = np.zeros((B, Hp, Wp, C))
        xp[:, p:p + H, p:p + W, :] = x.transpose(0, 2, 3, 1)
        flat = xp.reshape(-1, C)
        self._flat, self._shape = flat, x.shape
        w = self.weight.value
        out = np.zeros((B * Hp * Wp, w.shape[0]))
        for di, dj, off in offsets:
            out[:span] += flat[off:off + span] @ w[:, :, di, dj].T
        out = out.reshape(B, Hp, Wp, -1)[:, :H, :W, :]
        if self.bias is not None:
            out = out + self.bias.value
        return out.transpose(0, 3, 1, 2)

    def backward(self, dy):
        B, C, H, W, Hp, Wp, offsets, span = self._geometry(self._shape)
        p = self.kernel // 2
        O = dy.shape[1]
        g = np.zeros((B, Hp, Wp, O))
        g[:, :H, :W, :] = dy.transpose(0, 2, 3, 1)
        g = g.reshape(-1, O)[:span]
        if self.bias is not None:
            self.bias.grad += dy.sum(axis=(0, 2, 3))
        flat = self._flat
        w = self.weight.value
        dflat = np.zeros_like(flat)
        for di, dj, off in offsets:
            self.weight.grad[:, :, di, dj] += g.T @ flat[off:off + span]
            dflat[off:off + span] += g @ w[:, :, di, dj]
        dxp = dflat.reshape(B, Hp, Wp, C)
        return dxp[:, p:p + H, p:p + W, :].transpose(0, 3, 1, 2)


class BatchNorm2d(Layer):
    def __init__(self, channels, momentum=0.1, eps=1e-5):
        self.gamma = Param(np.ones(channels))
        self.beta = Param(np.zeros(channels))
        self.running_mean = np.zeros(channels)
        self.running_var = np.ones(channels)
        self.momentum = momentum
        self.eps = eps

    def buffers(self):
        return {"running_mean": self.running_mean, "running_var": self.running_var}

    def forward(self, x):
        if self.training:
            mean = x.mean(axis=(0, 2, 3))
            var = x.var(axis=(0, 2, 3))
            n = x.size / x.shape[1]
            m = self.momentum
            self.running_mean[...] = (1 - m) * self.running_mean + m * mean
            self.running_var[...] = (1 - m) * self.running_var + m * var * n / max(n - 1, 1)
        else:
            mean, var = self.running_mean, self.running_var
        inv = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean[None, :, None, None]) * inv[None, :, None, None]
        self._xhat, self._inv, self._mode = xhat, inv, self.training
        return self.gamma.value[None, :, None, None] * xhat + self.beta.value[None, :, None, None]

    def backward(self, dy):
        xhat, inv = self._xhat, self._inv
        self.gamma.grad += (dy * xhat).sum(axis=(0, 2, 3))
        self.beta.grad += dy.sum(axis=(0, 2, 3))
        dxhat = dy * self.gamma.value[None, :, None, None]
        if not self._mode:
            return dxhat * inv[None, :, None, None]
        mean_d = dxhat.mean(axis=(0, 2, 3), keepdims=True)
        mean_dx = (dxhat * xhat).mean(axis=(0, 2, 3), keepdims=True)
        return (dxhat - mean_d - xhat * mean_dx) * inv[None, :, None, None]


def upsample2x(x):
    """Nearest-neighbour x2 upsampling of the last two axes."""
    return x.repeat(2, axis=-2).repeat(2, axis=-1)


def upsample2x_backward(dy):
    B, C, H, W = dy.shape
    return dy.reshape(B, C, H // 2, 2, W // 2, 2).sum(axis=(3, 5))


class Upsample2x(Layer):
    def forward(self, x):
        return upsample2x(x)

    def backward(self, dy):
        return upsample2x_backward(dy)


def mse_loss(y, gt, reduction="mean"):
    """Half squared Frobenius error and its gradient with respect to y.

    ``sum`` gives 0.5 * ||y - gt||^2; ``mean`` divides that by the element count.
    """
    y = np.asarray(y, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if y.shape != gt.shape:
        raise ValueError(f"shape mismatch: output {y.shape} vs target {gt.shape}")
    diff = y - gt
    if reduction == "sum":
        return 0.5 * float(np.sum(diff ** 2)), diff
    if reduction == "mean":
        n = diff.size
        return 0.5 * float(np.sum(diff ** 2)) / n, diff / n
    raise ValueError(f"unknown reduction {reduction!r}")
