"""Central finite-difference checks for the hand-written backward passes."""

from __future__ import annotations

import numpy as np


def numeric_grad(f, x: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """d f / d x by central differences; ``x`` is perturbed in place and restored."""
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + eps
        fp = f()
        x[i] = old - eps
        fm = f()
        x[i] = old
        grad[i] = (fp - fm) / (2 * eps)
    return grad


def rel_error(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    denom = np.linalg.norm(a) + np.linalg.norm(b)
    if denom == 0:
        return 0.0
    return float(np.linalg.norm(a - b) / denom)


def check_layer(layer, x: np.ndarray, rng, eps: float = 1e-5) -> dict[str, float]:
    """Relative error of analytic vs numeric gradients for the input and every parameter.

    The scalar probed is sum(r * layer(x)) with a fixed random projection r.
    """
    x = np.array(x, dtype=np.float64)
    y = layer.forward(x)
    r = rng.standard_normal(y.shape)

    def f():
        return float(np.sum(r * layer.forward(x)))

    layer.zero_grad()
    layer.forward(x)
    dx = layer.backward(r)
    analytic = {name: p.grad.copy() for name, p in layer.params().items()}
    errors = {"input": rel_error(dx, numeric_grad(f, x, eps))}
    for name, p in layer.params().items():
        errors[name] = rel_error(analytic[name], numeric_grad(f, p.value, eps))
    return errors
