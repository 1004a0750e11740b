import math

import numpy as np
import pytest

from sdpact.forward import MultiChannelSignal
from sdpact.frontend import add_noise, superimpose


def msig(data):
    return MultiChannelSignal(np.asarray(data, dtype=float), 40e6)


def test_zero_input():
    out = superimpose(msig(np.zeros((120, 2048))), 30)
    assert out.data.shape == (4, 2048)
    assert not out.data.any()


def test_impulse_lands_in_its_group():
    x = np.zeros((120, 2048))
    x[31, 100] = 1.0
    out = superimpose(msig(x), 30).data
    assert out[1, 100] == 1.0
    assert np.count_nonzero(out) == 1


def test_brute_force_group_sums():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((120, 64))
    out = superimpose(msig(x), 30).data
    for g in range(4):
        for t in range(64):
            acc = 0.0
            for i in range(30 * g, 30 * g + 30):
                acc += x[i, t]
            assert out[g, t] == acc


def test_linearity():
    rng = np.random.default_rng(1)
    x, y = rng.standard_normal((2, 120, 256))
    lhs = superimpose(msig(2.5 * x - 0.5 * y)).data
    rhs = 2.5 * superimpose(msig(x)).data - 0.5 * superimpose(msig(y)).data
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-12)


def test_partition():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((120, 32))
    x[:60] = 0
    x[90:] = 0
    out = superimpose(msig(x)).data
    assert not out[[0, 1, 3]].any()
    assert out[2].any()


def test_gains():
    x = np.ones((120, 4))
    gains = np.full(120, 2.0)
    assert (superimpose(msig(x), 30, gains).data == 60.0).all()
    with pytest.raises(ValueError):
        superimpose(msig(x), 30, np.ones(7))


def test_non_divisible_rejected():
    with pytest.raises(ValueError, match="not divisible"):
        superimpose(msig(np.zeros((121, 8))), 30)


def test_noise_disabled():
    x = np.random.default_rng(0).standard_normal((4, 100))
    assert np.array_equal(add_noise(x, math.inf, 1), x)


def test_noise_snr():
    x = np.sin(np.linspace(0, 200, 4 * 8192)).reshape(4, 8192)
    y = add_noise(x, 20.0, 42)
    snr = 10 * np.log10(np.mean(x ** 2) / np.mean((y - x) ** 2))
    assert abs(snr - 20.0) <= 0.5


def test_noise_seeds():
    x = np.ones((2, 50))
    assert not np.array_equal(add_noise(x, 10, 1), add_noise(x, 10, 2))
    assert np.array_equal(add_noise(x, 10, 1), add_noise(x, 10, 1))


def test_noise_zero_signal_rejected():
    with pytest.raises(ValueError):
        add_noise(np.zeros((2, 5)), 20, 0)
