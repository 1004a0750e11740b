import numpy as np
import pytest

from sdpact.core import Disc, Phantom, SimConfig, geometry_for, pixel_centers
from sdpact.das import das_on_composites, das_reconstruct, group_center_positions, integrate_traces
from sdpact.forward import MultiChannelSignal, simulate_channels, simulate_points
from sdpact.frontend import superimpose

CFG = SimConfig()
GEOM = geometry_for(CFG)


def argmax_xy(img):
    r, c = np.unravel_index(np.argmax(img), img.shape)
    xs, ys = pixel_centers(CFG)
    return np.array([xs[c], ys[r]])


def test_zero_signals():
    img = das_reconstruct(np.zeros((120, 2048)), GEOM, CFG)
    assert img.shape == (128, 128) and not img.any()


def pixel_source(p):
    """Single-pixel phantom at the pixel center nearest p; returns (signals, center)."""
    xs, ys = pixel_centers(CFG)
    c = np.array([xs[np.argmin(np.abs(xs - p[0]))], ys[np.argmin(np.abs(ys - p[1]))]])
    return simulate_channels(Phantom([Disc(c[0], c[1], CFG.pitch / 4)]), GEOM, CFG), c


def test_point_source_localized():
    sig, c = pixel_source([0.010, 0.0])
    img = das_reconstruct(sig, GEOM, CFG)
    assert np.linalg.norm(argmax_xy(img) - c) <= CFG.pitch * np.sqrt(2)
    assert img.max() == 1.0 and img.min() >= 0


def test_literal_backprojection_misses_pixel_sources():
    # the emitted wavelet is odd, so the source pixel itself sums to zero without integration
    sig, c = pixel_source([0.010, 0.0])
    img = das_reconstruct(sig, GEOM, CFG, clamp=False, normalize=False, integrate=False)
    xs, ys = pixel_centers(CFG)
    assert abs(img[np.argmin(np.abs(ys - c[1])), np.argmin(np.abs(xs - c[0]))]) < 1e-9 * np.abs(img).max()


def test_integrate_traces_inverts_central_difference():
    h = np.exp(-np.linspace(-8, 8, 81) ** 2)
    d = 0.5 * (np.pad(h, 1)[2:] - np.pad(h, 1)[:-2])
    smooth = 0.25 * np.pad(h, 1)[:-2] + 0.5 * h + 0.25 * np.pad(h, 1)[2:]
    np.testing.assert_allclose(integrate_traces(d), smooth, atol=1e-12)


def test_channel_rotation_rotates_image():
    sig, p = pixel_source([0.006, 0.0])
    k = 30  # a quarter turn keeps the grid aligned
    img = das_reconstruct(np.roll(sig.data, k, axis=0), GEOM, CFG)
    ang = 2 * np.pi * k / CFG.n_sensors
    expect = [p[0] * np.cos(ang) - p[1] * np.sin(ang), p[0] * np.sin(ang) + p[1] * np.cos(ang)]
    assert np.linalg.norm(argmax_xy(img) - expect) <= CFG.pitch * np.sqrt(2)


def test_point_source_property():
    rng = np.random.default_rng(17)
    lim = CFG.roi_side / 2 - 0.002
    for _ in range(10):
        sig, c = pixel_source(rng.uniform(-lim, lim, 2))
        img = das_reconstruct(sig, GEOM, CFG)
        assert np.linalg.norm(argmax_xy(img) - c) <= CFG.pitch * np.sqrt(2)


def test_linear_before_clamp():
    rng = np.random.default_rng(0)
    a, b = rng.standard_normal((2, 120, 2048))
    raw = lambda x: das_reconstruct(x, GEOM, CFG, clamp=False, normalize=False)
    np.testing.assert_allclose(raw(a - 2 * b), raw(a) - 2 * raw(b), atol=1e-10)


def test_size_mismatch():
    with pytest.raises(ValueError):
        das_reconstruct(np.zeros((60, 100)), GEOM, CFG)


def test_composites_zero_and_arc():
    assert not das_on_composites(np.zeros((4, 2048)), GEOM, CFG).any()
    sig = simulate_points([[0.0, 0.0]], [1.0], GEOM, CFG)
    comps = superimpose(sig, 30).data
    only = np.zeros_like(comps)
    only[0] = comps[0]
    img = das_on_composites(only, GEOM, CFG)
    center = group_center_positions(GEOM, 30)[0]
    xs, ys = pixel_centers(CFG)
    X, Y = np.meshgrid(xs, ys)
    dist = np.hypot(X - center[0], Y - center[1])
    # bright pixels sit on an arc at the source distance from the group center
    bright = img > 0.5
    assert bright.any()
    assert np.abs(dist[bright] - np.linalg.norm(center)).max() <= 3 * CFG.pitch


def test_group_centers_on_ring():
    c = group_center_positions(GEOM, 30)
    np.testing.assert_allclose(np.linalg.norm(c, axis=1), CFG.ring_radius)
    np.testing.assert_allclose(np.degrees(np.arctan2(c[:, 1], c[:, 0])), [43.5, 133.5, -136.5, -46.5])


def test_disc_phantom_full_das():
    ph = Phantom([Disc(0.008, -0.004, 0.0015)])
    img = das_reconstruct(simulate_channels(ph, GEOM, CFG), GEOM, CFG)
    assert np.linalg.norm(argmax_xy(img) - [0.008, -0.004]) <= 0.0015 + 2 * CFG.pitch
