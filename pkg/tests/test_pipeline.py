import numpy as np
import pytest

from sdpact.bench import REFERENCE_TIMES_S, bench, record_duration, scan_duration
from sdpact.core import Disc, Phantom, SimConfig, rasterize_phantom
from sdpact.delayline import built_schedule
from sdpact.metrics import centroid_errors, intensity_centroid, local_centroid_errors
from sdpact.nn.model import ModelConfig, ReconNet
from sdpact.nn.persist import load_model, save_model
from sdpact.pipeline import end_to_end

DESK = SimConfig.desk()


def test_delay_line_is_transparent_without_echoes():
    ph = Phantom([Disc(0.004, 0.006, 0.0015)])
    net = ReconNet(ModelConfig.desk(), seed=3).eval()
    a = end_to_end(ph, DESK, net)
    b = end_to_end(ph, DESK, net, use_delay_line=False)
    assert np.array_equal(a.recovered.data, b.recovered.data)
    assert np.array_equal(a.image, b.image)
    assert a.record is not None and b.record is None


def test_default_chain_das_composite():
    cfg = SimConfig()
    ph = Phantom([Disc(0.0, 0.0, 0.001)])
    res = end_to_end(ph, cfg)
    assert res.image.shape == (128, 128)
    assert res.recovered.truncated == (0, 0, 0, 0)
    np.testing.assert_array_equal(res.recovered.data[:, :2000], res.composites.data[:, :2000])


def test_echo_changes_recovered_composites():
    ph = Phantom([Disc(0.003, -0.002, 0.0015)])
    clean = end_to_end(ph, DESK)
    ringing = end_to_end(ph, DESK, schedule=built_schedule(echo_coeff=0.2))
    assert not np.array_equal(clean.recovered.data, ringing.recovered.data)


def test_empty_phantom_gives_flat_output():
    net = ReconNet(ModelConfig.desk(), seed=0).eval()
    img = end_to_end(Phantom([]), DESK, net).image
    ref = net.forward(np.zeros((4, 512)))
    np.testing.assert_array_equal(img, ref)
    assert not end_to_end(Phantom([]), DESK).image.any()


def test_bench_defaults():
    rep = bench(SimConfig(), repeats=1)
    assert rep["record_duration_s"] == pytest.approx(201.2e-6, rel=1e-12)
    assert rep["scan"]["duration_s"] == pytest.approx(12.0)
    assert rep["reference_s"]["proposed_acquisition"] == 2.35e-3
    assert rep["reference_s"]["conventional_total"] == 261.759
    assert rep["measured_s"]["nn_inference"] is None
    assert all(v > 0 for k, v in rep["measured_s"].items() if v is not None)


def test_bench_with_model():
    rep = bench(DESK, ReconNet(ModelConfig.desk()), repeats=1)
    assert rep["measured_s"]["nn_inference"] > 0


def test_record_and_scan_durations():
    assert record_duration(built_schedule(), SimConfig()) == pytest.approx(201.2e-6)
    assert scan_duration(SimConfig(), 20.0) == pytest.approx(6.0)
    with pytest.raises(ValueError):
        scan_duration(SimConfig(), 0)
    assert REFERENCE_TIMES_S["proposed_total"] == pytest.approx(
        REFERENCE_TIMES_S["proposed_acquisition"] + REFERENCE_TIMES_S["proposed_processing"])


def test_model_save_load(tmp_path):
    net = ReconNet(ModelConfig(input_length=8, encoder_hidden=5, feature_size=16, feature_side=4,
                               n_upsample_blocks=1, conv_channels=(2,)), seed=4)
    net.blocks[0].bn1.running_mean[...] = 0.25
    save_model(net, tmp_path / "m", {"note": "x"})
    back = load_model(tmp_path / "m")
    x = np.random.default_rng(0).standard_normal((2, 4, 8))
    assert np.array_equal(back.forward(x), net.eval().forward(x))
    with pytest.raises(OSError):
        load_model(tmp_path / "missing")


def test_centroids():
    img = np.zeros((5, 5))
    img[1, 3] = 2.0
    np.testing.assert_array_equal(intensity_centroid(img), [1, 3])
    assert np.isnan(intensity_centroid(-img)).all()
    assert centroid_errors([np.zeros((5, 5))], [img])[0] == np.inf


def test_local_centroid_on_raster():
    ph = Phantom([Disc(0.006, -0.003, 0.0015), Disc(-0.008, 0.004, 0.001)])
    img = rasterize_phantom(ph, DESK)
    assert (local_centroid_errors(img, ph, DESK) <= 0.5).all()
    shifted = np.roll(img, 5, axis=1)
    assert (local_centroid_errors(shifted, ph, DESK) > 2).all()
