import json

import numpy as np
import pytest

from sdpact import tensorio
from sdpact.cli import main, parse_time, write_pgm


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def desk_cfg(tmp_path):
    p = tmp_path / "desk.json"
    p.write_text(json.dumps({"preset": "desk"}))
    return p


def test_check_schedule_table1(capsys):
    code, out, _ = run(capsys, "check-schedule", "--table1", "T=60us", "b=0", "--duration", "50us")
    assert code == 0 and out.splitlines()[0] == "alias_free: true"


def test_check_schedule_overlap(capsys):
    code, out, _ = run(capsys, "check-schedule", "--duration", "51.2us")
    assert code == 0 and out.startswith("alias_free: false")
    assert out.count("overlap:") == 3


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["no-such-command"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["check-schedule", "--duration", "50us", "--bogus"])
    assert e.value.code == 2
    capsys.readouterr()


def test_operation_error_exit_1(capsys, tmp_path):
    code, _, err = run(capsys, "recon", "--in", tmp_path / "missing.patd")
    assert code == 1
    assert len(err.strip().splitlines()) == 1 and "missing.patd" in err


def test_recon_zero_signals(capsys, tmp_path):
    src = tmp_path / "zero.patd"
    tensorio.save_tensors({"signals": np.zeros((120, 2048))}, src)
    code, _, _ = run(capsys, "recon", "--method", "das", "--in", src, "--out", tmp_path / "img.patd",
                     "--pgm", tmp_path / "img.pgm")
    assert code == 0
    img = tensorio.load_tensors(tmp_path / "img.patd")["image"]
    assert img.shape == (128, 128) and not img.any()
    assert (tmp_path / "img.pgm").read_bytes().startswith(b"P5\n128 128\n255\n")


def test_simulate_mux_demux_recon(capsys, tmp_path, desk_cfg):
    sig = tmp_path / "sig.patd"
    assert run(capsys, "simulate", "--config", desk_cfg, "--seed", 5, "--out", sig)[0] == 0
    rec = tmp_path / "rec.patd"
    assert run(capsys, "mux", "--config", desk_cfg, "--in", sig, "--out", rec)[0] == 0
    back = tmp_path / "back.patd"
    assert run(capsys, "demux", "--config", desk_cfg, "--in", rec, "--out", back)[0] == 0
    a = tensorio.load_tensors(sig)["composites"]
    b = tensorio.load_tensors(back)["composites"]
    assert np.array_equal(a, b)
    for method in ("das", "das-composite"):
        img = tmp_path / f"{method}.patd"
        code, _, _ = run(capsys, "recon", "--config", desk_cfg, "--method", method,
                         "--in", sig if method == "das" else back, "--out", img)
        assert code == 0 and tensorio.load_tensors(img)["image"].shape == (64, 64)


def test_global_flags_before_command(capsys, tmp_path, desk_cfg):
    out = tmp_path / "s.patd"
    code, _, _ = run(capsys, "--config", desk_cfg, "--seed", 2, "--out", out, "simulate")
    assert code == 0 and tensorio.load_tensors(out)["signals"].shape == (120, 512)


def test_gen_dataset_identical_trees(capsys, tmp_path, desk_cfg):
    for name in ("a", "b"):
        code, _, _ = run(capsys, "gen-dataset", "--config", desk_cfg, "--n-train", 3, "--n-test", 1,
                         "--seed", 1, "--out", tmp_path / name)
        assert code == 0
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert len(files) == 5
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_train_infer_bench(capsys, tmp_path, desk_cfg):
    data = tmp_path / "data"
    run(capsys, "gen-dataset", "--config", desk_cfg, "--n-train", 2, "--n-test", 2, "--out", data)
    model = tmp_path / "model"
    code, out, _ = run(capsys, "train", "--config", desk_cfg, "--data", data, "--epochs", 1,
                       "--out", model)
    assert code == 0 and (model / "weights.patd").exists()
    code, out, _ = run(capsys, "infer", "--config", desk_cfg, "--model", model, "--data", data,
                       "--out", tmp_path / "pred.patd")
    assert code == 0 and "centroid within 3 px" in out
    assert tensorio.load_tensors(tmp_path / "pred.patd")["images"].shape == (2, 64, 64)
    comps = tmp_path / "c.patd"
    tensorio.save_tensors({"composites": np.zeros((4, 512))}, comps)
    code, _, _ = run(capsys, "recon", "--config", desk_cfg, "--method", "nn", "--model", model,
                     "--in", comps, "--out", tmp_path / "nn.patd")
    assert code == 0
    code, out, _ = run(capsys, "bench", "--config", desk_cfg, "--model", model, "--repeats", 1)
    rep = json.loads(out)
    assert code == 0 and rep["measured_s"]["nn_inference"] > 0


def test_bench_defaults(capsys, tmp_path):
    code, out, _ = run(capsys, "bench", "--repeats", 1, "--out", tmp_path / "b.json")
    rep = json.loads((tmp_path / "b.json").read_text())
    assert code == 0 and rep["record_duration_s"] == pytest.approx(201.2e-6)
    assert rep["scan"]["duration_s"] == pytest.approx(12.0)


def test_bad_config(capsys, tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"sim": {"no_such_field": 1}}))
    code, _, err = run(capsys, "simulate", "--config", p, "--out", tmp_path / "x.patd")
    assert code == 1 and "no_such_field" in err


def test_parse_time_and_pgm(tmp_path):
    assert parse_time("50us") == pytest.approx(50e-6)
    assert parse_time("2ms") == pytest.approx(2e-3)
    assert parse_time("0.5") == 0.5
    write_pgm(np.array([[0.0, 1.0], [0.5, -1.0]]), tmp_path / "p.pgm")
    raw = (tmp_path / "p.pgm").read_bytes()
    assert raw == b"P5\n2 2\n255\n" + bytes([0, 255, 128, 0])
