"""Command-line entry point: ``sdpact <command> [flags]``.

Every command is a thin shim over the library; files are PATD tensor tables
unless noted. Usage errors exit with 2, failed operations print one line to
stderr and exit with 1.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import re
import sys
from pathlib import Path

import numpy as np

from . import tensorio
from .core import Phantom, SimConfig, geometry_for, rasterize_phantom, sample_random_phantom
from .das import das_on_composites, das_reconstruct
from .delayline import US, CombinedRecord, DelaySchedule, check_alias_free, mux, built_schedule, \
    schedule_from_table1
from .demux import default_window_len, demux, pad_to
from .forward import simulate_channels
from .frontend import CompositeSignals, superimpose

log = logging.getLogger("sdpact")

_UNITS = {"s": 1.0, "ms": 1e-3, "us": US, "ns": 1e-9}


# ---------------------------------------------------------------- config

def load_config(path) -> dict:
    """Read the JSON run configuration; every section is optional."""
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ValueError(f"cannot read config {path}: {e}") from e
    unknown = set(data) - {"preset", "sim", "model", "train", "schedule"}
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    return data


def sim_config(cfg: dict) -> SimConfig:
    base = SimConfig.desk() if cfg.get("preset") == "desk" else SimConfig()
    return SimConfig.from_dict({**base.to_dict(), **cfg["sim"]}) if cfg.get("sim") else base


def model_config(cfg: dict):
    from .nn.model import ModelConfig
    base = ModelConfig.desk() if cfg.get("preset") == "desk" else ModelConfig()
    if cfg.get("model"):
        return ModelConfig.from_dict({**base.to_dict(), **cfg["model"]})
    return base


def train_config(cfg: dict, seed: int):
    from .nn.train import TrainConfig
    return TrainConfig(**{"seed": seed, **cfg.get("train", {})})


def schedule_config(cfg: dict) -> DelaySchedule:
    return DelaySchedule.from_dict(cfg["schedule"]) if cfg.get("schedule") else built_schedule()


def parse_time(text: str) -> float:
    m = re.fullmatch(r"\s*([-+0-9.eE]+)\s*(s|ms|us|ns)?\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"not a duration: {text!r} (e.g. 50us)")
    return float(m.group(1)) * _UNITS[m.group(2) or "s"]


# ---------------------------------------------------------------- file helpers

def _schedule_table(s: DelaySchedule) -> dict:
    return {"delays": np.array(s.delays), "gains": np.array(s.gains),
            "echo_coeff": np.array(s.echo_coeff), "n_echoes": np.array(float(s.n_echoes))}


def _schedule_from_table(t: dict) -> DelaySchedule:
    return DelaySchedule(tuple(t["delays"]), tuple(t["gains"]), float(t["echo_coeff"]),
                         int(t["n_echoes"]))


def _read(path, *names) -> dict:
    table = tensorio.load_tensors(path)
    missing = [n for n in names if n not in table]
    if missing:
        raise ValueError(f"{path}: missing entries {missing}; found {sorted(table)}")
    return table


def write_pgm(image: np.ndarray, path) -> None:
    """8-bit binary graymap, scaled so the image maximum is white."""
    img = np.clip(np.asarray(image, dtype=np.float64), 0, None)
    peak = img.max()
    pix = np.zeros(img.shape, np.uint8) if peak <= 0 else np.rint(255 * img / peak).astype(np.uint8)
    h, w = pix.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode() + pix.tobytes())


def _out(args, default: str) -> Path:
    return Path(args.out or default)


# ---------------------------------------------------------------- commands

def cmd_simulate(args, cfg):
    config = sim_config(cfg)
    if args.phantom:
        phantom = Phantom.load(args.phantom)
    else:
        phantom = sample_random_phantom(args.seed, config)
    signals = simulate_channels(phantom, geometry_for(config), config)
    comps = superimpose(signals, config.group_size)
    out = _out(args, "signals.patd")
    tensorio.save_tensors({"signals": signals.data, "composites": comps.data,
                           "phantom": phantom.to_array(),
                           "target": rasterize_phantom(phantom, config)}, out)
    print(f"wrote {out}: {signals.data.shape[0]} channels x {signals.data.shape[1]} samples")


def cmd_mux(args, cfg):
    config = sim_config(cfg)
    comps = _read(args.input, "composites")["composites"]
    schedule = schedule_config(cfg)
    rec = mux(CompositeSignals(comps, config.sample_rate, config.group_size), schedule)
    out = _out(args, "record.patd")
    tensorio.save_tensors({"record": rec.data, "sample_rate": np.array(config.sample_rate),
                           **_schedule_table(schedule)}, out)
    print(f"wrote {out}: {len(rec.data)} samples ({rec.duration / US:.1f} us)")


def cmd_demux(args, cfg):
    config = sim_config(cfg)
    t = _read(args.input, "record", "sample_rate", "delays", "gains", "echo_coeff", "n_echoes")
    fs = float(t["sample_rate"])
    schedule = _schedule_from_table(t)
    window = args.window or default_window_len(schedule, fs, config.samples_per_channel)
    rec = demux(CombinedRecord(t["record"], fs, schedule), window, config.group_size)
    comps = pad_to(rec, config.samples_per_channel)
    out = _out(args, "composites.patd")
    tensorio.save_tensors({"composites": comps.data,
                           "truncated": np.array(rec.truncated, dtype=float)}, out)
    print(f"wrote {out}: window {window} samples, truncated {list(rec.truncated)}")


def cmd_recon(args, cfg):
    config = sim_config(cfg)
    geom = geometry_for(config)
    if args.method == "das":
        image = das_reconstruct(_read(args.input, "signals")["signals"], geom, config)
    else:
        comps = _read(args.input, "composites")["composites"]
        if args.method == "das-composite":
            image = das_on_composites(comps, geom, config)
        else:
            if not args.model:
                raise ValueError("--method nn needs --model DIR")
            from .nn.persist import load_model
            image = load_model(args.model).forward(comps)
    out = _out(args, "image.patd")
    tensorio.save_tensors({"image": image}, out)
    if args.pgm:
        write_pgm(image, args.pgm)
    print(f"wrote {out}: {image.shape[0]}x{image.shape[1]} image")


def cmd_gen_dataset(args, cfg):
    from .dataset import generate_dataset
    config = sim_config(cfg)
    out = _out(args, "dataset")
    m = generate_dataset(out, args.n_train, args.n_test, args.seed, config, args.mode)
    print(f"wrote {out}: {m['counts']['train']} train, {m['counts']['test']} test records")


def cmd_train(args, cfg):
    from .dataset import load_split
    from .nn.persist import save_model
    from .nn.train import train
    x, y, _ = load_split(args.data, "train")
    if len(x) == 0:
        raise ValueError(f"{args.data}: training split is empty")
    tc = train_config(cfg, args.seed)
    if args.epochs is not None:
        tc = dataclasses.replace(tc, epochs=args.epochs)
    mc = model_config(cfg)
    res = train(x, y, mc, tc, callback=lambda e, l: log.info("epoch %d loss %.6g", e + 1, l))
    out = _out(args, "model")
    save_model(res.model, out, {"train": dataclasses.asdict(tc), "epoch_loss": res.epoch_loss})
    print(f"wrote {out}: {tc.epochs} epochs, loss {res.epoch_loss[0]:.4g} -> {res.epoch_loss[-1]:.4g}")


def cmd_infer(args, cfg):
    from .dataset import load_split
    from .metrics import centroid_errors
    from .nn.persist import load_model
    from .nn.train import predict
    net = load_model(args.model)
    x, y, _ = load_split(args.data, args.split)
    if len(x) == 0:
        raise ValueError(f"{args.data}: split {args.split!r} is empty")
    images = predict(net, x)
    out = _out(args, "predictions.patd")
    tensorio.save_tensors({"images": images}, out)
    err = centroid_errors(images, y)
    within = float(np.mean(err <= 3.0))
    print(f"wrote {out}: {len(images)} images; centroid within 3 px on {within:.1%}, "
          f"median error {np.nanmedian(err):.2f} px")


def cmd_bench(args, cfg):
    from .bench import bench
    model = None
    if args.model:
        from .nn.persist import load_model
        model = load_model(args.model)
    report = bench(sim_config(cfg), model, schedule_config(cfg), args.rep_rate,
                   args.repeats, args.seed)
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text)
    print(text)


def cmd_check_schedule(args, cfg):
    if args.table1:
        kv = dict(item.split("=", 1) for item in args.table1)
        if set(kv) - {"T", "b"} or "T" not in kv:
            raise ValueError("--table1 takes T=<time> and optionally b=<time>")
        schedule = schedule_from_table1(parse_time(kv["T"]), parse_time(kv.get("b", "0")),
                                        echo_coeff=args.echo_coeff, n_echoes=args.n_echoes)
    else:
        base = schedule_config(cfg)
        schedule = DelaySchedule(base.delays, base.gains, args.echo_coeff or base.echo_coeff,
                                 args.n_echoes, base.T, base.b)
    rep = check_alias_free(schedule, args.duration)
    print(f"alias_free: {'true' if rep.alias_free else 'false'}")
    for a, b, ov in rep.overlapping_pairs:
        print(f"overlap: {a} {b} {ov / US:.3f} us")


COMMANDS = {
    "gen-dataset": cmd_gen_dataset, "simulate": cmd_simulate, "mux": cmd_mux,
    "demux": cmd_demux, "recon": cmd_recon, "train": cmd_train, "infer": cmd_infer,
    "bench": cmd_bench, "check-schedule": cmd_check_schedule,
}


def build_parser() -> argparse.ArgumentParser:
    def add_common(p, suppress):
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        p.add_argument("--config", default=d(None), help="JSON run configuration")
        p.add_argument("--seed", type=int, default=d(0), help="random seed (default 0)")
        p.add_argument("--out", default=d(None), help="output file or directory")
        p.add_argument("-v", "--verbose", action="store_true", default=d(False))

    parser = argparse.ArgumentParser(prog="sdpact", description=__doc__.splitlines()[0])
    add_common(parser, False)
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    common = argparse.ArgumentParser(add_help=False)
    add_common(common, True)

    def cmd(name, help):
        return sub.add_parser(name, help=help, parents=[common])

    p = cmd("gen-dataset", "generate train/test records and a manifest")
    p.add_argument("--n-train", type=int, default=300)
    p.add_argument("--n-test", type=int, default=60)
    p.add_argument("--mode", choices=["raster_target", "das_target"], default="raster_target")

    p = cmd("simulate", "simulate 120 channels and their 4 composites")
    p.add_argument("--phantom", help="phantom JSON (default: random phantom from --seed)")

    p = cmd("mux", "combine 4 composites into one delay-line record")
    p.add_argument("--in", dest="input", required=True)

    p = cmd("demux", "recover 4 composites from a combined record")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--window", type=int, help="window length in samples")

    p = cmd("recon", "reconstruct an image")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--method", choices=["das", "nn", "das-composite"], default="das")
    p.add_argument("--model", help="trained model directory (for --method nn)")
    p.add_argument("--pgm", help="also write an 8-bit PGM preview here")

    p = cmd("train", "train the network on a generated dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--epochs", type=int)

    p = cmd("infer", "run a trained model over a dataset split")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=["train", "test"], default="test")

    p = cmd("bench", "timing report")
    p.add_argument("--model")
    p.add_argument("--rep-rate", type=float, default=10.0, help="laser repetition rate, Hz")
    p.add_argument("--repeats", type=int, default=3)

    p = cmd("check-schedule", "check a delay schedule for window overlaps")
    p.add_argument("--table1", nargs="+", metavar="K=V", help="T=<time> [b=<time>]")
    p.add_argument("--duration", type=parse_time, required=True, help="signal duration, e.g. 50us")
    p.add_argument("--echo-coeff", type=float, default=0.0)
    p.add_argument("--n-echoes", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        COMMANDS[args.command](args, cfg)
    except (ValueError, OSError, KeyError, TypeError) as e:
        print(f"sdpact {args.command}: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
