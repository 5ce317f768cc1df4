"""Command-line pipeline: ingest, train, generate, evaluate, benchmark, verify.

Exit codes: 0 success, 1 verification/training failure, 2 usage or input
errors. Every subcommand writes the resolved configuration snapshot next to
its outputs so a run can be reproduced from the artifact directory alone.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import classify, spectral, wgan
from .config import ConfigError, RunConfig, parse_override
from .edf import DatasetError, EdfFormatError, load_archive, load_dataset, parse_subject_list, save_archive
from .fid import fid
from .params import CheckpointError, read_checkpoint
from .topomap import channel_scalars, topomap, write_svg


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="JSON config file (flat dotted keys)")
    p.add_argument("--preset", choices=["paper", "desk"], help="configuration preset")
    p.add_argument("--seed", type=int, help="override the run seed")
    p.add_argument("--out", metavar="DIR", default=".", help="output directory")
    p.add_argument("--set", dest="overrides", metavar="KEY=VALUE", action="append",
                   default=[], help="override one config key (repeatable)")


def _resolve(args) -> RunConfig:
    overrides = dict(parse_override(item) for item in args.overrides)
    cfg = RunConfig.resolve(preset=args.preset, config_file=args.config, overrides=overrides)
    return cfg.with_seed(args.seed)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_signals(out: Path, stem: str, signals: np.ndarray, meta: dict) -> None:
    (out / f"{stem}.f64").write_bytes(signals.astype("<f8").tobytes())
    meta = {**meta, "shape": list(signals.shape), "dtype": "<f8", "order": "C"}
    with open(out / f"{stem}.json", "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")


def _load_signals(path, condition=None) -> np.ndarray:
    """Load signals from an archive dir or a .f64 file with a JSON sidecar."""
    p = Path(path)
    if p.is_dir():
        signals, _ = load_archive(p, condition=condition)
        return signals
    if p.suffix == ".f64":
        sidecar = p.with_suffix(".json")
        if not sidecar.exists():
            raise DatasetError(f"missing sidecar manifest {sidecar}")
        meta = json.loads(sidecar.read_text())
        return np.frombuffer(p.read_bytes(), dtype="<f8").reshape(meta["shape"]).copy()
    raise DatasetError(f"cannot load signals from {p}: expected archive dir or .f64 file")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_ingest(args) -> int:
    cfg = _resolve(args)
    out = _out_dir(args)
    root = Path(args.root)
    if not root.exists():
        print(f"error: EDF root not found: {root}", file=sys.stderr)
        return 2
    subjects = parse_subject_list(args.subjects)
    datasets = {}
    for condition in ("eyes_open", "eyes_closed"):
        datasets[condition] = load_dataset(
            root, subjects, condition,
            target_len=int(cfg["data.target_len"]),
            expected_channels=int(cfg["data.channels"]),
            expected_fs=float(cfg["data.fs"]),
            condition_runs=cfg.condition_runs(),
        )
    manifest = save_archive(out, datasets)
    cfg.write_snapshot(out / "config.json")
    print(f"ingested {len(manifest['entries'])} recordings "
          f"({len(subjects)} subjects x 2 conditions) into {out}")
    return 0


def cmd_train(args) -> int:
    cfg = _resolve(args)
    out = _out_dir(args)
    if args.synthetic:
        data = synthetic_sine_dataset(
            n=args.synthetic,
            channels=int(cfg["data.channels"]),
            length=int(cfg["data.target_len"]),
            fs=float(cfg["data.fs"]),
            seed=int(cfg["seed"]),
        )
        condition_note = "synthetic"
    else:
        if args.data is None:
            print("error: provide --data ARCHIVE_DIR or --synthetic N", file=sys.stderr)
            return 2
        data = _load_signals(args.data, condition=args.condition)
        condition_note = args.condition or "all"
    gen_arch, critic_arch = cfg.arch_pair(channels=data.shape[1], length=data.shape[2])
    cfg.write_snapshot(out / "config.json")
    try:
        ckpt, metrics = wgan.train(data, cfg.train_config(), gen_arch, critic_arch,
                                   out_dir=out)
    except wgan.TrainingDiverged as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"trained on {data.shape[0]} {condition_note} recordings for "
          f"{len(metrics)} iterations; checkpoint at {out / 'checkpoint.ckpt'}")
    return 0


def cmd_generate(args) -> int:
    cfg = _resolve(args)
    out = _out_dir(args)
    ckpt = read_checkpoint(args.checkpoint)
    signals = wgan.generate(ckpt, args.n, seed=int(cfg["seed"]))
    _write_signals(out, args.stem, signals,
                   {"checkpoint": str(args.checkpoint),
                    "arch_hash": ckpt.architecture_hash,
                    "seed": int(cfg["seed"])})
    cfg.write_snapshot(out / "config.json")
    print(f"wrote {signals.shape[0]} samples of shape {signals.shape[1:]} to "
          f"{out / (args.stem + '.f64')}")
    return 0


def cmd_eval_psd(args) -> int:
    cfg = _resolve(args)
    out = _out_dir(args)
    fs = float(cfg["data.fs"])
    nperseg = int(cfg["eval.nperseg"])
    overlap = float(cfg["eval.overlap"])
    curves = {}
    for name, path, condition in (("real", args.real, args.condition),
                                  ("generated", args.generated, None)):
        if path is None:
            continue
        signals = _load_signals(path, condition=condition)
        psd = spectral.dataset_psd(signals, fs=fs, nperseg=nperseg, overlap=overlap)
        psd.write_csv(out / f"psd_{name}.csv")
        curves[name] = psd.to_json()
    if not curves:
        print("error: provide --real and/or --generated", file=sys.stderr)
        return 2
    with open(out / "psd.json", "w") as f:
        json.dump(curves, f)
        f.write("\n")
    cfg.write_snapshot(out / "config.json")
    print(f"wrote {', '.join(sorted(curves))} PSD curves to {out}")
    return 0


def cmd_eval_bands(args) -> int:
    cfg = _resolve(args)
    out = _out_dir(args)
    signals = _load_signals(args.data, condition=args.condition)
    psd = spectral.dataset_psd(signals, fs=float(cfg["data.fs"]),
                               nperseg=int(cfg["eval.nperseg"]),
                               overlap=float(cfg["eval.overlap"]))
    table = spectral.band_power_table(psd)
    spectral.write_band_report(out / "band_power.json", table)
    with open(out / "band_power.csv", "w") as f:
        f.write("band,power\n")
        for band, value in sorted(table.items()):
            f.write(f"{band},{value!r}\n")
    cfg.write_snapshot(out / "config.json")
    print("band powers:", {k: round(v, 6) for k, v in sorted(table.items())})
    return 0


def cmd_eval_fid(args) -> int:
    cfg = _resolve(args)
    out = _out_dir(args)
    rng = np.random.default_rng(int(cfg["seed"]))

    real = {c: _load_signals(args.data, condition=c) for c in ("eyes_open", "eyes_closed")}
    X = np.concatenate([real["eyes_open"], real["eyes_closed"]])
    y = np.concatenate([np.zeros(len(real["eyes_open"]), dtype=int),
                        np.ones(len(real["eyes_closed"]), dtype=int)])

    clf_path = Path(args.feature_classifier) if args.feature_classifier \
        else out / "feature_cnn.ckpt"
    if clf_path.exists():
        params = classify.load_classifier(clf_path)
    else:
        arch = classify.ClassifierArch(kind="cnn", in_channels=X.shape[1], in_len=X.shape[2])
        params = classify.build_classifier(arch, np.random.default_rng(int(cfg["seed"])))
        history = classify.train_classifier(params, X, y, int(cfg["bench.epochs"]),
                                            np.random.default_rng(int(cfg["seed"])),
                                            int(cfg["bench.batch_size"]),
                                            float(cfg["bench.lr"]))
        classify.save_classifier(clf_path, params, history)

    report = {}
    for condition, gen_path in (("eyes_open", args.generated_open),
                                ("eyes_closed", args.generated_closed)):
        feats_real = classify.extract_features(params, real[condition])
        rows = {"real_vs_real": fid(feats_real, feats_real).to_json()}
        noise = rng.normal(0.0, 1.0, real[condition].shape)
        rows["real_vs_noise"] = fid(feats_real, classify.extract_features(params, noise)).to_json()
        if gen_path is not None:
            feats_gen = classify.extract_features(params, _load_signals(gen_path))
            rows["real_vs_generated"] = fid(feats_real, feats_gen).to_json()
        report[condition] = rows

    with open(out / "fid.json", "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    with open(out / "fid.csv", "w") as f:
        f.write("condition,pair,fid\n")
        for condition, rows in sorted(report.items()):
            for pair, r in sorted(rows.items()):
                f.write(f"{condition},{pair},{r['fid']!r}\n")
    cfg.write_snapshot(out / "config.json")
    for condition, rows in sorted(report.items()):
        summary = {pair: round(r["fid"], 4) for pair, r in sorted(rows.items())}
        print(condition, summary)
    return 0


def cmd_eval_topomap(args) -> int:
    cfg = _resolve(args)
    out = _out_dir(args)
    p = Path(args.data)
    signals, manifest = load_archive(p, condition=args.condition) if p.is_dir() \
        else (_load_signals(p), None)
    if args.labels:
        labels = json.loads(Path(args.labels).read_text())
    elif manifest is not None:
        labels = manifest["labels"]
    else:
        print("error: --labels required for raw signal files", file=sys.stderr)
        return 2
    if args.metric == "rms":
        metric = "rms"
    else:
        lo, hi = spectral.BANDS.get(args.metric) or tuple(map(float, args.metric.split(":")))
        metric = (lo, hi)
    values = channel_scalars(signals, metric, fs=float(cfg["data.fs"]),
                             nperseg=int(cfg["eval.nperseg"]))
    grid = topomap(values, labels, grid_size=args.grid_size)
    grid.write_json(out / "topomap.json")
    write_svg(grid, out / "topomap.svg")
    cfg.write_snapshot(out / "config.json")
    print(f"wrote topomap.json and topomap.svg to {out}")
    return 0


def cmd_bench(args) -> int:
    cfg = _resolve(args)
    out = _out_dir(args)
    real = {c: _load_signals(args.data, condition=c) for c in ("eyes_open", "eyes_closed")}
    X = np.concatenate([real["eyes_open"], real["eyes_closed"]])
    y = np.concatenate([np.zeros(len(real["eyes_open"]), dtype=int),
                        np.ones(len(real["eyes_closed"]), dtype=int)])
    pools = {}
    if args.generated_open:
        pools[0] = _load_signals(args.generated_open)
    if args.generated_closed:
        pools[1] = _load_signals(args.generated_closed)
    bench_cfg = cfg.bench_config(ratio=args.ratio, trials=args.trials)
    report = classify.augmentation_bench(X, y, pools, bench_cfg)
    report.write_json(out / "bench.json")
    report.write_csv(out / "bench.csv")
    cfg.write_snapshot(out / "config.json")
    for kind, row in report.rows.items():
        print(f"{kind}: real {row['real_accuracy']:.4f} -> augmented "
              f"{row['augmented_accuracy']:.4f} (improvement {row['improvement']:+.4f})")
    return 0


def cmd_gradcheck(args) -> int:
    from .autodiff.gradcheck import standard_suite

    cfg = _resolve(args)
    cfg.write_snapshot(_out_dir(args) / "config.json")
    results = standard_suite(seed=int(cfg["seed"]), configs_per_op=args.configs)
    width = max(len(r.name) for r in results)
    failures = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name:<{width}}  rel_err={r.rel_err:.3e}  tol={r.tolerance:g}")
        failures += not r.passed
    print(f"{len(results) - failures}/{len(results)} gradient checks passed")
    return 1 if failures else 0


def synthetic_sine_dataset(n: int, channels: int, length: int, fs: float,
                           seed: int, freq_hz: float = 10.0,
                           noise_std: float = 0.05) -> np.ndarray:
    """Fixed-frequency sines with random phase per channel, plus noise."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 83]))
    t = np.arange(length) / fs
    phases = rng.uniform(0.0, 2.0 * np.pi, (n, channels, 1))
    clean = 0.8 * np.sin(2.0 * np.pi * freq_hz * t[None, None, :] + phases)
    return clean + noise_std * rng.normal(size=(n, channels, length))


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eegwgan",
        description="Train and evaluate a gradient-penalty Wasserstein GAN for EEG synthesis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse EDF files into a normalized dataset archive")
    p.add_argument("root", help="BCI2000-layout EDF tree (root/S001/S001R01.edf)")
    p.add_argument("--subjects", required=True, help="subject list file (# comments allowed)")
    _add_common(p)
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("train", help="train the WGAN on an ingested archive")
    p.add_argument("--data", help="dataset archive directory from ingest")
    p.add_argument("--condition", choices=["eyes_open", "eyes_closed"])
    p.add_argument("--synthetic", type=int, metavar="N",
                   help="train on N synthetic sine recordings instead of an archive")
    _add_common(p)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("generate", help="sample signals from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--stem", default="samples", help="output file stem")
    _add_common(p)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("eval-psd", help="Welch PSD curves for real and/or generated signals")
    p.add_argument("--real", help="archive dir or .f64 file")
    p.add_argument("--generated", help="archive dir or .f64 file")
    p.add_argument("--condition", choices=["eyes_open", "eyes_closed"])
    _add_common(p)
    p.set_defaults(fn=cmd_eval_psd)

    p = sub.add_parser("eval-bands", help="band-power table for a signal source")
    p.add_argument("--data", required=True)
    p.add_argument("--condition", choices=["eyes_open", "eyes_closed"])
    _add_common(p)
    p.set_defaults(fn=cmd_eval_bands)

    p = sub.add_parser("eval-fid", help="Frechet distance using CNN features")
    p.add_argument("--data", required=True, help="archive dir with both conditions")
    p.add_argument("--generated-open", help="generated eyes-open samples (.f64)")
    p.add_argument("--generated-closed", help="generated eyes-closed samples (.f64)")
    p.add_argument("--feature-classifier",
                   help="feature CNN checkpoint: loaded if present, else trained and saved here")
    _add_common(p)
    p.set_defaults(fn=cmd_eval_fid)

    p = sub.add_parser("eval-topomap", help="topographic map of a per-channel scalar")
    p.add_argument("--data", required=True)
    p.add_argument("--condition", choices=["eyes_open", "eyes_closed"])
    p.add_argument("--metric", default="alpha",
                   help="'rms', a band name (alpha, delta, ...), or lo:hi in Hz")
    p.add_argument("--labels", help="JSON list of channel labels (for raw .f64 input)")
    p.add_argument("--grid-size", type=int, default=64)
    _add_common(p)
    p.set_defaults(fn=cmd_eval_topomap)

    p = sub.add_parser("bench", help="real-vs-augmented classifier benchmark")
    p.add_argument("--data", required=True, help="archive dir with both conditions")
    p.add_argument("--generated-open", help="generated eyes-open pool (.f64)")
    p.add_argument("--generated-closed", help="generated eyes-closed pool (.f64)")
    p.add_argument("--ratio", type=float, help="generated:real ratio override")
    p.add_argument("--trials", type=int, help="trial count override")
    _add_common(p)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("gradcheck", help="finite-difference verification of all gradients")
    p.add_argument("--configs", type=int, default=3, help="random configurations per op")
    _add_common(p)
    p.set_defaults(fn=cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, DatasetError, EdfFormatError, CheckpointError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
