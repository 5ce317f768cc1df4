"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines as they complete. The desk-scale training criterion (5) dominates the
runtime; everything here finishes in well under its stated budget on a
laptop-class machine.
"""

import os
import time
from pathlib import Path

import numpy as np
import pytest

import eegwgan.autodiff as ad
from eegwgan.autodiff.gradcheck import standard_suite
from eegwgan.classify import BenchConfig, augmentation_bench
from eegwgan.cli import main as cli_main
from eegwgan.edf import EdfFormatError, Recording, make_header, parse_edf, write_edf
from eegwgan.fid import fid
from eegwgan.spectral import band_power, dataset_psd, fft, welch_psd
from eegwgan.wgan import TrainConfig, generate, full_size_arch, train
from eegwgan.wgan import build_critic, build_generator, critic_forward, generator_forward


def report(number: int, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    print(f"\nACCEPTANCE {number} [{status}] {detail}")


def acceptance_sine_dataset(n=64, channels=2, length=128, fs=160.0, freq=10.0,
                            seed=7) -> np.ndarray:
    """The desk-scale synthetic task: a fixed-frequency, fixed-phase sine
    plus per-sample noise. Sample diversity comes from the noise, which keeps
    the distribution gap closable within the 2000-iteration budget."""
    rng = np.random.default_rng(seed)
    t = np.arange(length) / fs
    phase = rng.uniform(0, 2 * np.pi)
    clean = 0.75 * np.sin(2 * np.pi * freq * t + phase)
    return clean[None, None, :] + 0.1 * rng.normal(size=(n, channels, length))


def test_criterion_1_gradient_suite():
    """Every op and the penalty composite vs central finite differences."""
    start = time.monotonic()
    results = standard_suite(seed=0, configs_per_op=2)
    elapsed = time.monotonic() - start
    failed = [r for r in results if not r.passed]
    ok = not failed and len(results) >= 20 and elapsed < 60.0
    report(1, ok, f"{len(results)} checks, worst rel err "
                  f"{max(r.rel_err for r in results):.2e}, {elapsed:.1f}s")
    assert len(results) >= 20
    assert elapsed < 60.0, f"gradient suite took {elapsed:.1f}s"
    assert not failed, f"failing checks: {[r.name for r in failed]}"


FULL_SIZE_GENERATOR_ROWS = [
    (8100,),
    (150, 52), (150, 106), (150, 104), (150, 102),
    (150, 206), (150, 204), (150, 202),
    (150, 406), (150, 404), (150, 402),
    (150, 806), (150, 804), (150, 802),
    (150, 1606), (150, 1604), (150, 1602),
    (150, 3206), (150, 3204),
    (64, 3204), (64, 3152),
]


def test_criterion_2_shape_conformance():
    """Full-size per-layer traces match the frozen row table."""
    start = time.monotonic()
    g_arch, c_arch = full_size_arch()
    gen = build_generator(g_arch, np.random.default_rng(0))
    critic = build_critic(c_arch, np.random.default_rng(1))
    g_trace, c_trace = [], []
    with ad.no_record():
        out = generator_forward(gen, ad.Tensor(np.zeros((1, 500))), mode="train",
                                trace=g_trace)
        critic_forward(critic, ad.Tensor(np.zeros((1, 64, 3152))), trace=c_trace)
    elapsed = time.monotonic() - start
    gen_ok = g_trace == FULL_SIZE_GENERATOR_ROWS and out.shape == (1, 64, 3152)
    critic_ok = c_trace[-3:] == [(150, 45), (64, 45), (64, 1)]
    ok = gen_ok and critic_ok and elapsed < 5.0
    report(2, ok, f"generator rows {len(g_trace)}/21, critic tail {c_trace[-3:]}, "
                  f"{elapsed:.2f}s")
    assert gen_ok, f"generator trace mismatch: {g_trace}"
    assert critic_ok, f"critic tail mismatch: {c_trace[-3:]}"
    assert elapsed < 5.0, f"shape trace took {elapsed:.2f}s"


def test_criterion_3_fid_exactness():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(80, 16))
    same = fid(x, x).value
    a = rng.normal(0.0, 1.0, (4000, 1))
    b = rng.normal(3.0, 1.0, (4000, 1))
    closed = (a.mean() - b.mean()) ** 2 + (a.std(ddof=1) - b.std(ddof=1)) ** 2
    got = fid(a, b).value
    sym = abs(fid(a[:200], b[:200]).value - fid(b[:200], a[:200]).value)
    ok = same <= 1e-8 and abs(got - closed) / closed <= 0.05 and sym <= 1e-8
    report(3, ok, f"fid(a,a)={same:.2e}, 1-D closed form err "
                  f"{abs(got - closed) / closed:.2%}, symmetry {sym:.2e}")
    assert same <= 1e-8
    assert got == pytest.approx(closed, rel=0.05)
    assert sym <= 1e-8


def naive_dft(x):
    n = len(x)
    k = np.arange(n)
    return np.array([np.sum(x * np.exp(-2j * np.pi * ki * k / n)) for ki in range(n)])


def test_criterion_4_spectral_correctness():
    fs = 160.0
    t = np.arange(3152) / fs
    psd = welch_psd(np.sin(2 * np.pi * 10.0 * t), fs=fs, nperseg=256, overlap=0.5)
    peak_bin = int(np.argmax(psd.power))
    nearest = int(round(10.0 * 256 / fs))
    rng = np.random.default_rng(4)
    x = rng.normal(size=3152)
    noise_psd = welch_psd(x, fs=fs, nperseg=256)
    integral = np.trapezoid(noise_psd.power, noise_psd.freqs)
    integral_err = abs(integral - x.var()) / x.var()
    worst_dft = 0.0
    for exp in range(1, 11):
        v = rng.normal(size=2 ** exp)
        worst_dft = max(worst_dft, float(np.max(np.abs(fft(v) - naive_dft(v)))))
    ok = peak_bin == nearest and integral_err < 0.10 and worst_dft <= 1e-9
    report(4, ok, f"sine peak bin {peak_bin} (nearest {nearest}), Parseval err "
                  f"{integral_err:.2%}, fft-vs-DFT {worst_dft:.1e}")
    assert peak_bin == nearest
    assert integral_err < 0.10
    assert worst_dft <= 1e-9


@pytest.fixture(scope="session")
def desk_run():
    """The criterion-5 training run, shared with the supplementary checks."""
    data = acceptance_sine_dataset()
    config = TrainConfig(iterations=2000, batch_size=32, n_critic=5, lambda_gp=10.0,
                         lr=1e-3, seed=0)
    start = time.monotonic()
    ckpt, metrics = train(data, config)
    minutes = (time.monotonic() - start) / 60.0
    return {"data": data, "ckpt": ckpt, "metrics": metrics, "minutes": minutes}


def test_criterion_5_desk_scale_training(desk_run):
    """2000 iterations on the synthetic task inside the time budget."""
    data, ckpt, metrics = desk_run["data"], desk_run["ckpt"], desk_run["metrics"]
    minutes = desk_run["minutes"]

    norms = [m["mean_grad_norm"] for m in metrics]
    w = [abs(m["wasserstein_estimate"]) for m in metrics]
    norm_tail = float(np.mean(norms[-100:]))
    w_first = float(np.mean(w[:100]))
    w_last = float(np.mean(w[-100:]))

    generated = generate(ckpt, 64, seed=123)
    real_bin = int(np.argmax(dataset_psd(data, fs=160.0, nperseg=128).power))
    gen_bin = int(np.argmax(dataset_psd(generated, fs=160.0, nperseg=128).power))

    ok_a = 0.75 <= norm_tail <= 1.25
    ok_b = w_last < w_first
    ok_c = abs(gen_bin - real_bin) <= 2
    ok_time = minutes < 10.0
    report(5, ok_a and ok_b and ok_c and ok_time,
           f"(a) grad norm {norm_tail:.3f}, (b) |W| {w_first:.3f} -> {w_last:.3f}, "
           f"(c) PSD bin {gen_bin} vs {real_bin}, {minutes:.1f} min")
    assert minutes < 10.0, f"training took {minutes:.1f} min"
    assert ok_a, f"last-100 mean interpolate gradient norm {norm_tail:.3f}"
    assert ok_b, f"|W| last100 {w_last:.3f} not below first100 {w_first:.3f}"
    assert ok_c, f"generated PSD argmax {gen_bin} vs real {real_bin}"


def test_supplementary_generated_signals_stay_in_range(desk_run):
    """After desk-scale training on normalized data, at least 99% of generated
    values fall inside [-1, 1]."""
    generated = generate(desk_run["ckpt"], 64, seed=321)
    frac = float(np.mean(np.abs(generated) <= 1.0))
    print(f"\nSUPPLEMENTARY [in-range] {frac:.4f} of generated values in [-1, 1]")
    assert frac >= 0.99


def test_supplementary_fid_noise_ordering(desk_run):
    """Real-vs-noise distance dwarfs real-vs-generated after desk training
    (a sanity ordering: noise is far, near-copies are close)."""
    from eegwgan.classify import ClassifierArch, build_classifier, extract_features, train_classifier

    data = desk_run["data"]
    rng = np.random.default_rng(2024)
    # second condition: a slower rhythm, so the feature CNN has a real task
    t = np.arange(data.shape[2]) / 160.0
    phases = np.repeat(rng.uniform(0, 2 * np.pi, (len(data), 1, 1)), data.shape[1], axis=1)
    other = 0.75 * np.sin(2 * np.pi * 4.0 * t[None, None, :] + phases) \
        + 0.1 * rng.normal(size=data.shape)
    X = np.concatenate([data, other])
    y = np.array([0] * len(data) + [1] * len(other))
    arch = ClassifierArch(kind="cnn", in_channels=data.shape[1], in_len=data.shape[2])
    clf = build_classifier(arch, np.random.default_rng(0))
    train_classifier(clf, X, y, epochs=20, rng=np.random.default_rng(1))

    real_feats = extract_features(clf, data)
    gen_feats = extract_features(clf, generate(desk_run["ckpt"], 64, seed=77))
    noise_feats = extract_features(clf, rng.normal(size=data.shape))
    from eegwgan.fid import fid

    near = fid(real_feats, gen_feats).value
    far = fid(real_feats, noise_feats).value
    print(f"\nSUPPLEMENTARY [fid ordering] real-vs-generated {near:.3f} << "
          f"real-vs-noise {far:.3f}")
    assert far > near


def test_criterion_6_benchmark_protocol():
    def task(n, seed, delta=0.2, noise=1.0):
        """Two overlapping Gaussian classes; small samples underfit, so
        true-distribution augmentation has room to help."""
        r = np.random.default_rng(seed)
        X = np.zeros((n, 2, 32))
        y = np.tile([0, 1], n // 2)
        X[y == 0, 0], X[y == 0, 1] = delta, -delta
        X[y == 1, 0], X[y == 1, 1] = -delta, delta
        return X + noise * r.normal(size=X.shape), y

    # ratio 0: identical seeds make the two arms bitwise identical
    X, y = task(16, 0)
    zero = augmentation_bench(X, y, {}, BenchConfig(trials=3, epochs=6, ratio=0.0,
                                                    seed=1))
    zero_ok = all(row["improvement"] == 0.0 and
                  row["real_accuracy"] == row["augmented_accuracy"]
                  for row in zero.rows.values())

    # 8 reals per class, true-distribution generated pool, 20 trials
    gen_X, gen_y = task(200, 99)
    pools = {0: gen_X[gen_y == 0], 1: gen_X[gen_y == 1]}
    full = augmentation_bench(X, y, pools,
                              BenchConfig(trials=20, epochs=10, ratio=4.0, seed=2,
                                          classifiers=("fnn",)))
    improvement = full.rows["fnn"]["improvement"]
    arith_ok = all(
        abs(row["improvement"] - (row["augmented_accuracy"] - row["real_accuracy"])) <= 1e-12
        for row in list(zero.rows.values()) + list(full.rows.values())
    )
    ok = zero_ok and improvement >= 0.0 and arith_ok
    report(6, ok, f"ratio-0 improvement exactly 0: {zero_ok}; synthetic-task mean "
                  f"improvement {improvement:+.4f} over 20 trials; arithmetic to 1e-12")
    assert zero_ok
    assert improvement >= 0.0
    assert arith_ok


def test_criterion_7_edf_round_trip():
    rng = np.random.default_rng(7)
    fixtures = failures = 0
    for _ in range(50):
        ns = int(rng.integers(1, 5))
        n_rec = int(rng.integers(1, 5))
        spr = int(rng.integers(1, 40))
        labels = [f"CH{i}" for i in range(ns)]
        header = make_header(labels, n_rec, spr)
        digital = rng.integers(-32768, 32768, size=(ns, n_rec * spr)).astype(float)
        s = header.signals[0]
        rec = Recording(data=digital * s.scale() + s.offset(), fs=160.0, labels=labels)
        blob = write_edf(header, rec)
        h2, parsed = parse_edf(blob)
        recovered = np.rint((parsed.data - s.offset()) / s.scale())
        strings_ok = (h2.patient_id == header.patient_id and
                      [x.label for x in h2.signals] == labels and
                      write_edf(h2, parsed) == blob)
        fixtures += 1
        if not (np.array_equal(recovered, digital) and strings_ok):
            failures += 1

    crashes = 0
    for _ in range(300):
        blob = bytearray(write_edf(make_header(["A"], 1, 8), Recording(
            data=np.zeros((1, 8)), fs=160.0, labels=["A"])))
        for _ in range(int(rng.integers(1, 10))):
            blob[rng.integers(0, len(blob))] = rng.integers(0, 256)
        try:
            parse_edf(bytes(blob))
        except EdfFormatError:
            pass
        except Exception:
            crashes += 1
    ok = failures == 0 and crashes == 0
    report(7, ok, f"{fixtures} round-trip fixtures, {failures} failures; "
                  f"300 fuzz cases, {crashes} crashes")
    assert failures == 0
    assert crashes == 0


def test_criterion_8_cmd_train_determinism(tmp_path):
    data_dir = tmp_path / "synthetic"
    outputs = []
    for name in ("run1", "run2"):
        out = tmp_path / name
        code = cli_main(["train", "--synthetic", "16", "--preset", "desk",
                         "--set", "train.iterations=5", "--seed", "1234",
                         "--out", str(out)])
        assert code == 0
        outputs.append(((out / "checkpoint.ckpt").read_bytes(),
                        (out / "metrics.csv").read_bytes()))
    ok = outputs[0] == outputs[1]
    report(8, ok, "two seeded cmd_train runs produced bitwise-identical "
                  "checkpoints and metric logs")
    assert ok


BCI2000_ENV = "EEGWGAN_BCI2000_ROOT"
OCCIPITAL = {"O1", "OZ", "O2", "PO3", "POZ", "PO4", "PO7", "PO8"}


@pytest.mark.skipif(BCI2000_ENV not in os.environ,
                    reason=f"set {BCI2000_ENV} to a downloaded BCI2000 tree to "
                           "run the real-data alpha check (non-gating)")
def test_criterion_9_real_data_alpha():
    from eegwgan.edf import load_dataset
    from eegwgan.topomap import normalize_label

    root = Path(os.environ[BCI2000_ENV])
    subjects = sorted(p.name for p in root.iterdir()
                      if p.is_dir() and p.name.startswith("S"))[:20]
    alpha = {}
    for condition in ("eyes_open", "eyes_closed"):
        ds = load_dataset(root, subjects, condition)
        signals = ds.stack()
        labels = [normalize_label(l) for l in ds.recordings[0].labels]
        idx = [i for i, l in enumerate(labels) if l in OCCIPITAL]
        total = 0.0
        for rec in range(signals.shape[0]):
            for ch in idx:
                psd = welch_psd(signals[rec, ch], fs=160.0, nperseg=256)
                total += band_power(psd, 8.0, 13.0)
        alpha[condition] = total / (signals.shape[0] * len(idx))
    ok = alpha["eyes_closed"] > alpha["eyes_open"]
    report(9, ok, f"occipital alpha: closed {alpha['eyes_closed']:.4g} vs "
                  f"open {alpha['eyes_open']:.4g} over {len(subjects)} subjects")
    assert ok
