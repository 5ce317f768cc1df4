"""EDF (European Data Format) codec and dataset assembly.

The format is a 256-byte ASCII header, 256 further bytes per signal, then
data records of 16-bit little-endian two's-complement samples. Parsing is
total: malformed bytes raise :class:`EdfFormatError` with the offending byte
offset, never an uncaught slicing or conversion error.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

ANNOTATION_LABEL = "EDF Annotations"

# BCI2000 baseline runs: R01 = eyes open, R02 = eyes closed.
DEFAULT_CONDITION_RUNS = {"eyes_open": 1, "eyes_closed": 2}


class EdfFormatError(ValueError):
    """Malformed EDF bytes; carries the byte offset where parsing failed."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class DatasetError(RuntimeError):
    """Problems assembling a dataset from parsed recordings."""


@dataclass
class SignalHeader:
    label: str
    transducer: str = ""
    dimension: str = "uV"
    physical_min: float = -1000.0
    physical_max: float = 1000.0
    digital_min: int = -32768
    digital_max: int = 32767
    prefilter: str = ""
    samples_per_record: int = 160
    reserved: str = ""

    def scale(self) -> float:
        return (self.physical_max - self.physical_min) / (self.digital_max - self.digital_min)

    def offset(self) -> float:
        return self.physical_min - self.scale() * self.digital_min


@dataclass
class EdfHeader:
    version: str = "0"
    patient_id: str = ""
    recording_id: str = ""
    start_date: str = "01.01.00"
    start_time: str = "00.00.00"
    reserved: str = ""
    n_records: int = 0
    record_duration: float = 1.0
    signals: list[SignalHeader] = field(default_factory=list)

    @property
    def n_signals(self) -> int:
        return len(self.signals)

    @property
    def header_bytes(self) -> int:
        return 256 + 256 * self.n_signals


@dataclass
class Recording:
    """One subject/condition sample: channels x samples in physical units."""

    data: np.ndarray  # [channels, samples] float64
    fs: float
    labels: list[str]
    condition: Optional[str] = None
    subject: Optional[str] = None

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]


@dataclass
class Dataset:
    """Uniformly-shaped recordings, one per subject, single condition."""

    recordings: list[Recording]

    def __len__(self) -> int:
        return len(self.recordings)

    def stack(self) -> np.ndarray:
        if not self.recordings:
            return np.zeros((0, 0, 0))
        return np.stack([r.data for r in self.recordings])

    def validate_uniform(self) -> None:
        shapes = {r.data.shape for r in self.recordings}
        if len(shapes) > 1:
            raise DatasetError(f"recordings have differing shapes: {sorted(shapes)}")


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def _text(data: bytes, offset: int, width: int, what: str) -> str:
    end = offset + width
    if end > len(data):
        raise EdfFormatError(f"truncated while reading {what}", offset)
    try:
        return data[offset:end].decode("ascii").rstrip()
    except UnicodeDecodeError:
        raise EdfFormatError(f"non-ASCII bytes in {what}", offset) from None


def _int(data: bytes, offset: int, width: int, what: str) -> int:
    raw = _text(data, offset, width, what).strip()
    try:
        return int(raw)
    except ValueError:
        raise EdfFormatError(f"expected integer for {what}, got {raw!r}", offset) from None


def _float(data: bytes, offset: int, width: int, what: str) -> float:
    raw = _text(data, offset, width, what).strip()
    try:
        value = float(raw)
    except ValueError:
        raise EdfFormatError(f"expected number for {what}, got {raw!r}", offset) from None
    if not np.isfinite(value):
        raise EdfFormatError(f"non-finite value for {what}: {raw!r}", offset)
    return value


def parse_edf(data: bytes, keep_annotations: bool = False) -> tuple[EdfHeader, Recording]:
    """Decode EDF bytes into a header and a physical-unit recording.

    Annotation signals (EDF+) are skipped with a warning unless
    ``keep_annotations``. Signals must share one samples-per-record value to
    form the channel matrix.
    """
    if len(data) < 256:
        raise EdfFormatError(f"file is {len(data)} bytes; EDF needs a 256-byte header", len(data))

    version = _text(data, 0, 8, "version")
    patient_id = _text(data, 8, 80, "patient id")
    recording_id = _text(data, 88, 80, "recording id")
    start_date = _text(data, 168, 8, "start date")
    start_time = _text(data, 176, 8, "start time")
    declared_header_bytes = _int(data, 184, 8, "header byte count")
    reserved = _text(data, 192, 44, "reserved")
    n_records = _int(data, 236, 8, "number of data records")
    record_duration = _float(data, 244, 8, "record duration")
    ns = _int(data, 252, 4, "signal count")

    if ns < 1:
        raise EdfFormatError(f"signal count must be positive, got {ns}", 252)
    expected_header = 256 + 256 * ns
    if declared_header_bytes != expected_header:
        raise EdfFormatError(
            f"header byte count {declared_header_bytes} != 256 + 256*{ns} = {expected_header}", 184
        )
    if len(data) < expected_header:
        raise EdfFormatError(
            f"file is {len(data)} bytes but the header alone needs {expected_header}", len(data)
        )
    if record_duration <= 0:
        raise EdfFormatError(f"record duration must be positive, got {record_duration}", 244)

    signals = []
    for i in range(ns):
        label = _text(data, 256 + 16 * i, 16, f"label of signal {i}")
        transducer = _text(data, 256 + 16 * ns + 80 * i, 80, f"transducer of signal {i}")
        dimension = _text(data, 256 + 96 * ns + 8 * i, 8, f"dimension of signal {i}")
        pmin = _float(data, 256 + 104 * ns + 8 * i, 8, f"physical min of signal {i}")
        pmax = _float(data, 256 + 112 * ns + 8 * i, 8, f"physical max of signal {i}")
        dmin = _int(data, 256 + 120 * ns + 8 * i, 8, f"digital min of signal {i}")
        dmax = _int(data, 256 + 128 * ns + 8 * i, 8, f"digital max of signal {i}")
        prefilter = _text(data, 256 + 136 * ns + 80 * i, 80, f"prefilter of signal {i}")
        spr = _int(data, 256 + 216 * ns + 8 * i, 8, f"samples per record of signal {i}")
        reserved_s = _text(data, 256 + 224 * ns + 32 * i, 32, f"reserved of signal {i}")

        if dmin == dmax:
            raise EdfFormatError(
                f"signal {i} ({label!r}): digital min equals digital max ({dmin}); "
                "physical scaling would divide by zero", 256 + 120 * ns + 8 * i
            )
        if dmin > dmax:
            raise EdfFormatError(
                f"signal {i} ({label!r}): digital min {dmin} > digital max {dmax}",
                256 + 120 * ns + 8 * i,
            )
        if pmin >= pmax:
            raise EdfFormatError(
                f"signal {i} ({label!r}): physical min {pmin} >= physical max {pmax}",
                256 + 104 * ns + 8 * i,
            )
        if spr < 1:
            raise EdfFormatError(
                f"signal {i} ({label!r}): samples per record must be >= 1, got {spr}",
                256 + 216 * ns + 8 * i,
            )
        signals.append(SignalHeader(label, transducer, dimension, pmin, pmax, dmin, dmax,
                                    prefilter, spr, reserved_s))

    header = EdfHeader(version=version, patient_id=patient_id, recording_id=recording_id,
                       start_date=start_date, start_time=start_time, reserved=reserved,
                       n_records=n_records, record_duration=record_duration, signals=signals)

    record_samples = sum(s.samples_per_record for s in signals)
    record_bytes = 2 * record_samples
    body = len(data) - expected_header
    if n_records < 0:
        # Streaming writers may leave -1; infer from the payload size.
        if record_bytes == 0 or body % record_bytes != 0:
            raise EdfFormatError(
                f"record count is unknown (-1) and payload ({body} bytes) is not a "
                f"multiple of the record size ({record_bytes})", expected_header
            )
        n_records = body // record_bytes
        header.n_records = n_records
    needed = n_records * record_bytes
    if body < needed:
        raise EdfFormatError(
            f"truncated data records: need {needed} bytes for {n_records} records, "
            f"found {body}", expected_header + body
        )

    raw = np.frombuffer(data, dtype="<i2", count=n_records * record_samples,
                        offset=expected_header)
    raw = raw.reshape(n_records, record_samples)

    keep = []
    start = 0
    for i, s in enumerate(signals):
        sl = slice(start, start + s.samples_per_record)
        start += s.samples_per_record
        if s.label == ANNOTATION_LABEL and not keep_annotations:
            warnings.warn(f"skipping annotation signal {i}", stacklevel=2)
            continue
        keep.append((s, sl))

    if not keep:
        raise EdfFormatError("no data signals left after skipping annotations", 256)
    sprs = {s.samples_per_record for s, _ in keep}
    if len(sprs) > 1:
        raise EdfFormatError(
            f"signals have differing samples-per-record {sorted(sprs)}; "
            "cannot form a channel matrix", 256
        )

    channels = np.empty((len(keep), n_records * keep[0][0].samples_per_record))
    labels = []
    for ci, (s, sl) in enumerate(keep):
        digital = raw[:, sl].reshape(-1).astype(np.float64)
        channels[ci] = digital * s.scale() + s.offset()
        labels.append(s.label)

    fs = keep[0][0].samples_per_record / record_duration
    return header, Recording(data=channels, fs=fs, labels=labels)


# ---------------------------------------------------------------------------
# writing
# ---------------------------------------------------------------------------

def _pad(value: str, width: int, what: str) -> bytes:
    try:
        raw = value.encode("ascii")
    except UnicodeEncodeError:
        raise ValueError(f"{what} must be ASCII, got {value!r}") from None
    if len(raw) > width:
        raise ValueError(f"{what} is {len(raw)} bytes; the field holds {width}")
    return raw.ljust(width)


def _format_number(value: float, width: int, what: str) -> bytes:
    if value == int(value) and abs(value) < 10 ** width:
        text = str(int(value))
    else:
        text = repr(float(value))
        if len(text) > width:
            text = f"{value:.{max(width - 7, 1)}g}"
    if len(text) > width:
        raise ValueError(f"{what} value {value!r} does not fit in {width} ASCII bytes")
    return text.encode("ascii").ljust(width)


def write_edf(header: EdfHeader, recording: Recording) -> bytes:
    """Encode a recording as EDF bytes; parse_edf inverts it bitwise.

    Physical values are converted back to digital with the header's affine
    map; values that round outside the digital range are an error, never
    clipped.
    """
    ns = header.n_signals
    if ns != recording.n_channels:
        raise ValueError(f"header declares {ns} signals, recording has {recording.n_channels}")
    for i, s in enumerate(header.signals):
        expected = header.n_records * s.samples_per_record
        if recording.data.shape[1] != expected:
            raise ValueError(
                f"signal {i}: recording has {recording.data.shape[1]} samples, the header "
                f"layout needs {expected} ({header.n_records} records x {s.samples_per_record})"
            )

    parts = [
        _pad(header.version, 8, "version"),
        _pad(header.patient_id, 80, "patient id"),
        _pad(header.recording_id, 80, "recording id"),
        _pad(header.start_date, 8, "start date"),
        _pad(header.start_time, 8, "start time"),
        _format_number(header.header_bytes, 8, "header byte count"),
        _pad(header.reserved, 44, "reserved"),
        _format_number(header.n_records, 8, "record count"),
        _format_number(header.record_duration, 8, "record duration"),
        _format_number(ns, 4, "signal count"),
    ]
    for s in header.signals:
        parts.append(_pad(s.label, 16, "label"))
    for s in header.signals:
        parts.append(_pad(s.transducer, 80, "transducer"))
    for s in header.signals:
        parts.append(_pad(s.dimension, 8, "dimension"))
    for s in header.signals:
        parts.append(_format_number(s.physical_min, 8, "physical min"))
    for s in header.signals:
        parts.append(_format_number(s.physical_max, 8, "physical max"))
    for s in header.signals:
        parts.append(_format_number(s.digital_min, 8, "digital min"))
    for s in header.signals:
        parts.append(_format_number(s.digital_max, 8, "digital max"))
    for s in header.signals:
        parts.append(_pad(s.prefilter, 80, "prefilter"))
    for s in header.signals:
        parts.append(_format_number(s.samples_per_record, 8, "samples per record"))
    for s in header.signals:
        parts.append(_pad(s.reserved, 32, "signal reserved"))

    digital = np.empty((ns, recording.data.shape[1]), dtype="<i2")
    for i, s in enumerate(header.signals):
        d = np.rint((recording.data[i] - s.offset()) / s.scale())
        lo, hi = d.min(initial=0), d.max(initial=0)
        if lo < s.digital_min or hi > s.digital_max:
            raise ValueError(
                f"signal {i} ({s.label!r}): values map to digital range "
                f"[{int(lo)}, {int(hi)}] outside [{s.digital_min}, {s.digital_max}]"
            )
        digital[i] = d.astype("<i2")

    records = []
    for r in range(header.n_records):
        for i, s in enumerate(header.signals):
            spr = s.samples_per_record
            records.append(digital[i, r * spr : (r + 1) * spr].tobytes())
    return b"".join(parts) + b"".join(records)


def make_header(labels, n_records: int, samples_per_record: int, fs: float = 160.0,
                physical_range=(-1000.0, 1000.0), digital_range=(-32768, 32767)) -> EdfHeader:
    """Convenience header for fixtures and round-trip tests."""
    signals = [
        SignalHeader(label=label, physical_min=physical_range[0], physical_max=physical_range[1],
                     digital_min=digital_range[0], digital_max=digital_range[1],
                     samples_per_record=samples_per_record)
        for label in labels
    ]
    return EdfHeader(n_records=n_records, record_duration=samples_per_record / fs,
                     signals=signals)


# ---------------------------------------------------------------------------
# preprocessing and dataset assembly
# ---------------------------------------------------------------------------

def preprocess(recording: Recording, target_len: int = 3152) -> Recording:
    """Truncate to the first ``target_len`` samples and min-max normalize
    each channel to [-1, 1]."""
    if recording.n_samples < target_len:
        raise DatasetError(
            f"recording has {recording.n_samples} samples; need at least {target_len}"
        )
    cut = recording.data[:, :target_len]
    lo = cut.min(axis=1, keepdims=True)
    hi = cut.max(axis=1, keepdims=True)
    flat = np.nonzero((hi - lo).ravel() == 0)[0]
    if flat.size:
        ch = int(flat[0])
        raise DatasetError(
            f"channel {ch} ({recording.labels[ch]!r}) is constant over the first "
            f"{target_len} samples; min-max normalization is undefined"
        )
    norm = 2.0 * (cut - lo) / (hi - lo) - 1.0
    return Recording(data=norm, fs=recording.fs, labels=list(recording.labels),
                     condition=recording.condition, subject=recording.subject)


def parse_subject_list(path) -> list[str]:
    """Newline-separated subject ids; '#' starts a comment."""
    subjects = []
    for line in Path(path).read_text().splitlines():
        entry = line.split("#", 1)[0].strip()
        if entry:
            subjects.append(entry)
    return subjects


def load_dataset(root, subject_ids, condition: str, target_len: int = 3152,
                 expected_channels: int = 64, expected_fs: float = 160.0,
                 condition_runs: Optional[dict] = None) -> Dataset:
    """Parse and preprocess one baseline run per subject.

    Expects the BCI2000 tree: root/S001/S001R01.edf with R01/R02 the
    eyes-open/eyes-closed baselines (configurable via ``condition_runs``).
    """
    runs = dict(DEFAULT_CONDITION_RUNS if condition_runs is None else condition_runs)
    if condition not in runs:
        raise DatasetError(f"unknown condition {condition!r}; expected one of {sorted(runs)}")
    run = runs[condition]
    root = Path(root)
    recordings = []
    for subject in subject_ids:
        path = root / subject / f"{subject}R{run:02d}.edf"
        if not path.exists():
            raise DatasetError(f"subject {subject}: missing {path}")
        _, rec = parse_edf(path.read_bytes())
        if rec.n_channels != expected_channels:
            raise DatasetError(
                f"subject {subject}: {rec.n_channels} channels, expected {expected_channels}"
            )
        if abs(rec.fs - expected_fs) > 1e-9:
            raise DatasetError(f"subject {subject}: sampling rate {rec.fs}, expected {expected_fs}")
        rec.subject = subject
        rec.condition = condition
        recordings.append(preprocess(rec, target_len))
    ds = Dataset(recordings)
    ds.validate_uniform()
    return ds


# ---------------------------------------------------------------------------
# dataset archive (raw float64 arrays + JSON manifest)
# ---------------------------------------------------------------------------

def save_archive(out_dir, datasets: dict[str, Dataset]) -> dict:
    """Write per-recording raw float64 arrays plus a manifest; returns it."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    shape = None
    labels = None
    fs = None
    for condition, ds in sorted(datasets.items()):
        for rec in ds.recordings:
            blob = rec.data.astype("<f8").tobytes()
            name = f"{rec.subject}_{condition}.f64"
            (out / name).write_bytes(blob)
            entries.append({
                "subject": rec.subject,
                "condition": condition,
                "file": name,
                "sha256": hashlib.sha256(blob).hexdigest(),
            })
            shape = list(rec.data.shape)
            labels = rec.labels
            fs = rec.fs
    manifest = {"fs": fs, "shape": shape, "labels": labels, "entries": entries}
    with open(out / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return manifest


def load_archive(archive_dir, condition: Optional[str] = None) -> tuple[np.ndarray, dict]:
    """Read back an archive as a stacked [N, C, L] array plus the manifest."""
    root = Path(archive_dir)
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise DatasetError(f"no manifest.json under {root}")
    manifest = json.loads(manifest_path.read_text())
    shape = tuple(manifest["shape"])
    arrays = []
    for entry in manifest["entries"]:
        if condition is not None and entry["condition"] != condition:
            continue
        blob = (root / entry["file"]).read_bytes()
        if hashlib.sha256(blob).hexdigest() != entry["sha256"]:
            raise DatasetError(f"checksum mismatch for {entry['file']}")
        arrays.append(np.frombuffer(blob, dtype="<f8").reshape(shape))
    if not arrays:
        raise DatasetError(
            f"archive {root} holds no recordings" +
            (f" for condition {condition!r}" if condition else "")
        )
    return np.stack(arrays), manifest
