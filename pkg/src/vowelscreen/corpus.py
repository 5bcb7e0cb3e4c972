"""Corpus ingestion: audio, clinical metadata and feature-matrix persistence.

Recording identity comes from the filename convention
``<speaker>_<vowel>_<style>.wav`` (speaker ids may contain underscores; the
last two tokens are vowel and style), optionally overridden by a JSON
manifest mapping filenames to identities.

Feature matrices are persisted as UTF-8 CSV with ``speaker_id`` first and the
values printed with 17 significant digits, so save -> load round-trips
bit-exactly.  A JSON sidecar carries provenance (extraction config hash).
"""

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.io.wavfile
import scipy.signal

from .errors import (IdentityParseError, MetadataError, UnreadableFileError,
                     UnsupportedFormatError)

log = logging.getLogger(__name__)

VOWELS = ("a", "e", "i", "o", "u")
STYLES = ("s", "l", "ll", "ls")
TARGET_RATE = 16000
SUPPORTED_RATES = (16000, 48000)
PRESENCE_THRESHOLD = 0.8  # feature kept if present for at least this share of speakers


@dataclass
class Recording:
    """One vowel utterance with parsed identity."""

    speaker_id: str
    vowel: str
    style: str
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.vowel not in VOWELS:
            raise ValueError(f"vowel {self.vowel!r} not in {VOWELS}")
        if self.style not in STYLES:
            raise ValueError(f"style {self.style!r} not in {STYLES}")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.size == 0:
            raise ValueError("empty recording")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("non-finite samples")
        if np.max(np.abs(self.samples)) > 1.0 + 1e-9:
            raise ValueError("samples exceed [-1, 1]")

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


CLINICAL_SCORES = ("pd_duration", "updrs3", "updrs4", "rbdsq", "fog", "nmss", "bdi",
                   "mmse", "led")
METADATA_COLUMNS = ("speaker_id", "group", "sex", "age") + CLINICAL_SCORES


@dataclass
class ClinicalRecord:
    """Per-speaker metadata; clinical scores are absent (None) for controls."""

    speaker_id: str
    group: str
    sex: str
    age: float
    pd_duration: float | None = None
    updrs3: float | None = None
    updrs4: float | None = None
    rbdsq: float | None = None
    fog: float | None = None
    nmss: float | None = None
    bdi: float | None = None
    mmse: float | None = None
    led: float | None = None

    def __post_init__(self):
        if self.group not in ("PD", "HC"):
            raise MetadataError(f"group must be PD or HC, got {self.group!r}")
        if self.sex not in ("F", "M"):
            raise MetadataError(f"sex must be F or M, got {self.sex!r}")
        for name in CLINICAL_SCORES:
            value = getattr(self, name)
            if value is None:
                continue
            if self.group == "HC":
                raise MetadataError(f"{self.speaker_id}: HC row carries clinical score {name}")
            if value < 0:
                raise MetadataError(f"{self.speaker_id}: negative {name}")
        if self.mmse is not None and self.mmse > 30:
            raise MetadataError(f"{self.speaker_id}: MMSE {self.mmse} > 30")


# ---------------------------------------------------------------------------
# audio

def parse_identity(filename: str, manifest: dict | None = None) -> tuple[str, str, str]:
    """(speaker_id, vowel, style) from a file name or manifest entry."""
    if manifest and filename in manifest:
        entry = manifest[filename]
        try:
            return entry["speaker_id"], entry["vowel"], entry["style"]
        except (KeyError, TypeError) as exc:
            raise IdentityParseError(f"manifest entry for {filename} incomplete: {exc}") from None
    stem = Path(filename).stem
    parts = stem.split("_")
    if len(parts) < 3:
        raise IdentityParseError(
            f"cannot parse identity from {filename!r}; expected <speaker>_<vowel>_<style>.wav")
    speaker, vowel, style = "_".join(parts[:-2]), parts[-2], parts[-1]
    if vowel not in VOWELS or style not in STYLES:
        raise IdentityParseError(f"{filename!r}: vowel/style tokens {vowel!r}/{style!r} invalid")
    return speaker, vowel, style


def load_recording(path: str | Path, manifest: dict | None = None,
                   allowed_rates=SUPPORTED_RATES) -> Recording:
    """Read a mono PCM WAV (16- or 24-bit, 16 or 48 kHz), normalize to
    [-1, 1] and attach identity.  Raises distinct errors for unreadable files,
    unsupported formats and unparseable identity."""
    path = Path(path)
    speaker, vowel, style = parse_identity(path.name, manifest)
    try:
        rate, data = scipy.io.wavfile.read(path)
    except FileNotFoundError:
        raise UnreadableFileError(f"{path}: no such file") from None
    except Exception as exc:
        raise UnreadableFileError(f"{path}: not readable as WAV ({exc})") from None
    if data.ndim != 1:
        raise UnsupportedFormatError(f"{path}: expected mono, got {data.ndim} channels")
    if rate not in allowed_rates:
        raise UnsupportedFormatError(f"{path}: sample rate {rate} not in {allowed_rates}")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        # scipy returns 24-bit PCM left-justified in int32
        samples = data.astype(np.float64) / 2147483648.0
    else:
        raise UnsupportedFormatError(f"{path}: unsupported sample format {data.dtype}")
    return Recording(speaker_id=speaker, vowel=vowel, style=style,
                     samples=samples, sample_rate=int(rate))


def write_recording(rec: Recording, path: str | Path) -> None:
    """Write 16-bit PCM WAV."""
    data = np.clip(np.round(rec.samples * 32767.0), -32768, 32767).astype(np.int16)
    scipy.io.wavfile.write(Path(path), rec.sample_rate, data)


_RESAMPLE_TAPS = 191  # windowed sinc, ~0.02 dB passband ripple to 7 kHz, >60 dB stop


def resample_to_16k(rec: Recording) -> Recording:
    """Windowed-sinc low-pass then 3:1 decimation of 48 kHz input; identity on
    16 kHz input.  Output length is ceil(n/3)."""
    if rec.sample_rate == TARGET_RATE:
        return rec
    if rec.sample_rate != 48000:
        raise UnsupportedFormatError(f"cannot resample from {rec.sample_rate} Hz")
    h = scipy.signal.firwin(_RESAMPLE_TAPS, 7400.0, window=("kaiser", 9.0), fs=48000)
    delay = (_RESAMPLE_TAPS - 1) // 2
    n = rec.samples.size
    filtered = scipy.signal.fftconvolve(rec.samples, h, mode="full")[delay: delay + n]
    out = filtered[::3]
    peak = float(np.max(np.abs(out)))
    if peak > 1.0:  # filter overshoot can exceed full scale by a hair
        out = out / peak
    return Recording(speaker_id=rec.speaker_id, vowel=rec.vowel, style=rec.style,
                     samples=out, sample_rate=TARGET_RATE)


def load_corpus_dir(audio_dir: str | Path) -> list[Recording]:
    """Load and resample every WAV under a directory (sorted for determinism);
    honours an optional manifest.json beside the audio files."""
    audio_dir = Path(audio_dir)
    manifest = None
    manifest_path = audio_dir / "manifest.json"
    if manifest_path.exists():
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
    out = []
    for path in sorted(audio_dir.glob("*.wav")):
        out.append(resample_to_16k(load_recording(path, manifest)))
    return out


# ---------------------------------------------------------------------------
# metadata

def load_metadata(path: str | Path) -> list[ClinicalRecord]:
    """Parse the clinical metadata CSV; HC rows leave score cells empty."""
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise MetadataError(f"{path}: {exc}") from None
    with fh:
        reader = csv.DictReader(fh)
        header = tuple(reader.fieldnames or ())
        missing = [c for c in METADATA_COLUMNS if c not in header]
        if missing:
            raise MetadataError(f"{path}: missing mandatory columns {missing}")
        records = []
        seen = set()
        for line_no, row in enumerate(reader, start=2):
            sid = (row["speaker_id"] or "").strip()
            if not sid:
                raise MetadataError(f"{path}:{line_no}: empty speaker_id")
            if sid in seen:
                raise MetadataError(f"{path}:{line_no}: duplicate speaker_id {sid!r}")
            seen.add(sid)
            values = {}
            for name in ("age",) + CLINICAL_SCORES:
                cell = (row[name] or "").strip()
                if cell == "":
                    values[name] = None
                else:
                    try:
                        values[name] = float(cell)
                    except ValueError:
                        raise MetadataError(
                            f"{path}:{line_no}: non-numeric {name} value {cell!r}") from None
            if values["age"] is None:
                raise MetadataError(f"{path}:{line_no}: age is mandatory")
            records.append(ClinicalRecord(speaker_id=sid, group=row["group"].strip(),
                                          sex=row["sex"].strip(), **values))
    return records


# ---------------------------------------------------------------------------
# feature matrices

@dataclass
class FeatureMatrix:
    """Speakers x named scalar features, fully finite after imputation."""

    feature_names: list[str]
    speaker_ids: list[str]
    rows: np.ndarray

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float64)
        if self.rows.shape != (len(self.speaker_ids), len(self.feature_names)):
            raise ValueError("matrix shape does not match names/ids")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise ValueError("duplicate feature names")
        if self.rows.size and not np.all(np.isfinite(self.rows)):
            raise ValueError("non-finite entries after imputation")

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.feature_names.index(name)]

    def select(self, names: list[str]) -> "FeatureMatrix":
        idx = [self.feature_names.index(n) for n in names]
        return FeatureMatrix(list(names), list(self.speaker_ids), self.rows[:, idx])


def assemble_matrix(per_speaker_features: dict[str, dict[str, float]],
                    cohort: list[ClinicalRecord],
                    presence_threshold: float = PRESENCE_THRESHOLD) -> FeatureMatrix:
    """Stack per-speaker named scalars into a cohort matrix.

    Features missing (or non-finite) for a speaker are imputed with the cohort
    median; features present for fewer than ``presence_threshold`` of speakers
    are dropped with a warning.  Row order follows the cohort, column order is
    lexicographic, so the result is independent of dict iteration order.
    """
    ids = [r.speaker_id for r in cohort]
    names = sorted({name for feats in per_speaker_features.values()
                    for name in feats})
    kept, matrix = [], []
    columns = {}
    for name in names:
        col = np.array([per_speaker_features.get(sid, {}).get(name, np.nan) for sid in ids],
                       dtype=np.float64)
        present = np.isfinite(col)
        if present.sum() < presence_threshold * len(ids) or present.sum() == 0:
            log.warning("dropping feature %r: present for %d/%d speakers",
                        name, int(present.sum()), len(ids))
            continue
        if not present.all():
            col = col.copy()
            col[~present] = np.median(col[present])
        kept.append(name)
        columns[name] = col
    matrix = (np.column_stack([columns[n] for n in kept]) if kept
              else np.empty((len(ids), 0)))
    return FeatureMatrix(kept, ids, matrix)


def save_matrix(matrix: FeatureMatrix, path: str | Path,
                provenance: dict | None = None) -> None:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["speaker_id"] + matrix.feature_names)
        for sid, row in zip(matrix.speaker_ids, matrix.rows):
            writer.writerow([sid] + [f"{v:.17g}" for v in row])
    if provenance is not None:
        with open(path.with_suffix(".json"), "w", encoding="utf-8") as fh:
            json.dump(provenance, fh, indent=2, sort_keys=True)
            fh.write("\n")


def load_matrix(path: str | Path) -> FeatureMatrix:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "speaker_id":
            raise MetadataError(f"{path}: first column must be speaker_id")
        names = header[1:]
        ids, rows = [], []
        for row in reader:
            ids.append(row[0])
            rows.append([float(v) for v in row[1:]])
    return FeatureMatrix(names, ids, np.asarray(rows, dtype=np.float64))


def labels_for(matrix: FeatureMatrix, cohort: list[ClinicalRecord]) -> np.ndarray:
    """0/1 labels aligned with matrix rows; positive class (1) is PD."""
    by_id = {r.speaker_id: r for r in cohort}
    try:
        return np.array([1 if by_id[sid].group == "PD" else 0 for sid in matrix.speaker_ids],
                        dtype=np.int64)
    except KeyError as missing:
        raise MetadataError(f"speaker {missing} missing from metadata") from None
