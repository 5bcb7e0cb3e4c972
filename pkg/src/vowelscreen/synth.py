"""Deterministic synthetic vowel cohorts.

The clinical corpus behind the reference study is private, so every
end-to-end test here runs on synthesized vowels with known ground truth:
a glottal pulse train with controlled period/amplitude perturbation, shaped
by formant resonators, plus noise mixed to a target HNR.

Pulses are band-limited (windowed-sinc) impulses placed at *fractional*
sample positions, so injected jitter is not quantized to the sample grid and
the cycle detector can recover it to well under 0.1 %.

A single severity latent in [0, 1] drives both the acoustics (more jitter and
shimmer, less HNR, compressed formant space, reduced intensity range) and the
synthetic clinical scores, so correlation machinery downstream has planted
signal to find.
"""

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import ClinicalRecord, Recording, write_recording

SAMPLE_RATE = 16000
VOWELS = ("a", "e", "i", "o", "u")
STYLES = ("s", "l", "ll", "ls")

# (F1, F2, F3) targets per vowel, roughly male Czech values
VOWEL_FORMANTS = {
    "a": (730.0, 1250.0, 2500.0),
    "e": (500.0, 1800.0, 2550.0),
    "i": (300.0, 2250.0, 2900.0),
    "o": (450.0, 880.0, 2530.0),
    "u": (330.0, 800.0, 2450.0),
}
FORMANT_BANDWIDTHS = (90.0, 110.0, 160.0)


@dataclass(frozen=True)
class SynthesisParams:
    f0: float
    jitter_pct: float = 0.0
    shimmer_pct: float = 0.0
    hnr_target: float = 30.0
    formant_targets: tuple[float, float, float] = VOWEL_FORMANTS["a"]
    duration: float = 1.0
    intensity_db: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (60.0 <= self.f0 <= 400.0):
            raise ValueError(f"f0 {self.f0} outside [60, 400] Hz")
        if not (0.0 <= self.jitter_pct <= 10.0 and 0.0 <= self.shimmer_pct <= 10.0):
            raise ValueError("jitter/shimmer percentages must lie in [0, 10]")
        if self.duration <= 0.05:
            raise ValueError("duration too short")


def _sinc_pulse(offset: float, half_width: int, cutoff_ratio: float = 0.875) -> np.ndarray:
    """Band-limited unit impulse centred `offset` samples into the kernel.
    Blackman-windowed sinc, evaluated at the fractional position so pulse
    timing is not quantized to the sample grid."""
    n = np.arange(-half_width, half_width + 1, dtype=np.float64) - offset
    u = np.clip(n / (half_width + 1), -1.0, 1.0)
    blackman = 0.42 + 0.5 * np.cos(math.pi * u) + 0.08 * np.cos(2.0 * math.pi * u)
    return cutoff_ratio * np.sinc(cutoff_ratio * n) * blackman


def _resonator_coeffs(freq: float, bw: float, fs: int) -> tuple[np.ndarray, np.ndarray]:
    r = math.exp(-math.pi * bw / fs)
    theta = 2.0 * math.pi * freq / fs
    b0 = (1.0 - r) * math.sqrt(1.0 - 2.0 * r * math.cos(2.0 * theta) + r * r)
    return np.array([b0]), np.array([1.0, -2.0 * r * math.cos(theta), r * r])


def _perturbation(rng: np.random.Generator, count: int, pct: float) -> np.ndarray:
    """Zero-mean draws scaled so the expected mean |successive difference|
    equals pct/100 (the quantity the local jitter/shimmer measures report)."""
    if pct <= 0.0:
        return np.zeros(count)
    sigma = (pct / 100.0) * math.sqrt(math.pi) / 2.0
    return np.clip(rng.normal(0.0, sigma, count), -3.0 * sigma, 3.0 * sigma)


def synthesize_vowel(p: SynthesisParams, speaker_id: str = "syn", vowel: str = "a",
                     style: str = "l", bandwidths=FORMANT_BANDWIDTHS) -> Recording:
    """Render one vowel; deterministic per (params, seed)."""
    import scipy.signal

    rng = np.random.default_rng(p.seed)
    fs = SAMPLE_RATE
    n_samples = int(round(p.duration * fs))
    t_margin = 0.02
    period = 1.0 / p.f0
    max_pulses = int((p.duration - 2 * t_margin) / period) + 2

    eps = _perturbation(rng, max_pulses, p.jitter_pct)
    eta = _perturbation(rng, max_pulses, p.shimmer_pct)

    times, amps = [], []
    t = t_margin
    k = 0
    while t < p.duration - t_margin and k < max_pulses:
        times.append(t)
        amps.append(1.0 + eta[k])
        t += period * (1.0 + eps[k])
        k += 1

    half_width = 10
    excitation = np.zeros(n_samples + 2 * half_width + 2)
    for tk, ak in zip(times, amps):
        pos = tk * fs
        base = int(math.floor(pos))
        kernel = _sinc_pulse(pos - base, half_width)
        excitation[base: base + kernel.size] += ak * kernel
    excitation = excitation[half_width: half_width + n_samples]

    # glottal spectral tilt (~ -6 dB/oct): real flow spectra fall off, which
    # keeps the waveform peak smooth enough for cycle-accurate analysis
    voiced = scipy.signal.lfilter([1.0], [1.0, -0.97], excitation)
    for freq, bw in zip(p.formant_targets, bandwidths):
        if freq is None:
            continue
        b, a = _resonator_coeffs(freq, bw, fs)
        voiced = scipy.signal.lfilter(b, a, voiced)

    noise = scipy.signal.lfilter([1.0], [1.0, -0.97], rng.standard_normal(n_samples))
    for freq, bw in zip(p.formant_targets, bandwidths):
        if freq is None:
            continue
        b, a = _resonator_coeffs(freq, bw, fs)
        noise = scipy.signal.lfilter(b, a, noise)
    p_voiced = float(np.mean(voiced ** 2))
    p_noise = float(np.mean(noise ** 2))
    if p_noise > 0.0:
        noise *= math.sqrt((p_voiced / 10.0 ** (p.hnr_target / 10.0)) / p_noise)

    x = voiced + noise
    peak_target = min(0.98, 0.5 * 10.0 ** (p.intensity_db / 20.0))
    peak = float(np.max(np.abs(x)))
    if peak > 0.0:
        x *= peak_target / peak
    return Recording(speaker_id=speaker_id, vowel=vowel, style=style,
                     samples=x, sample_rate=fs)


# ---------------------------------------------------------------------------
# cohort generation

@dataclass(frozen=True)
class CohortProfile:
    """Ranges of the severity latent and how acoustics follow it."""

    pd_severity: tuple[float, float] = (0.45, 1.0)
    hc_severity: tuple[float, float] = (0.0, 0.12)
    jitter_base: float = 0.35
    jitter_span: float = 2.2
    shimmer_base: float = 1.6
    shimmer_span: float = 5.5
    hnr_base: float = 26.0
    hnr_span: float = -12.0
    formant_compression: float = 0.28
    loud_span_db: float = 6.0
    soft_span_db: float = -9.0
    intensity_compression: float = 0.55
    duration_s: float = 0.6
    duration_sustained: float = 1.1


STYLE_F0_FACTOR = {"s": 1.0, "l": 1.0, "ll": 1.12, "ls": 0.96}


def _derived_rng(seed: int, *key: int) -> np.random.Generator:
    """Deterministic generator for a spawn key; independent of draw order."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def _clinical_scores(rng: np.random.Generator, severity: float) -> dict[str, float]:
    """Synthetic clinical battery; all correlate with the severity latent, LED
    only weakly so that partialing it out does not erase the planted signal."""
    s = severity
    return {
        "pd_duration": round(max(0.5, 1.5 + 11.0 * s + rng.normal(0, 1.0)), 1),
        "updrs3": round(max(0.0, 8.0 + 32.0 * s + rng.normal(0, 2.5)), 0),
        "updrs4": round(max(0.0, 0.5 + 6.0 * s + rng.normal(0, 0.7)), 0),
        "rbdsq": round(max(0.0, 1.0 + 7.0 * s + rng.normal(0, 0.8)), 0),
        "fog": round(max(0.0, 1.0 + 12.0 * s + rng.normal(0, 1.2)), 0),
        "nmss": round(max(0.0, 12.0 + 55.0 * s + rng.normal(0, 5.0)), 0),
        "bdi": round(max(0.0, 4.0 + 20.0 * s + rng.normal(0, 2.0)), 0),
        "mmse": round(min(30.0, 30.0 - 6.5 * s + rng.normal(0, 0.5)), 0),
        "led": round(max(100.0, 620.0 + 320.0 * s + rng.normal(0, 260.0)), 0),
    }


def generate_cohort(n_pd: int, n_hc: int, seed: int = 0,
                    profile: CohortProfile = CohortProfile()
                    ) -> tuple[list[Recording], list[ClinicalRecord]]:
    """Synthetic cohort: per subject 20 recordings (5 vowels x 4 styles) plus a
    clinical record; PD subjects draw from the high-severity range."""
    if n_pd < 5 or n_hc < 5:
        raise ValueError("need at least 5 subjects per group")
    recordings: list[Recording] = []
    records: list[ClinicalRecord] = []
    groups = [("PD", i, profile.pd_severity) for i in range(n_pd)]
    groups += [("HC", i, profile.hc_severity) for i in range(n_hc)]
    for group, i, sev_range in groups:
        sid = f"{'P' if group == 'PD' else 'C'}{i + 1:03d}"
        group_key = 0 if group == "PD" else 1
        subj_rng = _derived_rng(seed, group_key, i)
        severity = float(subj_rng.uniform(*sev_range))
        sex = "F" if i % 2 == 0 else "M"
        f0 = float(subj_rng.uniform(175.0, 215.0) if sex == "F" else subj_rng.uniform(105.0, 140.0))
        age = round(float(subj_rng.uniform(58.0, 78.0)), 0)
        scores = _clinical_scores(subj_rng, severity) if group == "PD" else {}
        records.append(ClinicalRecord(speaker_id=sid, group=group, sex=sex, age=age, **scores))

        compression = 1.0 - profile.formant_compression * severity
        for vi, vowel in enumerate(VOWELS):
            f1, f2, f3 = VOWEL_FORMANTS[vowel]
            scale = 1.12 if sex == "F" else 1.0
            centre_f1, centre_f2 = 550.0, 1400.0
            targets = (scale * (centre_f1 + (f1 - centre_f1) * compression),
                       scale * (centre_f2 + (f2 - centre_f2) * compression),
                       scale * f3)
            for si, style in enumerate(STYLES):
                rec_rng = _derived_rng(seed, 2, group_key, i, vi, si)
                jit = max(0.05, profile.jitter_base + profile.jitter_span * severity
                          + float(rec_rng.normal(0, 0.08)))
                shim = max(0.3, profile.shimmer_base + profile.shimmer_span * severity
                           + float(rec_rng.normal(0, 0.25)))
                hnr_db = profile.hnr_base + profile.hnr_span * severity + float(rec_rng.normal(0, 0.8))
                if style == "ls":
                    hnr_db -= 2.0
                intensity_span = 1.0 - profile.intensity_compression * severity
                intensity = {"s": 0.0, "l": 0.0,
                             "ll": profile.loud_span_db * intensity_span,
                             "ls": profile.soft_span_db * intensity_span}[style]
                params = SynthesisParams(
                    f0=f0 * STYLE_F0_FACTOR[style],
                    jitter_pct=min(8.0, jit),
                    shimmer_pct=min(9.0, shim),
                    hnr_target=hnr_db,
                    formant_targets=targets,
                    duration=profile.duration_s if style == "s" else profile.duration_sustained,
                    intensity_db=intensity,
                    seed=int(rec_rng.integers(0, 2 ** 62)),
                )
                recordings.append(synthesize_vowel(params, speaker_id=sid, vowel=vowel, style=style))
    return recordings, records


def write_cohort(recordings: list[Recording], records: list[ClinicalRecord],
                 out_dir: str | Path) -> None:
    """Emit the corpus in the layout the ingestion side expects:
    <speaker>_<vowel>_<style>.wav plus metadata.csv."""
    out = Path(out_dir)
    audio_dir = out / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)
    for rec in recordings:
        write_recording(rec, audio_dir / f"{rec.speaker_id}_{rec.vowel}_{rec.style}.wav")
    with open(out / "metadata.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["speaker_id", "group", "sex", "age", "pd_duration", "updrs3",
                         "updrs4", "rbdsq", "fog", "nmss", "bdi", "mmse", "led"])
        for r in records:
            def cell(v):
                return "" if v is None else f"{v:g}"
            writer.writerow([r.speaker_id, r.group, r.sex, cell(r.age), cell(r.pd_duration),
                             cell(r.updrs3), cell(r.updrs4), cell(r.rbdsq), cell(r.fog),
                             cell(r.nmss), cell(r.bdi), cell(r.mmse), cell(r.led)])
    manifest = {"n_recordings": len(recordings), "n_speakers": len(records)}
    with open(out / "cohort.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
