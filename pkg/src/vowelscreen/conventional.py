"""Clinically interpretable voice features.

F0 contour and glottal-cycle detection, the five jitter and six shimmer
variants (Praat-manual definitions, the de facto clinical standard), the
Teager-Kaiser energy operator, harmonic-to-noise ratio, glottal-to-noise
excitation ratio (Michaelis-style cross-band envelope correlation), LPC
formant tracks, and the vowel-space metrics (VSA, lnVSA, FCR, VAI, F2i/F2u).

Pitch and HNR rest on the normalized cross-correlation (NCC) of the raw
frame: unlike the window-tapered autocorrelation it reaches exactly 1.0 on a
perfectly periodic frame, which the HNR definition needs.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.signal

from . import dsp
from .errors import UnvoicedRecordingError

F0_BAND = (60.0, 500.0)  # plausible phonation band, Hz
VOICING_THRESHOLD = 0.45  # normalized autocorrelation peak
PITCH_FRAME_MS = 40.0
PITCH_HOP_MS = 10.0
OCTAVE_COST = 0.01  # per octave of lag, breaks ties toward higher F0


@dataclass
class PeriodSequence:
    """Glottal cycle lengths (seconds) with the peak amplitude of each cycle."""

    period_lengths: np.ndarray
    cycle_peak_amplitudes: np.ndarray

    def __post_init__(self):
        self.period_lengths = np.asarray(self.period_lengths, dtype=np.float64)
        self.cycle_peak_amplitudes = np.asarray(self.cycle_peak_amplitudes, dtype=np.float64)
        if self.period_lengths.shape != self.cycle_peak_amplitudes.shape:
            raise ValueError("period and amplitude sequences must align")
        if self.period_lengths.size:
            lo, hi = 1.0 / F0_BAND[1], 1.0 / F0_BAND[0]
            if np.any(self.period_lengths < lo - 1e-12) or np.any(self.period_lengths > hi + 1e-12):
                raise ValueError("period outside the plausible 60-500 Hz band")
            if np.any(self.cycle_peak_amplitudes <= 0):
                raise ValueError("cycle peak amplitudes must be positive")

    def __len__(self):
        return self.period_lengths.size


@dataclass
class JitterSet:
    """Praat-convention period perturbations; a variant is None when the
    sequence is shorter than its window."""

    local: float | None = None
    local_abs: float | None = None
    rap: float | None = None
    ppq5: float | None = None
    ddp: float | None = None

    def as_dict(self) -> dict[str, float]:
        names = {"local": self.local, "local.abs": self.local_abs, "rap": self.rap,
                 "ppq5": self.ppq5, "ddp": self.ddp}
        return {f"jitter ({k})": v for k, v in names.items() if v is not None}


@dataclass
class ShimmerSet:
    local: float | None = None
    local_db: float | None = None
    apq3: float | None = None
    apq5: float | None = None
    apq11: float | None = None
    dda: float | None = None

    def as_dict(self) -> dict[str, float]:
        names = {"local": self.local, "local.dB": self.local_db, "apq3": self.apq3,
                 "apq5": self.apq5, "apq11": self.apq11, "dda": self.dda}
        return {f"shimmer ({k})": v for k, v in names.items() if v is not None}


@dataclass
class FormantTrack:
    """Per-frame formant frequencies and bandwidths (Hz); NaN on masked frames."""

    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray
    bw1: np.ndarray
    bw2: np.ndarray
    bw3: np.ndarray
    voiced_mask: np.ndarray


@dataclass
class VowelSpaceMetrics:
    vsa: float
    ln_vsa: float | None
    fcr: float
    vai: float
    f2i_f2u: float

    def as_dict(self) -> dict[str, float]:
        out = {"vowel space (VSA)": self.vsa, "vowel space (FCR)": self.fcr,
               "vowel space (VAI)": self.vai, "vowel space (F2i/F2u)": self.f2i_f2u}
        if self.ln_vsa is not None:
            out["vowel space (lnVSA)"] = self.ln_vsa
        return out


# ---------------------------------------------------------------------------
# pitch machinery

def _ncc_curve(frame: np.ndarray, lag_min: int, lag_max: int) -> np.ndarray:
    """Normalized cross-correlation of a frame with itself for lags
    lag_min..lag_max (index 0 of the result = lag_min)."""
    x = np.asarray(frame, dtype=np.float64)
    n = x.size
    r = dsp.autocorrelation(x, lag_max)
    csq = np.concatenate(([0.0], np.cumsum(x * x)))
    total = csq[-1]
    lags = np.arange(lag_min, lag_max + 1)
    e_head = csq[n - lags]          # energy of x[0 : n-lag]
    e_tail = total - csq[lags]      # energy of x[lag : n]
    den = np.sqrt(e_head * e_tail)
    den[den <= 0.0] = np.inf
    return r[lag_min: lag_max + 1] / den


def _parabolic_peak(y: np.ndarray, i: int) -> tuple[float, float]:
    """Refine a local maximum at integer index i through its neighbours.
    Returns (fractional index, peak value)."""
    if i <= 0 or i >= y.size - 1:
        return float(i), float(y[i])
    a, b, c = y[i - 1], y[i], y[i + 1]
    denom = a - 2.0 * b + c
    if denom >= 0.0:
        return float(i), float(b)
    delta = 0.5 * (a - c) / denom
    delta = float(np.clip(delta, -0.5, 0.5))
    return i + delta, float(b - 0.25 * (a - c) * delta)


def _frame_pitch(frame: np.ndarray, sample_rate: int,
                 f0_band=F0_BAND) -> tuple[float, float] | None:
    """Best (lag in samples, NCC peak value) in the F0 search band, or None
    when the frame has no usable correlation peak."""
    lag_min = max(2, int(math.floor(sample_rate / f0_band[1])))
    lag_max = int(math.ceil(sample_rate / f0_band[0]))
    if lag_max >= frame.size:
        return None
    ncc = _ncc_curve(frame, lag_min, lag_max)
    if not np.any(np.isfinite(ncc)):
        return None
    interior = np.arange(1, ncc.size - 1)
    is_peak = (ncc[interior] > ncc[interior - 1]) & (ncc[interior] >= ncc[interior + 1])
    peaks = interior[is_peak]
    if peaks.size == 0:
        return None
    lags = peaks + lag_min
    score = ncc[peaks] - OCTAVE_COST * np.log2(lags / lag_min)
    best = peaks[int(np.argmax(score))]
    frac, value = _parabolic_peak(ncc, best)
    return frac + lag_min, min(value, 1.0)


def _pitch_frames(samples: np.ndarray, sample_rate: int) -> dsp.FrameSpec:
    spec = dsp.FrameSpec.from_ms(sample_rate, PITCH_FRAME_MS, PITCH_HOP_MS, "rectangular")
    if samples.size < spec.frame_len:
        raise UnvoicedRecordingError("recording shorter than one pitch frame")
    return spec


def f0_contour(samples: np.ndarray, sample_rate: int,
               voicing_threshold: float = VOICING_THRESHOLD,
               f0_band=F0_BAND) -> np.ndarray:
    """Per-frame F0 in Hz, NaN on unvoiced frames.

    A second pass snaps octave outliers back to the contour median: sustained
    vowels do not move by >25 % within a recording, but under noise the NCC
    peak at twice the period occasionally beats the true one.
    """
    x = np.asarray(samples, dtype=np.float64)
    spec = _pitch_frames(x, sample_rate)
    frames = dsp.frame_signal(x, spec)
    out = np.full(frames.shape[0], np.nan)
    for i, frame in enumerate(frames):
        hit = _frame_pitch(frame, sample_rate, f0_band)
        if hit is not None and hit[1] >= voicing_threshold:
            out[i] = sample_rate / hit[0]
    if not np.any(np.isfinite(out)):
        return out
    med = float(np.nanmedian(out))
    for i in np.flatnonzero(np.isfinite(out)):
        if abs(out[i] - med) <= 0.25 * med:
            continue
        narrow = (max(f0_band[0], 0.75 * med), min(f0_band[1], 1.5 * med))
        hit = _frame_pitch(frames[i], sample_rate, narrow)
        if hit is not None and hit[1] >= 0.8 * voicing_threshold:
            out[i] = sample_rate / hit[0]
        else:
            out[i] = np.nan
    return out


def _match_step(y: np.ndarray, pos: int, t_est: float, direction: int,
                span: tuple[int, int]) -> tuple[float, float] | None:
    """One waveform-matching period step from an (integer) cycle anchor.

    Correlates the cycle-sized segment around `pos` with segments one period
    away and returns (signed fractional step, peak correlation).  Matching the
    waveform shape instead of re-picking peaks keeps the period estimate
    sub-sample accurate regardless of how spiky the waveform is.
    """
    w = max(4, int(round(0.40 * t_est)))
    lo_tau = int(math.floor(0.75 * t_est))
    hi_tau = int(math.ceil(1.25 * t_est))
    if pos - w < span[0] and direction < 0:
        return None
    ref = y[pos - w: pos + w + 1]
    if ref.size < 2 * w + 1 or not np.any(ref):
        return None
    taus = np.arange(lo_tau, hi_tau + 1)
    centres = pos + direction * taus
    if centres.min() - w < span[0] or centres.max() + w >= span[1]:
        return None
    num = np.empty(taus.size)
    den = np.empty(taus.size)
    ref_energy = float(np.dot(ref, ref))
    for i, c in enumerate(centres):
        seg = y[c - w: c + w + 1]
        num[i] = float(np.dot(ref, seg))
        den[i] = float(np.dot(seg, seg))
    ncc = num / np.sqrt(ref_energy * den + 1e-300)
    best = int(np.argmax(ncc))
    frac, value = _parabolic_peak(ncc, best)
    return direction * (lo_tau + frac), value


MATCH_MIN_CORRELATION = 0.30


def estimate_f0_and_cycles(rec, voicing_threshold: float = VOICING_THRESHOLD,
                           f0_band=F0_BAND) -> tuple[np.ndarray, PeriodSequence]:
    """F0 contour plus cycle-by-cycle periods and peak amplitudes.

    Starting from the strongest waveform peak, cycle marks are walked in both
    directions by correlating each cycle with its neighbour (sub-sample
    refined), so each period is measured independently of waveform peak shape.
    The peak amplitude of each cycle is read off the raw waveform.
    Raises UnvoicedRecordingError when no frame passes the voicing threshold.
    """
    x = np.asarray(rec.samples, dtype=np.float64)
    fs = rec.sample_rate
    if x.size < int(0.1 * fs):
        raise UnvoicedRecordingError("recording shorter than 100 ms")
    contour = f0_contour(x, fs, voicing_threshold, f0_band)
    voiced = np.isfinite(contour)
    if not np.any(voiced):
        raise UnvoicedRecordingError("no voiced frames")
    spec = dsp.FrameSpec.from_ms(fs, PITCH_FRAME_MS, PITCH_HOP_MS, "rectangular")

    idx = np.flatnonzero(voiced)
    span = (idx[0] * spec.hop, min(x.size, idx[-1] * spec.hop + spec.frame_len))
    t_med = fs / float(np.nanmedian(contour))

    def local_period(pos: float) -> float:
        frame_idx = int(np.clip(round((pos - spec.frame_len // 2) / spec.hop),
                                0, contour.size - 1))
        f0 = contour[frame_idx]
        t = fs / f0 if np.isfinite(f0) else t_med
        # sustained vowels: never trust a frame that disagrees wildly with the
        # recording-level median period
        return float(np.clip(t, 0.8 * t_med, 1.25 * t_med))

    polarity = 1.0 if x[span[0] + int(np.argmax(np.abs(x[span[0]: span[1]])))] >= 0 else -1.0
    y = polarity * x

    start = span[0] + int(np.argmax(y[span[0]: span[1]]))
    marks = [float(start)]
    for direction in (1, -1):
        pos = float(start)
        while True:
            step = _match_step(y, int(round(pos)), local_period(pos), direction, span)
            if step is None or step[1] < MATCH_MIN_CORRELATION:
                break
            # step is measured from the rounded anchor, keeping per-period
            # errors independent instead of accumulating
            pos = round(pos) + step[0]
            marks.append(pos)

    marks = np.sort(np.asarray(marks))
    if marks.size < 2:
        return contour, PeriodSequence(np.empty(0), np.empty(0))
    periods = np.diff(marks) / fs

    amps = np.empty(marks.size - 1)
    for k in range(marks.size - 1):
        half = int(round(0.3 * (marks[k + 1] - marks[k])))
        a = max(0, int(round(marks[k])) - half)
        b = min(y.size - 1, int(round(marks[k])) + half)
        peak = a + int(np.argmax(y[a: b + 1]))
        amps[k] = _parabolic_peak(y, peak)[1]

    keep = ((periods >= 1.0 / f0_band[1]) & (periods <= 1.0 / f0_band[0]) & (amps > 0))
    return contour, PeriodSequence(periods[keep], amps[keep])


# ---------------------------------------------------------------------------
# perturbation measures

def _mean_abs_diff(v: np.ndarray) -> float:
    return float(np.mean(np.abs(np.diff(v))))


def _ppq(v: np.ndarray, width: int) -> float | None:
    """Mean absolute deviation from the centred moving average of `width`
    points, normalized by the overall mean."""
    if v.size < width:
        return None
    kernel = np.ones(width) / width
    smooth = np.convolve(v, kernel, mode="valid")
    centre = v[width // 2: width // 2 + smooth.size]
    return float(np.mean(np.abs(centre - smooth)) / np.mean(v))


def jitter(p: PeriodSequence) -> JitterSet:
    """Five period-perturbation variants (local, local absolute, RAP, PPQ5, DDP)."""
    t = p.period_lengths
    out = JitterSet()
    if t.size >= 2:
        out.local = _mean_abs_diff(t) / float(np.mean(t))
        out.local_abs = _mean_abs_diff(t)
    if t.size >= 3:
        out.rap = _ppq(t, 3)
        second_diff = t[2:] - 2.0 * t[1:-1] + t[:-2]
        out.ddp = float(np.mean(np.abs(second_diff)) / np.mean(t))
    if t.size >= 5:
        out.ppq5 = _ppq(t, 5)
    return out


def shimmer(p: PeriodSequence) -> ShimmerSet:
    """Six amplitude-perturbation variants (local, local dB, APQ3/5/11, DDA)."""
    a = p.cycle_peak_amplitudes
    out = ShimmerSet()
    if a.size >= 2:
        out.local = _mean_abs_diff(a) / float(np.mean(a))
        out.local_db = float(np.mean(np.abs(20.0 * np.log10(a[1:] / a[:-1]))))
    if a.size >= 3:
        out.apq3 = _ppq(a, 3)
        second_diff = a[2:] - 2.0 * a[1:-1] + a[:-2]
        out.dda = float(np.mean(np.abs(second_diff)) / np.mean(a))
    if a.size >= 5:
        out.apq5 = _ppq(a, 5)
    if a.size >= 11:
        out.apq11 = _ppq(a, 11)
    return out


def tkeo(samples: np.ndarray) -> np.ndarray:
    """Teager-Kaiser energy x[n]^2 - x[n-1] x[n+1]; both ends dropped."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 3:
        raise ValueError("TKEO needs at least 3 samples")
    return x[1:-1] ** 2 - x[:-2] * x[2:]


# ---------------------------------------------------------------------------
# noise measures

def hnr(rec, voicing_threshold: float = VOICING_THRESHOLD,
        f0_band=F0_BAND) -> np.ndarray:
    """Harmonic-to-noise ratio in dB per voiced frame:
    10 log10(r_max / (1 - r_max)) with r_max the NCC peak at the frame's F0 lag.

    Passing voicing_threshold = 0 treats every frame as voiced (useful to rate
    aperiodic material); otherwise an unvoiced recording raises.
    """
    x = np.asarray(rec.samples, dtype=np.float64)
    spec = _pitch_frames(x, rec.sample_rate)
    frames = dsp.frame_signal(x, spec)
    values = []
    for frame in frames:
        hit = _frame_pitch(frame, rec.sample_rate, f0_band)
        if hit is None or hit[1] < voicing_threshold:
            continue
        r_max = float(np.clip(hit[1], 1e-6, 1.0 - 1e-6))
        values.append(10.0 * math.log10(r_max / (1.0 - r_max)))
    if not values:
        raise UnvoicedRecordingError("no voiced frames for HNR")
    return np.asarray(values)


GNE_BAND_WIDTH = 1000.0
GNE_BAND_STEP = 300.0
GNE_MIN_SEPARATION = 500.0
GNE_MAX_LAG_S = 0.0003
GNE_LPC_ORDER = 13


def gne(rec, window_ms: float = 40.0, hop_ms: float = 20.0) -> np.ndarray:
    """Glottal-to-noise excitation ratio per analysis window, in [0, 1].

    Per window: order-13 LPC inverse filter -> residual; Hilbert envelopes of
    1000 Hz-wide bands every 300 Hz; GNE is the maximum mean-removed
    cross-correlation (over lags up to 0.3 ms) among band pairs whose centre
    distance is at least 500 Hz.
    """
    x = np.asarray(rec.samples, dtype=np.float64)
    fs = rec.sample_rate
    spec = dsp.FrameSpec.from_ms(fs, window_ms, hop_ms, "rectangular")
    if x.size < spec.frame_len:
        raise UnvoicedRecordingError("recording shorter than one GNE window")
    frames = dsp.frame_signal(x, spec)
    band_lo = np.arange(0.0, fs / 2.0 - GNE_BAND_WIDTH + 1.0, GNE_BAND_STEP)
    centres = band_lo + GNE_BAND_WIDTH / 2.0
    max_lag = max(1, int(round(GNE_MAX_LAG_S * fs)))
    out = np.empty(frames.shape[0])
    for i, frame in enumerate(frames):
        w = frame * np.hanning(frame.size)
        energy = float(np.dot(w, w))
        if energy <= 0.0:
            out[i] = 0.0
            continue
        model = dsp.levinson_durbin(dsp.autocorrelation(w, GNE_LPC_ORDER), GNE_LPC_ORDER)
        residual = scipy.signal.lfilter(np.concatenate(([1.0], model.coefficients)), [1.0], frame)
        envelopes = _band_envelopes(residual, fs, band_lo)
        out[i] = _max_band_correlation(envelopes, centres, max_lag)
    return out


def _band_envelopes(x: np.ndarray, fs: int, band_lo: np.ndarray) -> np.ndarray:
    """Hilbert envelopes of rectangular frequency bands, via one FFT."""
    n = x.size
    nfft = dsp.next_pow2(2 * n)
    spec = scipy.fft.fft(x, nfft)
    freqs = np.arange(nfft) * fs / nfft
    envs = np.empty((band_lo.size, n))
    for b, lo in enumerate(band_lo):
        mask = (freqs >= lo) & (freqs < lo + GNE_BAND_WIDTH)
        mask[nfft // 2 + 1:] = False  # analytic signal: keep positive freqs only
        analytic = scipy.fft.ifft(np.where(mask, spec, 0.0) * 2.0, nfft)[:n]
        envs[b] = np.abs(analytic)
    return envs


def _max_band_correlation(envs: np.ndarray, centres: np.ndarray, max_lag: int) -> float:
    envs = envs - envs.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.sum(envs * envs, axis=1))
    best = 0.0
    for i in range(envs.shape[0]):
        for j in range(i + 1, envs.shape[0]):
            if centres[j] - centres[i] < GNE_MIN_SEPARATION:
                continue
            if norms[i] <= 0.0 or norms[j] <= 0.0:
                continue
            for lag in range(-max_lag, max_lag + 1):
                if lag >= 0:
                    num = float(np.dot(envs[i, lag:], envs[j, : envs.shape[1] - lag]))
                else:
                    num = float(np.dot(envs[i, : envs.shape[1] + lag], envs[j, -lag:]))
                best = max(best, num / (norms[i] * norms[j]))
    return float(np.clip(best, 0.0, 1.0))


# ---------------------------------------------------------------------------
# formants and the vowel space

FORMANT_PREEMPHASIS = 0.98
FORMANT_MAX_BW = 400.0
FORMANT_MIN_HZ = 90.0
FORMANT_MAX_HZ = 7000.0


def formants(rec, frame_ms: float = 25.0, hop_ms: float = 10.0,
             voicing_threshold: float = VOICING_THRESHOLD) -> FormantTrack:
    """LPC formant track, order 2 + fs/1000, pre-emphasis 0.98.

    Complex pole angles give frequencies, radii give bandwidths
    (BW = -(fs/pi) ln |z|).  Frames with fewer than three qualifying poles
    (90 Hz < F < 7 kHz, BW < 400 Hz) are masked out.
    """
    x = np.asarray(rec.samples, dtype=np.float64)
    fs = rec.sample_rate
    order = 2 + fs // 1000
    spec = dsp.FrameSpec.from_ms(fs, frame_ms, hop_ms, "rectangular")
    frames = dsp.frame_signal(x, spec)
    window = np.hamming(spec.frame_len)
    n = frames.shape[0]
    track = FormantTrack(*(np.full(n, np.nan) for _ in range(6)), np.zeros(n, dtype=bool))
    for i, frame in enumerate(frames):
        hit = _frame_pitch(frame, fs, F0_BAND)
        if hit is None or hit[1] < voicing_threshold:
            continue
        track.voiced_mask[i] = True
        emphasized = np.append(frame[0], frame[1:] - FORMANT_PREEMPHASIS * frame[:-1]) * window
        if not np.any(emphasized):
            continue
        model = dsp.levinson_durbin(dsp.autocorrelation(emphasized, order), order)
        roots = np.roots(np.concatenate(([1.0], model.coefficients)))
        roots = roots[np.imag(roots) > 0.0]
        freqs = np.angle(roots) * fs / (2.0 * math.pi)
        bws = -(fs / math.pi) * np.log(np.abs(roots))
        ok = ((freqs > FORMANT_MIN_HZ) & (freqs < FORMANT_MAX_HZ)
              & (bws > 0.0) & (bws < FORMANT_MAX_BW))
        freqs, bws = freqs[ok], bws[ok]
        if freqs.size < 3:
            continue
        order_idx = np.argsort(freqs)
        for k, (farr, barr) in enumerate(((track.f1, track.bw1), (track.f2, track.bw2),
                                          (track.f3, track.bw3))):
            farr[i] = freqs[order_idx[k]]
            barr[i] = bws[order_idx[k]]
    return track


def vowel_space(corner_formants: dict[str, tuple[float, float]]) -> VowelSpaceMetrics:
    """Vowel-space metrics from median (F1, F2) of the corner vowels a, i, u.

    VSA is the corner-triangle area (shoelace), VAI = (F2i + F1a) /
    (F1i + F1u + F2u + F2a), FCR its reciprocal.  lnVSA is None for a
    degenerate (zero-area) triangle.
    """
    try:
        f1a, f2a = corner_formants["a"]
        f1i, f2i = corner_formants["i"]
        f1u, f2u = corner_formants["u"]
    except KeyError as missing:
        raise ValueError(f"missing corner vowel {missing}") from None
    vsa = abs(f1i * (f2a - f2u) + f1a * (f2u - f2i) + f1u * (f2i - f2a)) / 2.0
    vai = (f2i + f1a) / (f1i + f1u + f2u + f2a)
    return VowelSpaceMetrics(
        vsa=vsa,
        ln_vsa=math.log(vsa) if vsa > 0.0 else None,
        fcr=1.0 / vai,
        vai=vai,
        f2i_f2u=f2i / f2u,
    )
