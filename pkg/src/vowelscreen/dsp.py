"""Shared signal primitives: framing, spectra, autocorrelation, linear prediction, cepstra.

LPC sign convention used everywhere in this package: the analysis polynomial is
A(z) = 1 + a[1] z^-1 + ... + a[p] z^-p and the predictor is
x_hat[n] = sum_k (-a[k]) x[n-k].  For a single pole rho this gives a[1] = -rho.
"""

from dataclasses import dataclass

import numpy as np
import scipy.fft

WINDOWS = ("hamming", "hann", "rectangular")


@dataclass(frozen=True)
class FrameSpec:
    """Frame geometry.  25 ms / 10 ms Hamming is the package default; the
    recording protocol itself specifies no frame geometry, so these are
    configuration, not ground truth."""

    frame_len: int
    hop: int
    window: str = "hamming"

    def __post_init__(self):
        if not (0 < self.hop <= self.frame_len):
            raise ValueError(f"need 0 < hop <= frame_len, got hop={self.hop}, frame_len={self.frame_len}")
        if self.window not in WINDOWS:
            raise ValueError(f"unknown window {self.window!r}")

    @staticmethod
    def from_ms(sample_rate: int, frame_ms: float = 25.0, hop_ms: float = 10.0,
                window: str = "hamming") -> "FrameSpec":
        return FrameSpec(int(round(sample_rate * frame_ms / 1000.0)),
                         int(round(sample_rate * hop_ms / 1000.0)), window)


@dataclass
class LpcModel:
    """All-pole model 1/A(z) with A(z) = 1 + sum a[k] z^-k.

    gain is the square root of the forward prediction-error energy, so
    ln(gain**2) is the zeroth cepstral coefficient of the model spectrum.
    reflection holds the Levinson reflection coefficients k[1..p]; for a
    non-degenerate frame all |k[i]| < 1.
    """

    order: int
    coefficients: np.ndarray  # a[1..p]
    gain: float
    reflection: np.ndarray  # k[1..p]


def window_function(kind: str, length: int) -> np.ndarray:
    if kind == "hamming":
        return np.hamming(length)
    if kind == "hann":
        return np.hanning(length)
    if kind == "rectangular":
        return np.ones(length)
    raise ValueError(f"unknown window {kind!r}")


def frame_count(n_samples: int, spec: FrameSpec) -> int:
    return (n_samples - spec.frame_len) // spec.hop + 1


def frame_signal(samples: np.ndarray, spec: FrameSpec) -> np.ndarray:
    """Slice a signal into windowed frames, shape (n_frames, frame_len)."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size < spec.frame_len:
        raise ValueError(f"signal length {x.size} shorter than one frame ({spec.frame_len})")
    n = frame_count(x.size, spec)
    idx = np.arange(spec.frame_len)[None, :] + spec.hop * np.arange(n)[:, None]
    return x[idx] * window_function(spec.window, spec.frame_len)[None, :]


def next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


def power_spectrum(frame: np.ndarray, nfft: int | None = None) -> np.ndarray:
    """One-sided power spectrum, scaled so that doubling the interior bins and
    summing recovers the frame energy (Parseval)."""
    frame = np.asarray(frame, dtype=np.float64)
    if nfft is None:
        nfft = next_pow2(frame.size)
    if frame.size > nfft:
        raise ValueError(f"frame length {frame.size} exceeds nfft {nfft}")
    spec = scipy.fft.rfft(frame, nfft)
    return (spec.real ** 2 + spec.imag ** 2) / nfft


def autocorrelation(frame: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased sample autocorrelation r[0..max_lag]; r[0] is the frame energy."""
    frame = np.asarray(frame, dtype=np.float64)
    n = frame.size
    if max_lag >= n:
        raise ValueError(f"max_lag {max_lag} must be < frame length {n}")
    nfft = next_pow2(2 * n)
    spec = scipy.fft.rfft(frame, nfft)
    r = scipy.fft.irfft(spec.real ** 2 + spec.imag ** 2, nfft)
    return r[: max_lag + 1]


DIAGONAL_LOADING = 1e-9


def levinson_durbin(r: np.ndarray, order: int) -> LpcModel:
    """Levinson-Durbin recursion on an autocorrelation sequence.

    A relative diagonal loading of 1e-9 * r[0] keeps near-silent frames from
    producing reflection coefficients on the unit circle.
    """
    r = np.asarray(r, dtype=np.float64)
    if order >= r.size:
        raise ValueError(f"order {order} needs {order + 1} autocorrelation lags, got {r.size}")
    if r[0] <= 0.0:
        from .errors import DegenerateFrameError

        raise DegenerateFrameError("zero-energy frame, LPC undefined")
    r = r.copy()
    r[0] += DIAGONAL_LOADING * r[0]
    a = np.zeros(order + 1)
    a[0] = 1.0
    k = np.zeros(order)
    err = r[0]
    for i in range(1, order + 1):
        acc = r[i] + a[1:i] @ r[1:i][::-1]
        ki = -acc / err
        k[i - 1] = ki
        a[1: i + 1] += ki * a[i - 1:: -1][: i]
        err *= 1.0 - ki * ki
    return LpcModel(order=order, coefficients=a[1:], gain=float(np.sqrt(max(err, 0.0))),
                    reflection=k)


def cepstrum_from_lpc(model: LpcModel, n_coeffs: int) -> np.ndarray:
    """Cepstrum c[0..n_coeffs] of the all-pole model via the standard recursion.

    c[0] = ln(gain**2); for n >= 1
    c[n] = -a[n] - sum_{k=1}^{n-1} (k/n) c[k] a[n-k]   (a[n] = 0 beyond the order).
    """
    if model.gain <= 0.0:
        raise ValueError("zero gain, log-cepstrum undefined")
    a = np.concatenate(([0.0], model.coefficients))  # a[0] unused
    p = model.order
    c = np.zeros(n_coeffs + 1)
    c[0] = np.log(model.gain ** 2)
    for n in range(1, n_coeffs + 1):
        acc = a[n] if n <= p else 0.0
        lo = max(1, n - p)
        for k in range(lo, n):
            acc += (k / n) * c[k] * a[n - k]
        c[n] = -acc
    return c


def dct_ii(vec: np.ndarray, n_out: int | None = None) -> np.ndarray:
    """Orthonormal DCT-II, optionally truncated to the first n_out coefficients."""
    out = scipy.fft.dct(np.asarray(vec, dtype=np.float64), type=2, norm="ortho")
    return out if n_out is None else out[:n_out]


def idct_ii(vec: np.ndarray, n_out: int) -> np.ndarray:
    """Inverse of dct_ii when no truncation happened."""
    return scipy.fft.idct(np.asarray(vec, dtype=np.float64), type=2, norm="ortho", n=n_out)
