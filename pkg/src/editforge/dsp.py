"""Signal kernels: STFT pair, phase-vocoder scaling, biquad filters, FFT
convolution, YIN pitch tracking, and percentile-floor spectral gating."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import sosfilt

from .audio import AudioBuffer, sinc_resample
from .errors import EmptyInputError, ParameterError

DEFAULT_N_FFT = 1024
DEFAULT_HOP = 256

YIN_THRESHOLD = 0.15
YIN_F_MIN = 60.0
YIN_F_MAX = 400.0


def hann(n: int) -> np.ndarray:
    return 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / n)


@dataclass(frozen=True)
class Stft:
    """Complex spectrogram frames (num_frames x n_fft//2+1), centered analysis."""

    frames: np.ndarray
    n_fft: int
    hop: int
    sample_rate: int
    window: str = "hann"


def stft(buf: AudioBuffer, n_fft: int = DEFAULT_N_FFT, hop: int = DEFAULT_HOP) -> Stft:
    if len(buf) < n_fft:
        raise EmptyInputError(f"need at least {n_fft} samples for one frame, got {len(buf)}")
    frames = _stft_array(buf.samples, n_fft, hop)
    return Stft(frames=frames, n_fft=n_fft, hop=hop, sample_rate=buf.sample_rate)


def istft(s: Stft, length: int) -> AudioBuffer:
    y = _istft_array(s.frames, s.n_fft, s.hop, length)
    return AudioBuffer(y, s.sample_rate)


def _stft_array(x: np.ndarray, n_fft: int, hop: int) -> np.ndarray:
    if not (0 < hop <= n_fft):
        raise ParameterError(f"hop must be in (0, n_fft], got {hop}")
    pad = n_fft // 2
    n_frames = 1 + max(0, math.ceil((len(x) + 2 * pad - n_fft) / hop))
    total = n_fft + (n_frames - 1) * hop
    xp = np.zeros(total)
    xp[pad : pad + len(x)] = x
    idx = np.arange(n_fft)[None, :] + hop * np.arange(n_frames)[:, None]
    return np.fft.rfft(xp[idx] * hann(n_fft)[None, :], axis=1)


def _istft_array(frames: np.ndarray, n_fft: int, hop: int, length: int) -> np.ndarray:
    win = hann(n_fft)
    chunks = np.fft.irfft(frames, n=n_fft, axis=1) * win[None, :]
    pad = n_fft // 2
    total = n_fft + (len(frames) - 1) * hop
    acc = np.zeros(total)
    wacc = np.zeros(total)
    w2 = win * win
    for i in range(len(frames)):
        acc[i * hop : i * hop + n_fft] += chunks[i]
        wacc[i * hop : i * hop + n_fft] += w2
    out = acc[pad : pad + length] / np.maximum(wacc[pad : pad + length], 1e-12)
    if length > len(out):
        out = np.pad(out, (0, length - len(out)))
    return out


def _local_peaks(mag: np.ndarray) -> np.ndarray:
    """Indices of strict-or-plateau local maxima above a small absolute floor."""
    left = np.r_[True, mag[1:] >= mag[:-1]]
    right = np.r_[mag[:-1] > mag[1:], True]
    pk = left & right & (mag > 1e-10 * (mag.max() + 1e-300))
    return np.flatnonzero(pk)


def _lock_phases(phase_acc, src_phase, mag):
    """Identity phase locking: slave every bin to its nearest spectral peak."""
    peaks = _local_peaks(mag)
    if len(peaks) == 0:
        return phase_acc
    pos = np.searchsorted(peaks, np.arange(len(mag)))
    lo = peaks[np.clip(pos - 1, 0, len(peaks) - 1)]
    hi = peaks[np.clip(pos, 0, len(peaks) - 1)]
    nearest = np.where(np.abs(hi - np.arange(len(mag))) < np.abs(np.arange(len(mag)) - lo), hi, lo)
    return phase_acc[nearest] + (src_phase - src_phase[nearest])


def _phase_vocoder(frames: np.ndarray, rate: float, n_fft: int, hop: int) -> np.ndarray:
    """Resample a frame sequence in time by `rate` (>1 = fewer frames = faster)."""
    n_src, n_bins = frames.shape
    omega = 2 * np.pi * np.arange(n_bins) * hop / n_fft
    steps = np.arange(0, max(n_src - 1, 1), rate)
    mag_all = np.abs(frames)
    phase_all = np.angle(frames)
    out = np.empty((len(steps), n_bins), dtype=complex)
    phase_acc = phase_all[0].copy()
    for i, t in enumerate(steps):
        j = int(t)
        frac = t - j
        j1 = min(j + 1, n_src - 1)
        mag = (1 - frac) * mag_all[j] + frac * mag_all[j1]
        emit = _lock_phases(phase_acc, phase_all[j], mag)
        out[i] = mag * np.exp(1j * emit)
        dphi = phase_all[j1] - phase_all[j] - omega
        dphi -= 2 * np.pi * np.round(dphi / (2 * np.pi))
        phase_acc = phase_acc + omega + dphi
    return out


def time_scale(buf: AudioBuffer, factor: float) -> AudioBuffer:
    """Change speed without changing pitch; output duration = input / factor."""
    if not (0.25 <= factor <= 4.0):
        raise ParameterError(f"time-scale factor {factor} outside [0.25, 4.0]")
    if factor == 1.0:
        return buf
    s = stft(buf)
    target = int(round(len(buf) / factor))
    frames = _phase_vocoder(s.frames, factor, s.n_fft, s.hop)
    return istft(Stft(frames, s.n_fft, s.hop, s.sample_rate), target)


def pitch_scale(buf: AudioBuffer, semitones: int) -> AudioBuffer:
    """Shift pitch by whole semitones at constant duration (vocoder + resample)."""
    if abs(semitones) > 12:
        raise ParameterError(f"pitch shift {semitones} outside +/-12 semitones")
    if semitones == 0:
        return buf
    p = 2.0 ** (semitones / 12.0)
    stretched = time_scale(buf, 1.0 / p)
    y = sinc_resample(stretched.samples, 1.0 / p)
    return AudioBuffer(y, buf.sample_rate)


@dataclass(frozen=True)
class BiquadCascade:
    """Series second-order sections; each row is (b0, b1, b2, a1, a2), a0 = 1."""

    sections: np.ndarray
    design: dict

    def as_sos(self) -> np.ndarray:
        b = self.sections[:, :3]
        a = np.column_stack([np.ones(len(self.sections)), self.sections[:, 3:]])
        return np.hstack([b, a])


def _rbj_section(kind: str, f0: float, q: float, sample_rate: int, gain_db: float = 0.0):
    w0 = 2 * np.pi * f0 / sample_rate
    cw, sw = np.cos(w0), np.sin(w0)
    alpha = sw / (2 * q)
    if kind == "lowpass":
        b = np.array([(1 - cw) / 2, 1 - cw, (1 - cw) / 2])
        a = np.array([1 + alpha, -2 * cw, 1 - alpha])
    elif kind == "highpass":
        b = np.array([(1 + cw) / 2, -(1 + cw), (1 + cw) / 2])
        a = np.array([1 + alpha, -2 * cw, 1 - alpha])
    elif kind == "peaking":
        big_a = 10.0 ** (gain_db / 40.0)
        b = np.array([1 + alpha * big_a, -2 * cw, 1 - alpha * big_a])
        a = np.array([1 + alpha / big_a, -2 * cw, 1 - alpha / big_a])
    else:
        raise ParameterError(f"unknown biquad kind {kind!r}")
    b, a = b / a[0], a / a[0]
    return np.array([b[0], b[1], b[2], a[1], a[2]])


def design_butterworth(kind: str, cutoff_hz: float, order: int, sample_rate: int) -> BiquadCascade:
    """Butterworth low/high-pass as cascaded bilinear-transformed biquads."""
    if kind not in ("lowpass", "highpass"):
        raise ParameterError(f"butterworth kind must be lowpass/highpass, got {kind!r}")
    if not (0 < cutoff_hz < sample_rate / 2):
        raise ParameterError(f"cutoff {cutoff_hz} Hz outside (0, Nyquist)")
    if order < 2 or order > 10 or order % 2:
        raise ParameterError(f"order must be even and in [2, 10], got {order}")
    sections = []
    for k in range(order // 2):
        psi = np.pi * (2 * k + 1) / (2 * order)  # analog pole-pair angle
        sections.append(_rbj_section(kind, cutoff_hz, 1.0 / (2 * np.cos(psi)), sample_rate))
    return BiquadCascade(
        sections=np.array(sections),
        design={"kind": kind, "cutoff_hz": cutoff_hz, "order": order, "sample_rate": sample_rate},
    )


def design_peaking(center_hz: float, gain_db: float, q: float, sample_rate: int) -> BiquadCascade:
    if not (0 < center_hz < sample_rate / 2):
        raise ParameterError(f"center {center_hz} Hz outside (0, Nyquist)")
    section = _rbj_section("peaking", center_hz, q, sample_rate, gain_db)
    return BiquadCascade(
        sections=section[None, :],
        design={"kind": "peaking", "cutoff_hz": center_hz, "gain_db": gain_db,
                "q": q, "sample_rate": sample_rate},
    )


def filter_cascade(buf: AudioBuffer, cascade: BiquadCascade) -> AudioBuffer:
    y = sosfilt(cascade.as_sos(), buf.samples)
    return AudioBuffer(y, buf.sample_rate)


def fft_convolve(buf: AudioBuffer, kernel: np.ndarray) -> AudioBuffer:
    """Linear convolution via FFT, truncated to the input length."""
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.size == 0:
        raise EmptyInputError("empty convolution kernel")
    n = len(buf) + len(kernel) - 1
    size = 1 << (n - 1).bit_length()
    spec = np.fft.rfft(buf.samples, size) * np.fft.rfft(kernel, size)
    full = np.fft.irfft(spec, size)[:n]
    return AudioBuffer(full[: len(buf)], buf.sample_rate)


def yin_pitch(buf: AudioBuffer, frame_len: int = 1024, hop: int = DEFAULT_HOP):
    """Per-frame fundamental estimates: list of (time_s, f0_hz | None).

    Cumulative-mean-normalized difference with a 0.15 voicing threshold over
    the 60-400 Hz speech band; parabolic refinement of the selected lag.
    """
    sr = buf.sample_rate
    tau_min = max(2, int(sr / YIN_F_MAX))
    tau_max = int(sr / YIN_F_MIN)
    w = frame_len // 2
    if tau_max > w:
        raise ParameterError(f"frame_len {frame_len} too short to track {YIN_F_MIN} Hz")
    x = buf.samples
    results = []
    for start in range(0, len(x) - frame_len + 1, hop):
        frame = x[start : start + frame_len]
        d = _yin_difference(frame, w, tau_max)
        cum = np.cumsum(d[1:])
        cmnd = np.ones(tau_max + 1)
        nonzero = cum > 0
        cmnd[1:][nonzero] = d[1:][nonzero] * np.arange(1, tau_max + 1)[nonzero] / cum[nonzero]
        f0 = _pick_period(cmnd, tau_min, tau_max, sr)
        results.append((start / sr, f0))
    return results


def _yin_difference(frame: np.ndarray, w: int, tau_max: int) -> np.ndarray:
    # d(tau) = sum_{j<w} (x[j] - x[j+tau])^2, expanded into energy and
    # cross-correlation terms so one FFT covers all lags
    sq = np.concatenate([[0.0], np.cumsum(frame * frame)])
    p0 = sq[w]
    taus = np.arange(tau_max + 1)
    p_tau = sq[taus + w] - sq[taus]
    # windowed cross term: sum_{j<w} x[j] x[j+tau]
    cross = _windowed_correlation(frame, w, tau_max)
    d = p0 + p_tau - 2 * cross
    return np.maximum(d, 0.0)


def _windowed_correlation(frame: np.ndarray, w: int, tau_max: int) -> np.ndarray:
    size = 1 << (len(frame) + w - 1).bit_length()
    a = np.fft.rfft(frame[:w], size)
    b = np.fft.rfft(frame, size)
    corr = np.fft.irfft(np.conj(a) * b, size)
    return corr[: tau_max + 1]


def _pick_period(cmnd, tau_min, tau_max, sr):
    below = np.flatnonzero(cmnd[tau_min : tau_max + 1] < YIN_THRESHOLD)
    if len(below) == 0:
        return None
    tau = tau_min + below[0]
    while tau + 1 <= tau_max and cmnd[tau + 1] < cmnd[tau]:
        tau += 1
    if 1 <= tau < len(cmnd) - 1:
        a, b, c = cmnd[tau - 1 : tau + 2]
        denom = a - 2 * b + c
        if denom > 0:
            tau = tau + 0.5 * (a - c) / denom
    f0 = sr / tau
    if not (YIN_F_MIN <= f0 <= YIN_F_MAX):
        return None
    return float(f0)


def spectral_gate(buf: AudioBuffer, oversubtraction: float) -> AudioBuffer:
    """Attenuate bins below a per-bin percentile noise floor times the factor.

    The floor is the 10th-percentile magnitude across frames per bin, capped
    at 4x the cross-bin median so persistently tonal bins are not mistaken
    for noise. Output length equals the input length.
    """
    if not (1.0 <= oversubtraction <= 4.0):
        raise ParameterError(f"oversubtraction {oversubtraction} outside [1.0, 4.0]")
    if len(buf) < DEFAULT_N_FFT:
        return buf
    s = stft(buf)
    mag = np.abs(s.frames)
    floor = np.percentile(mag, 10, axis=0)
    cap = 4.0 * np.median(floor)
    thresh = oversubtraction * np.minimum(floor, cap)
    power = mag * mag
    denom = power + thresh[None, :] ** 2
    gain = np.where(denom > 0, power / np.maximum(denom, 1e-300), 1.0)
    gated = s.frames * gain
    return istft(Stft(gated, s.n_fft, s.hop, s.sample_rate), len(buf))


def feedback_comb(x: np.ndarray, delay: int, gain: float) -> np.ndarray:
    """y[n] = x[n] + gain * y[n - delay], computed block-wise."""
    y = x.astype(np.float64).copy()
    for start in range(delay, len(x), delay):
        end = min(start + delay, len(x))
        y[start:end] += gain * y[start - delay : start - delay + (end - start)]
    return y


def allpass_comb(x: np.ndarray, delay: int, gain: float) -> np.ndarray:
    """Schroeder allpass: y[n] = -gain*x[n] + x[n-delay] + gain*y[n-delay]."""
    x = np.asarray(x, dtype=np.float64)
    y = -gain * x
    for start in range(delay, len(x), delay):
        end = min(start + delay, len(x))
        span = end - start
        y[start:end] += x[start - delay : start - delay + span]
        y[start:end] += gain * y[start - delay : start - delay + span]
    return y
