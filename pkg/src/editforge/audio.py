"""Audio container, RIFF/WAVE I/O, windowed-sinc resampling, and measurement helpers."""

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInputError, FormatError, ParameterError, UnsupportedFormatError

CANONICAL_RATE = 16000

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003


@dataclass(frozen=True)
class AudioBuffer:
    """Mono float waveform with its sample rate.

    Samples are float64, nominally in [-1, 1] (intermediate processing may
    exceed that; writers clip). Instances are immutable values, safe to share.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(x)):
            raise FormatError("audio contains non-finite samples")
        if int(self.sample_rate) <= 0:
            raise ParameterError(f"sample rate must be positive, got {self.sample_rate}")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return len(self.samples)

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class WavInfo:
    """Header-level facts about a WAV file (no sample data read)."""

    sample_rate: int
    channels: int
    n_frames: int
    format_tag: int
    bits_per_sample: int

    @property
    def duration_seconds(self) -> float:
        return self.n_frames / self.sample_rate


def _parse_riff(data: bytes, path) -> tuple[dict, bytes]:
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise FormatError(f"{path}: not a RIFF/WAVE file")
    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        cid, size = struct.unpack_from("<4sI", data, pos)
        pos += 8
        chunk = data[pos : pos + size]
        if cid == b"fmt ":
            if len(chunk) < 16:
                raise FormatError(f"{path}: truncated fmt chunk")
            tag, channels, rate, _, _, bits = struct.unpack_from("<HHIIHH", chunk, 0)
            if tag == 0xFFFE and len(chunk) >= 26:
                # WAVE_FORMAT_EXTENSIBLE: first two GUID bytes carry the real tag
                tag = struct.unpack_from("<H", chunk, 24)[0]
            fmt = {"tag": tag, "channels": channels, "rate": rate, "bits": bits}
        elif cid == b"data":
            payload = chunk
        pos += size + (size & 1)  # chunks are word-aligned
    if fmt is None or payload is None:
        raise FormatError(f"{path}: missing fmt or data chunk")
    if fmt["channels"] < 1 or fmt["rate"] <= 0:
        raise FormatError(f"{path}: invalid fmt fields")
    return fmt, payload


def wav_info(path) -> WavInfo:
    """Probe a WAV header cheaply; used for duration checks during corpus scans."""
    with open(path, "rb") as f:
        data = f.read()
    fmt, payload = _parse_riff(data, path)
    bytes_per_frame = fmt["channels"] * (fmt["bits"] // 8)
    if bytes_per_frame == 0:
        raise FormatError(f"{path}: zero-width samples")
    return WavInfo(
        sample_rate=fmt["rate"],
        channels=fmt["channels"],
        n_frames=len(payload) // bytes_per_frame,
        format_tag=fmt["tag"],
        bits_per_sample=fmt["bits"],
    )


def load_wav(path) -> AudioBuffer:
    """Read a PCM16 or float32 WAV; channels are averaged down to mono."""
    with open(path, "rb") as f:
        data = f.read()
    fmt, payload = _parse_riff(data, path)
    tag, bits, channels = fmt["tag"], fmt["bits"], fmt["channels"]
    if tag == _WAVE_FORMAT_PCM and bits == 16:
        raw = np.frombuffer(payload[: len(payload) // 2 * 2], dtype="<i2")
        x = raw.astype(np.float64) / 32768.0
    elif tag == _WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        raw = np.frombuffer(payload[: len(payload) // 4 * 4], dtype="<f4")
        x = raw.astype(np.float64)
        if not np.all(np.isfinite(x)):
            raise FormatError(f"{path}: non-finite float samples")
        x = np.clip(x, -1.0, 1.0)
    else:
        raise UnsupportedFormatError(
            f"{path}: unsupported encoding (format tag {tag}, {bits}-bit); "
            "expected PCM16 or IEEE float32"
        )
    if channels > 1:
        usable = len(x) // channels * channels
        x = x[:usable].reshape(-1, channels).mean(axis=1)
    return AudioBuffer(x, fmt["rate"])


def save_wav(buf: AudioBuffer, path) -> None:
    """Write mono PCM16 little-endian. Round-trip error is at most 1/32768 per sample."""
    q = np.round(buf.samples * 32768.0)
    q = np.clip(q, -32768, 32767).astype("<i2")
    payload = q.tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(payload),
        b"WAVE",
        b"fmt ",
        16,
        _WAVE_FORMAT_PCM,
        1,
        buf.sample_rate,
        buf.sample_rate * 2,
        2,
        16,
        b"data",
        len(payload),
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload)


def sinc_resample(x: np.ndarray, ratio: float, taps: int = 64) -> np.ndarray:
    """Band-limited rate conversion by direct windowed-sinc interpolation.

    ratio = rate_out / rate_in. Output length is round(len(x) * ratio). The
    Blackman-windowed sinc uses >= `taps` taps, widened by 1/cutoff when
    downsampling so the anti-alias transition stays proportionate.
    """
    if ratio <= 0:
        raise ParameterError(f"resample ratio must be positive, got {ratio}")
    x = np.asarray(x, dtype=np.float64)
    n_out = int(round(len(x) * ratio))
    if len(x) == 0 or n_out == 0:
        return np.zeros(n_out)
    cutoff = 0.9475 * min(1.0, ratio)  # in units of the input Nyquist
    half = max(taps // 2, int(math.ceil(taps / 2 / min(1.0, ratio))))
    k = np.arange(-half, half + 1)
    pad = np.concatenate([np.zeros(half), x, np.zeros(half)])
    out = np.empty(n_out)
    chunk = max(1, (1 << 22) // (2 * half + 1))  # bound scratch memory to ~32 MB
    for start in range(0, n_out, chunk):
        idx = np.arange(start, min(start + chunk, n_out))
        t = idx / ratio
        base = np.floor(t).astype(np.int64)
        d = t[:, None] - (base[:, None] + k[None, :])  # distance in input samples
        w = np.sinc(cutoff * d)
        u = d / (half + 1)
        w *= 0.42 + 0.5 * np.cos(np.pi * u) + 0.08 * np.cos(2 * np.pi * u)
        w /= w.sum(axis=1, keepdims=True)  # unity gain at every phase
        out[idx] = np.einsum("ij,ij->i", w, pad[base[:, None] + k[None, :] + half])
    return out


def resample(buf: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Resample to target_rate; same-rate input is returned unchanged."""
    if target_rate <= 0:
        raise ParameterError(f"target rate must be positive, got {target_rate}")
    if target_rate == buf.sample_rate:
        return buf
    y = sinc_resample(buf.samples, target_rate / buf.sample_rate)
    return AudioBuffer(y, target_rate)


def rms(buf: AudioBuffer) -> float:
    if len(buf) == 0:
        raise EmptyInputError("rms of empty buffer")
    return float(np.sqrt(np.mean(buf.samples**2)))


def peak_frequency(buf: AudioBuffer) -> float:
    """Dominant frequency in Hz: windowed FFT argmax with parabolic refinement."""
    if len(buf) == 0:
        raise EmptyInputError("peak_frequency of empty buffer")
    x = buf.samples * np.hanning(len(buf))
    mag = np.abs(np.fft.rfft(x))
    k = int(np.argmax(mag))
    if 0 < k < len(mag) - 1:
        a, b, c = np.log(mag[k - 1 : k + 2] + 1e-300)
        denom = a - 2 * b + c
        if denom < 0:
            k = k + 0.5 * (a - c) / denom
    return float(k * buf.sample_rate / len(buf))


def to_mono_16k(buf: AudioBuffer) -> AudioBuffer:
    """Normalize any buffer to the canonical corpus rate."""
    return resample(buf, CANONICAL_RATE)
