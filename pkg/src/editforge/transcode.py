"""Lossy MP3/AAC edits through an external transcoder process.

The transcoder is any command honoring a template with {input}, {output} and
{bitrate} placeholders (ffmpeg-style tools). The same template runs both
directions; the file extensions tell the tool which way to convert.
"""

import os
import shlex
import shutil
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio import CANONICAL_RATE, AudioBuffer, load_wav, resample, save_wav
from .errors import ExternalProcessError, ParameterError

TRANSCODER_ENV_VAR = "EDITFORGE_TRANSCODER"
BITRATES_KBPS = (32, 64, 96, 128)
_CODEC_EXT = {"mp3": ".mp3", "aac": ".m4a"}

_FFMPEG_TEMPLATE = "ffmpeg -y -loglevel error -i {input} -b:a {bitrate}k {output}"


@dataclass(frozen=True)
class TranscoderConfig:
    command_template: str
    codec: str

    def __post_init__(self):
        for ph in ("{input}", "{output}", "{bitrate}"):
            if ph not in self.command_template:
                raise ParameterError(f"transcoder template missing {ph} placeholder")
        if self.codec not in _CODEC_EXT:
            raise ParameterError(f"codec must be mp3 or aac, got {self.codec!r}")


def default_template() -> str | None:
    """Template from the environment override, else ffmpeg when on PATH."""
    env = os.environ.get(TRANSCODER_ENV_VAR)
    if env:
        return env
    if shutil.which("ffmpeg"):
        return _FFMPEG_TEMPLATE
    return None


def transcoder_binary(template: str) -> str:
    return shlex.split(template)[0]


def _run(template: str, input_path, output_path, bitrate: int) -> None:
    argv = [
        part.format(input=str(input_path), output=str(output_path), bitrate=bitrate)
        for part in shlex.split(template)
    ]
    try:
        proc = subprocess.run(argv, capture_output=True, text=True)
    except FileNotFoundError:
        raise ExternalProcessError(f"transcoder binary not found: {argv[0]}") from None
    if proc.returncode != 0:
        raise ExternalProcessError(
            f"transcoder exited with {proc.returncode}: {' '.join(argv)}\n{proc.stderr.strip()}"
        )
    if not Path(output_path).exists():
        raise ExternalProcessError(f"transcoder produced no output: {' '.join(argv)}")


def _align_to(reference: np.ndarray, decoded: np.ndarray) -> np.ndarray:
    """Undo codec padding: shift by the cross-correlation peak, then fit length."""
    n = len(reference) + len(decoded) - 1
    size = 1 << (n - 1).bit_length()
    corr = np.fft.irfft(np.fft.rfft(reference, size) * np.conj(np.fft.rfft(decoded, size)), size)
    lags = np.concatenate([np.arange(len(reference)), np.arange(-len(decoded) + 1, 0)])
    order = np.argsort(np.concatenate([corr[: len(reference)], corr[size - len(decoded) + 1 :]]))
    lag = int(lags[order[-1]])  # reference[t] ~ decoded[t - lag]
    if lag >= 0:
        shifted = np.concatenate([np.zeros(lag), decoded])
    else:
        shifted = decoded[-lag:]
    if len(shifted) < len(reference):
        shifted = np.pad(shifted, (0, len(reference) - len(shifted)))
    return shifted[: len(reference)]


def lossy_transcode(buf: AudioBuffer, codec: str, bitrate_kbps: int, cfg: TranscoderConfig) -> AudioBuffer:
    """Encode to the codec and decode back to 16 kHz mono, time-aligned."""
    if bitrate_kbps not in BITRATES_KBPS:
        raise ParameterError(f"bitrate {bitrate_kbps} not in {BITRATES_KBPS}")
    if codec != cfg.codec:
        cfg = TranscoderConfig(cfg.command_template, codec)
    with tempfile.TemporaryDirectory(prefix="editforge_codec_") as tmp:
        tmp = Path(tmp)
        src = tmp / "in.wav"
        enc = tmp / ("enc" + _CODEC_EXT[codec])
        dec = tmp / "dec.wav"
        save_wav(buf, src)
        _run(cfg.command_template, src, enc, bitrate_kbps)
        _run(cfg.command_template, enc, dec, bitrate_kbps)
        out = resample(load_wav(dec), CANONICAL_RATE)
    ref = resample(buf, CANONICAL_RATE)
    return AudioBuffer(_align_to(ref.samples, out.samples), CANONICAL_RATE)
