"""The 21-class voice-edit taxonomy: label registry, seeded hyperparameter
sampling, and the deterministic edit dispatcher.

Classes 1-3 (original / TTS / VC speech) are ingested from disk, never
synthesized here. Classes 4-21 are parameterized transformations applied to
16 kHz mono buffers. Hyperparameter ranges live in PARAM_RANGES; apply_edit is
a pure function of (buffer, spec, donor), so identical inputs give
bit-identical output.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import dsp, g711
from .audio import CANONICAL_RATE, AudioBuffer, resample, rms, sinc_resample
from .errors import (
    DependencyError,
    LabelError,
    NotSynthesizableError,
    ParameterError,
)
from .transcode import BITRATES_KBPS, TranscoderConfig, lossy_transcode

LABEL_NAMES = {
    1: "original_voice",
    2: "text_to_speech",
    3: "voice_conversion",
    4: "concat_trim",
    5: "mixing",
    6: "pitch_up",
    7: "pitch_down",
    8: "speed_slower",
    9: "speed_faster",
    10: "mp3_compression",
    11: "aac_compression",
    12: "alaw_encoding",
    13: "ulaw_encoding",
    14: "low_pass_filter",
    15: "high_pass_filter",
    16: "equalization",
    17: "auto_tune",
    18: "room_impulse",
    19: "reverb",
    20: "overlay_background",
    21: "noise_reduce",
}
NAME_TO_ID = {name: i for i, name in LABEL_NAMES.items()}

INGESTED_LABELS = (1, 2, 3)
LOCALIZED_LABELS = (4, 5)

# Sampling ranges for every tunable hyperparameter. Only the pitch interval
# (1..12 semitones) is externally fixed; the rest are chosen to be audible,
# perceptually plausible, and mutually distinguishable.
PARAM_RANGES = {
    "fraction": (0.10, 0.50),
    "mix_gain_db": (-6.0, 6.0),
    "semitones": (1, 12),
    "slow_factor": (0.5, 0.9),
    "fast_factor": (1.1, 1.5),
    "low_pass_cutoff_hz": (1000.0, 4000.0),
    "high_pass_cutoff_hz": (200.0, 2000.0),
    "eq_gain_db": (3.0, 12.0),
    "autotune_strength": (0.5, 1.0),
    "rt60_s": (0.2, 1.0),
    "reverb_wet": (0.2, 0.6),
    "overlay_snr_db": (0.0, 20.0),
    "oversubtraction": (1.5, 3.0),
}

EQ_CENTERS_HZ = (150.0, 400.0, 1000.0, 2500.0, 6000.0)
FILTER_ORDER = 6

REVERB_COMB_DELAYS_MS = (29.7, 37.1, 41.1, 43.7)
REVERB_COMB_FEEDBACK = 0.805
REVERB_ALLPASS_DELAYS_MS = (5.0, 1.7)
REVERB_ALLPASS_GAIN = 0.7


@dataclass(frozen=True)
class EditLabel:
    id: int
    name: str

    def __post_init__(self):
        if LABEL_NAMES.get(self.id) != self.name:
            raise LabelError(f"unknown edit label ({self.id}, {self.name!r})")


def label_by_id(label_id: int) -> EditLabel:
    if label_id not in LABEL_NAMES:
        raise LabelError(f"edit label id {label_id} outside 1..21")
    return EditLabel(label_id, LABEL_NAMES[label_id])


def label_by_name(name: str) -> EditLabel:
    if name not in NAME_TO_ID:
        raise LabelError(f"unknown edit name {name!r}")
    return EditLabel(NAME_TO_ID[name], name)


@dataclass(frozen=True)
class EditSpec:
    """One concrete edit: label, sampled hyperparameters, locus, RNG seed."""

    label: EditLabel
    params: dict
    seed: int
    locus: tuple[float, float] | None = None

    def to_dict(self) -> dict:
        return {
            "label_id": self.label.id,
            "label_name": self.label.name,
            "params": self.params,
            "seed": self.seed,
            "locus": list(self.locus) if self.locus else None,
        }

    @staticmethod
    def from_dict(d: dict) -> "EditSpec":
        return EditSpec(
            label=label_by_id(d["label_id"]),
            params=dict(d["params"]),
            seed=int(d["seed"]),
            locus=tuple(d["locus"]) if d.get("locus") else None,
        )


def _uniform(rng, key):
    lo, hi = PARAM_RANGES[key]
    return float(rng.uniform(lo, hi))


def sample_spec(label: EditLabel | int, rng_seed: int, noise_files_available: bool = False) -> EditSpec:
    """Draw hyperparameters for one edit, deterministically from the seed."""
    if isinstance(label, int):
        label = label_by_id(label)
    if label.id in INGESTED_LABELS:
        raise NotSynthesizableError(
            f"{label.name} is ingested from the corpus, not generated"
        )
    rng = np.random.default_rng(rng_seed)
    lid = label.id
    if lid == 4:
        params = {
            "mode": "trim" if rng.random() < 0.5 else "insert",
            "fraction": _uniform(rng, "fraction"),
            "position": float(rng.random()),
            "donor_offset": float(rng.random()),
        }
    elif lid == 5:
        params = {"relative_gain_db": _uniform(rng, "mix_gain_db")}
    elif lid == 6:
        params = {"semitones": int(rng.integers(1, 13))}
    elif lid == 7:
        params = {"semitones": -int(rng.integers(1, 13))}
    elif lid == 8:
        params = {"factor": _uniform(rng, "slow_factor")}
    elif lid == 9:
        params = {"factor": _uniform(rng, "fast_factor")}
    elif lid in (10, 11):
        params = {"bitrate_kbps": int(rng.choice(BITRATES_KBPS))}
    elif lid in (12, 13):
        params = {}
    elif lid == 14:
        params = {"cutoff_hz": _uniform(rng, "low_pass_cutoff_hz"), "order": FILTER_ORDER}
    elif lid == 15:
        params = {"cutoff_hz": _uniform(rng, "high_pass_cutoff_hz"), "order": FILTER_ORDER}
    elif lid == 16:
        lo, hi = PARAM_RANGES["eq_gain_db"]
        signs = rng.choice([-1.0, 1.0], size=len(EQ_CENTERS_HZ))
        params = {"gains_db": [float(s * g) for s, g in zip(signs, rng.uniform(lo, hi, len(EQ_CENTERS_HZ)))]}
    elif lid == 17:
        params = {"strength": _uniform(rng, "autotune_strength")}
    elif lid == 18:
        params = {"rt60_s": _uniform(rng, "rt60_s")}
    elif lid == 19:
        params = {"wet": _uniform(rng, "reverb_wet")}
    elif lid == 20:
        params = {
            "snr_db": _uniform(rng, "overlay_snr_db"),
            "noise": "file" if noise_files_available else "pink",
        }
    elif lid == 21:
        params = {"oversubtraction": _uniform(rng, "oversubtraction")}
    else:
        raise LabelError(f"no sampler for label {lid}")
    return EditSpec(label=label, params=params, seed=int(rng_seed) & (2**64 - 1))


def needs_donor(spec: EditSpec) -> bool:
    lid = spec.label.id
    if lid == 4:
        return spec.params.get("mode") == "insert"
    if lid == 5:
        return True
    if lid == 20:
        return spec.params.get("noise") == "file"
    return False


def concat_trim(buf: AudioBuffer, mode: str, fraction: float, position: float,
                donor: AudioBuffer | None = None, donor_offset: float = 0.0):
    """Remove a contiguous segment (trim) or splice in a donor segment (insert).

    Returns (buffer, locus) with the locus in output-file seconds.
    """
    if not (0.10 <= fraction <= 0.50):
        raise ParameterError(f"fraction {fraction} outside [0.10, 0.50]")
    if not (0.0 <= position <= 1.0):
        raise ParameterError(f"position {position} outside [0, 1]")
    sr = buf.sample_rate
    n = len(buf)
    seg = int(round(fraction * n))
    if seg >= n:
        raise ParameterError("segment bounds exceed file")
    if mode == "trim":
        start = int(round(position * (n - seg)))
        out = np.concatenate([buf.samples[:start], buf.samples[start + seg :]])
        dur = len(out) / sr
        lo = min(start / sr, max(dur - 0.025, 0.0))
        locus = (lo, min(lo + 0.025, dur))
    elif mode == "insert":
        if donor is None:
            raise DependencyError("insert mode requires a donor buffer")
        start = int(round(position * n))
        dsam = donor.samples
        if len(dsam) < seg:
            dsam = np.tile(dsam, math.ceil(seg / max(len(dsam), 1)))
        off = int(round(donor_offset * (len(dsam) - seg)))
        piece = dsam[off : off + seg]
        out = np.concatenate([buf.samples[:start], piece, buf.samples[start:]])
        locus = (start / sr, (start + seg) / sr)
    else:
        raise ParameterError(f"concat_trim mode must be trim or insert, got {mode!r}")
    return AudioBuffer(out, sr), locus


def mix(buf: AudioBuffer, donor: AudioBuffer, relative_gain_db: float):
    """Sample-wise sum with the donor, zero-padded to the longer length."""
    if len(donor) == 0:
        raise DependencyError("mixing requires a non-empty donor")
    if not (-6.0 <= relative_gain_db <= 6.0):
        raise ParameterError(f"mix gain {relative_gain_db} dB outside +/-6 dB")
    n = max(len(buf), len(donor))
    out = np.zeros(n)
    out[: len(buf)] += buf.samples
    out[: len(donor)] += donor.samples * 10.0 ** (relative_gain_db / 20.0)
    locus = (0.0, min(len(donor), n) / buf.sample_rate)
    return AudioBuffer(out, buf.sample_rate), locus


def compand_g711(buf: AudioBuffer, law: str) -> AudioBuffer:
    """Telephone-band round trip: 8 kHz, 8-bit G.711 codes, back to 16 kHz."""
    narrow = resample(buf, 8000)
    pcm = np.clip(np.round(narrow.samples * 32768.0), -32768, 32767).astype(np.int64)
    decoded = g711.compand_pcm16(pcm, law).astype(np.float64) / 32768.0
    return resample(AudioBuffer(decoded, 8000), buf.sample_rate)


def equalize(buf: AudioBuffer, gains_db) -> AudioBuffer:
    """Five-band peaking EQ at fixed centers, Q = 1, applied in series."""
    gains_db = list(gains_db)
    if len(gains_db) != len(EQ_CENTERS_HZ):
        raise ParameterError(f"need {len(EQ_CENTERS_HZ)} band gains, got {len(gains_db)}")
    if not any(abs(g) >= 3.0 for g in gains_db):
        raise ParameterError("at least one band gain must be >= 3 dB in magnitude")
    out = buf
    for center, gain in zip(EQ_CENTERS_HZ, gains_db):
        if gain == 0.0:
            continue
        out = dsp.filter_cascade(out, dsp.design_peaking(center, gain, 1.0, buf.sample_rate))
    return out


def autotune(buf: AudioBuffer, strength: float) -> AudioBuffer:
    """Pull voiced frames toward the nearest equal-temperament semitone.

    Works frame-by-frame in the STFT domain: magnitudes are re-indexed along
    frequency by the per-frame correction ratio and phases advance with the
    ratio-scaled instantaneous frequency, so the output length is unchanged.
    """
    if not (0.0 <= strength <= 1.0):
        raise ParameterError(f"strength {strength} outside [0, 1]")
    if len(buf) < dsp.DEFAULT_N_FFT:
        return buf
    s = dsp.stft(buf)
    track = dsp.yin_pitch(buf, frame_len=dsp.DEFAULT_N_FFT, hop=s.hop)
    f0s = np.array([f if f else np.nan for _, f in track])

    n_frames, n_bins = s.frames.shape
    ratios = np.ones(n_frames)
    for t in range(n_frames):
        # stft frames are centered; yin frames are left-aligned at the same hop
        j = min(max(t - (s.n_fft // 2) // s.hop, 0), len(f0s) - 1) if len(f0s) else 0
        f0 = f0s[j] if len(f0s) else np.nan
        if np.isfinite(f0):
            target = 440.0 * 2.0 ** (round(12 * math.log2(f0 / 440.0)) / 12.0)
            corrected = f0 + strength * (target - f0)
            ratios[t] = corrected / f0

    mag = np.abs(s.frames)
    phase = np.angle(s.frames)
    omega = 2 * np.pi * np.arange(n_bins) * s.hop / s.n_fft
    advance = np.empty_like(phase)
    advance[0] = omega
    d = phase[1:] - phase[:-1] - omega[None, :]
    advance[1:] = omega[None, :] + d - 2 * np.pi * np.round(d / (2 * np.pi))

    bins = np.arange(n_bins)
    out = np.empty_like(s.frames)
    acc = phase[0].copy()
    for t in range(n_frames):
        r = ratios[t]
        if r == 1.0:
            out[t] = mag[t] * np.exp(1j * acc)
            acc = acc + advance[t] if t else acc
            continue
        src = bins / r
        m = np.interp(src, bins, mag[t], right=0.0)
        adv = r * np.interp(src, bins, advance[t], right=0.0)
        out[t] = m * np.exp(1j * acc)
        acc = acc + adv
    return dsp.istft(dsp.Stft(out, s.n_fft, s.hop, s.sample_rate), len(buf))


def room_impulse(buf: AudioBuffer, rt60_s: float, rng_seed: int = 0,
                 impulse_response: AudioBuffer | None = None) -> AudioBuffer:
    """Convolve with a synthetic exponential-decay RIR (or a measured one)."""
    if not (0.2 <= rt60_s <= 1.0):
        raise ParameterError(f"rt60 {rt60_s} outside [0.2, 1.0] s")
    sr = buf.sample_rate
    if impulse_response is not None:
        h = impulse_response.samples
    else:
        n = int(rt60_s * sr)
        rng = np.random.default_rng(rng_seed)
        tail = rng.standard_normal(n) * np.exp(-6.91 * np.arange(n) / (rt60_s * sr))
        tail *= 10.0 ** (-12.0 / 20.0) / (np.max(np.abs(tail)) + 1e-300)
        h = np.concatenate([[1.0], tail])
    h = h / (np.max(np.abs(h)) + 1e-300)
    return dsp.fft_convolve(buf, h)


def reverb(buf: AudioBuffer, wet: float) -> AudioBuffer:
    """Parallel feedback combs into series allpasses, mixed wet against dry."""
    if not (0.0 <= wet <= 1.0):
        raise ParameterError(f"wet {wet} outside [0, 1]")
    sr = buf.sample_rate
    wet_sig = np.zeros(len(buf))
    for ms in REVERB_COMB_DELAYS_MS:
        wet_sig += dsp.feedback_comb(buf.samples, int(round(ms * sr / 1000)), REVERB_COMB_FEEDBACK)
    wet_sig /= len(REVERB_COMB_DELAYS_MS)
    for ms in REVERB_ALLPASS_DELAYS_MS:
        wet_sig = dsp.allpass_comb(wet_sig, int(round(ms * sr / 1000)), REVERB_ALLPASS_GAIN)
    return AudioBuffer((1.0 - wet) * buf.samples + wet * wet_sig, sr)


def pink_noise(n: int, rng_seed: int) -> np.ndarray:
    """1/f-shaped noise from spectrally weighted white noise, unit rms."""
    rng = np.random.default_rng(rng_seed)
    white = rng.standard_normal(n)
    spec = np.fft.rfft(white)
    freqs = np.arange(len(spec), dtype=np.float64)
    freqs[0] = 1.0
    spec /= np.sqrt(freqs)
    spec[0] = 0.0
    out = np.fft.irfft(spec, n)
    return out / (np.sqrt(np.mean(out**2)) + 1e-300)


def overlay_background(buf: AudioBuffer, snr_db: float, noise: str = "pink",
                       donor: AudioBuffer | None = None, rng_seed: int = 0) -> AudioBuffer:
    """Add background noise scaled to the target signal-to-noise ratio."""
    if not (0.0 <= snr_db <= 20.0):
        raise ParameterError(f"snr {snr_db} dB outside [0, 20]")
    sig_rms = rms(buf)
    if sig_rms == 0.0:
        raise ParameterError("overlay on a silent signal has no defined SNR")
    if noise == "pink":
        bg = pink_noise(len(buf), rng_seed)
    elif noise == "file":
        if donor is None:
            raise DependencyError("file-noise overlay requires a donor noise buffer")
        bg = donor.samples
        if len(bg) < len(buf):
            bg = np.tile(bg, math.ceil(len(buf) / len(bg)))
        bg = bg[: len(buf)]
    else:
        raise ParameterError(f"noise kind must be pink or file, got {noise!r}")
    bg_rms = np.sqrt(np.mean(bg**2))
    if bg_rms == 0.0:
        raise DependencyError("noise donor is silent")
    bg = bg * (sig_rms / bg_rms) * 10.0 ** (-snr_db / 20.0)
    return AudioBuffer(buf.samples + bg, buf.sample_rate)


def noise_reduce(buf: AudioBuffer, oversubtraction: float) -> AudioBuffer:
    if not (1.5 <= oversubtraction <= 3.0):
        raise ParameterError(f"oversubtraction {oversubtraction} outside [1.5, 3.0]")
    return dsp.spectral_gate(buf, oversubtraction)


def apply_edit(buf: AudioBuffer, spec: EditSpec, donor: AudioBuffer | None = None,
               transcoder: TranscoderConfig | None = None):
    """Apply one edit; returns (16 kHz mono buffer, spec with resolved locus).

    Deterministic: repeated calls on identical inputs produce bit-identical
    samples. The output peak is normalized back into [-1, 1] only when an
    additive edit pushed it beyond.
    """
    lid = spec.label.id
    if lid in INGESTED_LABELS:
        raise NotSynthesizableError(f"{spec.label.name} is ingested, not applied")
    if needs_donor(spec) and donor is None:
        raise DependencyError(f"edit {spec.label.name} requires a donor buffer")
    buf = resample(buf, CANONICAL_RATE)
    if donor is not None:
        donor = resample(donor, CANONICAL_RATE)
    p = spec.params
    locus = None
    if lid == 4:
        out, locus = concat_trim(buf, p["mode"], p["fraction"], p["position"],
                                 donor, p.get("donor_offset", 0.0))
    elif lid == 5:
        out, locus = mix(buf, donor, p["relative_gain_db"])
    elif lid in (6, 7):
        out = dsp.pitch_scale(buf, p["semitones"])
    elif lid in (8, 9):
        out = dsp.time_scale(buf, p["factor"])
    elif lid in (10, 11):
        if transcoder is None:
            raise DependencyError(
                f"edit {spec.label.name} requires an external transcoder "
                f"(set {'{'}input{'}'}/{'{'}output{'}'}/{'{'}bitrate{'}'} template)"
            )
        codec = "mp3" if lid == 10 else "aac"
        out = lossy_transcode(buf, codec, p["bitrate_kbps"], transcoder)
    elif lid == 12:
        out = compand_g711(buf, "alaw")
    elif lid == 13:
        out = compand_g711(buf, "ulaw")
    elif lid in (14, 15):
        kind = "lowpass" if lid == 14 else "highpass"
        cascade = dsp.design_butterworth(kind, p["cutoff_hz"], p.get("order", FILTER_ORDER),
                                         CANONICAL_RATE)
        out = dsp.filter_cascade(buf, cascade)
    elif lid == 16:
        out = equalize(buf, p["gains_db"])
    elif lid == 17:
        out = autotune(buf, p["strength"])
    elif lid == 18:
        out = room_impulse(buf, p["rt60_s"], rng_seed=spec.seed, impulse_response=donor)
    elif lid == 19:
        out = reverb(buf, p["wet"])
    elif lid == 20:
        out = overlay_background(buf, p["snr_db"], p.get("noise", "pink"), donor,
                                 rng_seed=spec.seed)
    elif lid == 21:
        out = noise_reduce(buf, p["oversubtraction"])
    else:
        raise LabelError(f"no transformation registered for label {lid}")
    peak = np.max(np.abs(out.samples)) if len(out) else 0.0
    if peak > 1.0:
        out = AudioBuffer(out.samples / peak, out.sample_rate)
    return out, replace(spec, locus=locus)


EDIT_FAMILIES = {
    4: concat_trim, 5: mix, 6: dsp.pitch_scale, 7: dsp.pitch_scale,
    8: dsp.time_scale, 9: dsp.time_scale, 10: lossy_transcode, 11: lossy_transcode,
    12: compand_g711, 13: compand_g711, 14: dsp.filter_cascade, 15: dsp.filter_cascade,
    16: equalize, 17: autotune, 18: room_impulse, 19: reverb,
    20: overlay_background, 21: noise_reduce,
}
