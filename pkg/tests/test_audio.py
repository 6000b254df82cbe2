import struct

import numpy as np
import pytest

from editforge import audio
from editforge.audio import AudioBuffer, load_wav, peak_frequency, resample, rms, save_wav, wav_info
from editforge.errors import EmptyInputError, FormatError, ParameterError, UnsupportedFormatError


def tone(freq, seconds=1.0, sr=16000, amp=1.0):
    t = np.arange(int(seconds * sr)) / sr
    return AudioBuffer(amp * np.sin(2 * np.pi * freq * t), sr)


def write_raw_wav(path, payload, fmt_tag=1, channels=1, rate=16000, bits=16):
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(payload), b"WAVE",
        b"fmt ", 16, fmt_tag, channels, rate,
        rate * channels * bits // 8, channels * bits // 8, bits,
        b"data", len(payload),
    )
    path.write_bytes(header + payload)


class TestLoadWav:
    def test_zero_pcm16_file(self, tmp_path):
        p = tmp_path / "z.wav"
        write_raw_wav(p, b"\x00\x00" * 16000)
        buf = load_wav(p)
        assert len(buf) == 16000 and buf.sample_rate == 16000
        assert np.all(buf.samples == 0.0)

    def test_stereo_opposite_channels_cancel(self, tmp_path):
        p = tmp_path / "s.wav"
        frame = struct.pack("<hh", 16384, -16384)  # +0.5, -0.5
        write_raw_wav(p, frame * 1000, channels=2)
        buf = load_wav(p)
        assert len(buf) == 1000
        assert np.all(buf.samples == 0.0)

    def test_pcm16_min_scales_to_minus_one(self, tmp_path):
        p = tmp_path / "m.wav"
        write_raw_wav(p, struct.pack("<h", -32768))
        assert load_wav(p).samples[0] == -32768 / 32768  # exactly -1.0

    def test_float32_input(self, tmp_path):
        p = tmp_path / "f.wav"
        x = np.linspace(-0.9, 0.9, 64).astype("<f4")
        write_raw_wav(p, x.tobytes(), fmt_tag=3, bits=32)
        buf = load_wav(p)
        assert np.allclose(buf.samples, x, atol=1e-7)

    def test_malformed_header(self, tmp_path):
        p = tmp_path / "bad.wav"
        p.write_bytes(b"RIFX" + b"\x00" * 64)
        with pytest.raises(FormatError):
            load_wav(p)

    def test_unsupported_encoding(self, tmp_path):
        p = tmp_path / "u.wav"
        write_raw_wav(p, b"\x00" * 64, fmt_tag=7, bits=8)  # mu-law wav
        with pytest.raises(UnsupportedFormatError):
            load_wav(p)

    def test_identical_channels_downmix_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        q = (rng.uniform(-0.5, 0.5, 500) * 32768).astype("<i2")
        p = tmp_path / "d.wav"
        write_raw_wav(p, np.repeat(q, 2).tobytes(), channels=2)
        mono = load_wav(p).samples
        assert np.array_equal(mono, q.astype(np.float64) / 32768.0)


class TestSaveWav:
    def test_zeros_roundtrip(self, tmp_path):
        p = tmp_path / "z.wav"
        save_wav(AudioBuffer(np.zeros(123), 16000), p)
        assert np.all(load_wav(p).samples == 0.0)

    def test_quantization_of_near_full_scale(self, tmp_path):
        p = tmp_path / "q.wav"
        save_wav(AudioBuffer(np.array([32767 / 32768]), 16000), p)
        raw = p.read_bytes()[-2:]
        assert struct.unpack("<h", raw)[0] == 32767

    def test_roundtrip_error_bound(self, tmp_path):
        rng = np.random.default_rng(7)
        x = rng.uniform(-1.0, 1.0, 4096)
        p = tmp_path / "r.wav"
        save_wav(AudioBuffer(x, 16000), p)
        back = load_wav(p).samples
        assert np.max(np.abs(back - x)) <= 1 / 32768

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(OSError):
            save_wav(AudioBuffer(np.zeros(4), 16000), tmp_path / "no" / "dir" / "x.wav")


class TestResample:
    def test_length_arithmetic(self):
        buf = AudioBuffer(np.zeros(16000), 16000)
        assert len(resample(buf, 8000)) == 8000

    def test_tone_survives_decimation(self):
        down = resample(tone(440), 8000)
        assert abs(peak_frequency(down) - 440) / 440 < 0.01

    def test_same_rate_identity(self):
        buf = tone(440)
        out = resample(buf, 16000)
        assert np.max(np.abs(out.samples - buf.samples)) < 1e-9

    def test_chain_16_8_16_preserves_sub_nyquist_tones(self):
        for freq in (300, 1000, 2500, 3500):
            chain = resample(resample(tone(freq), 8000), 16000)
            assert abs(peak_frequency(chain) - freq) / freq < 0.01, freq

    def test_invalid_rate(self):
        with pytest.raises(ParameterError):
            resample(tone(440), 0)


class TestMeasures:
    def test_sine_rms(self):
        assert rms(tone(440)) == pytest.approx(1 / np.sqrt(2), abs=1e-3)

    def test_zero_rms(self):
        assert rms(AudioBuffer(np.zeros(100), 16000)) == 0.0

    def test_peak_frequency_of_tone(self):
        assert 436 <= peak_frequency(tone(440)) <= 444

    def test_empty_inputs_rejected(self):
        empty = AudioBuffer(np.zeros(0), 16000)
        with pytest.raises(EmptyInputError):
            rms(empty)
        with pytest.raises(EmptyInputError):
            peak_frequency(empty)


class TestAudioBuffer:
    def test_rejects_nan(self):
        with pytest.raises(FormatError):
            AudioBuffer(np.array([0.0, np.nan]), 16000)

    def test_rejects_bad_rate(self):
        with pytest.raises(ParameterError):
            AudioBuffer(np.zeros(4), 0)

    def test_duration(self):
        assert AudioBuffer(np.zeros(8000), 16000).duration_seconds == 0.5

    def test_samples_read_only(self):
        buf = AudioBuffer(np.zeros(4), 16000)
        with pytest.raises(ValueError):
            buf.samples[0] = 1.0


def test_wav_info_probe(tmp_path):
    p = tmp_path / "i.wav"
    write_raw_wav(p, b"\x00\x00" * 8000, rate=8000)
    info = wav_info(p)
    assert info.sample_rate == 8000 and info.n_frames == 8000 and info.channels == 1
    assert info.duration_seconds == 1.0
