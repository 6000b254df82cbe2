import numpy as np
import pytest

from editforge import g711

import g711_reference as ref

ALL_PCM16 = np.arange(-32768, 32768, dtype=np.int64)


def test_ulaw_zero_code():
    assert g711.ulaw_encode(np.array([0]))[0] == 0xFF


def test_alaw_zero_code():
    assert g711.alaw_encode(np.array([0]))[0] == 0xD5


def test_ulaw_encode_matches_reference_exhaustive():
    got = g711.ulaw_encode(ALL_PCM16)
    want = np.array([ref.lin2ulaw(int(v)) for v in ALL_PCM16], dtype=np.uint8)
    assert np.array_equal(got, want)


def test_alaw_encode_matches_reference_exhaustive():
    got = g711.alaw_encode(ALL_PCM16)
    want = np.array([ref.lin2alaw(int(v)) for v in ALL_PCM16], dtype=np.uint8)
    assert np.array_equal(got, want)


def test_decode_tables_match_reference():
    codes = np.arange(256)
    assert np.array_equal(g711.ulaw_decode(codes), [ref.ulaw2lin(c) for c in codes])
    assert np.array_equal(g711.alaw_decode(codes), [ref.alaw2lin(c) for c in codes])


def test_cross_check_against_stdlib_audioop():
    audioop = pytest.importorskip("audioop")  # removed in Python 3.13
    import struct

    blob = struct.pack("<65536h", *ALL_PCM16.astype(np.int16))
    assert bytes(g711.ulaw_encode(ALL_PCM16)) == audioop.lin2ulaw(blob, 2)
    assert bytes(g711.alaw_encode(ALL_PCM16)) == audioop.lin2alaw(blob, 2)


@pytest.mark.parametrize("law", ["ulaw", "alaw"])
def test_roundtrip_error_within_segment_step(law):
    # decode levels are segment midpoints, so |x - decode(encode(x))| is
    # bounded by the quantization step of x's segment
    out = g711.compand_pcm16(ALL_PCM16, law).astype(np.int64)
    err = np.abs(out - ALL_PCM16)
    if law == "ulaw":
        # 14-bit step doubles per segment; 16-bit step = 8 << seg, plus the
        # clipped top of the range
        mag = np.minimum(np.abs(ALL_PCM16 >> 2), ref.CLIP) + (ref.BIAS >> 2)
        seg = np.searchsorted(np.array(ref.SEG_UEND), mag)
        step16 = 8 << np.minimum(seg, 7)
    else:
        mag13 = np.where(ALL_PCM16 >= 0, ALL_PCM16 >> 3, -(ALL_PCM16 >> 3) - 1)
        seg = np.searchsorted(np.array(ref.SEG_AEND), mag13)
        step16 = 16 << np.maximum(np.minimum(seg, 7), 1) >> 1
    assert np.all(err <= step16), f"max err {err.max()} at {ALL_PCM16[np.argmax(err - step16)]}"


@pytest.mark.parametrize("law", ["ulaw", "alaw"])
def test_decoded_levels_are_companding_fixed_points(law):
    # mu-law has two zero codes (0x7F/0xFF) so code identity cannot hold, but
    # decoded values must survive a second encode-decode unchanged
    codes = np.arange(256, dtype=np.uint8)
    dec = g711.ulaw_decode(codes) if law == "ulaw" else g711.alaw_decode(codes)
    assert np.array_equal(g711.compand_pcm16(dec, law), dec)


def test_unknown_law_rejected():
    from editforge.errors import ParameterError

    with pytest.raises(ParameterError):
        g711.compand_pcm16(np.array([0]), "gsm")
