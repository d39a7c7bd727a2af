import math
import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from voiceengine.audio import (CLEAN, AudioClip, EndpointConfig, add_noise,
                               detect_endpoints, gaussian_noise, load_wav,
                               realized_snr_db, save_wav, synthesize_word_token)
from voiceengine.errors import (ClipTooShort, MalformedWav, NoSpeech, SilentSignal,
                                UnknownClass, UnsupportedFormat)
from voiceengine.frontend import autocorrelate, hamming_window, levinson_durbin


def make_wav(ints, rate=8000, channels=1, bits=16, code=1, extra_chunks=b""):
    body = np.asarray(ints, dtype="<i2").tobytes()
    fmt = struct.pack("<HHIIHH", code, channels, rate, rate * channels * bits // 8,
                      channels * bits // 8, bits)
    chunks = b"fmt " + struct.pack("<I", 16) + fmt + extra_chunks \
        + b"data" + struct.pack("<I", len(body)) + body
    return b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks


# --------------------------------------------------------------------- codec

def test_load_wav_scaling():
    clip = load_wav(make_wav([0, 16384, -32768]))
    assert clip.sample_rate == 8000
    assert clip.samples.tolist() == [0.0, 0.5, -1.0]


def test_load_wav_rejects_stereo():
    with pytest.raises(UnsupportedFormat):
        load_wav(make_wav([0, 0], channels=2))


@pytest.mark.parametrize("kwargs", [dict(code=3), dict(bits=8), dict(rate=44100), dict(channels=2)])
def test_load_wav_unsupported(kwargs):
    with pytest.raises(UnsupportedFormat):
        load_wav(make_wav([0, 0, 0, 0], **kwargs))


@pytest.mark.parametrize("mangle", [
    lambda b: b"RIFX" + b[4:],
    lambda b: b[:8] + b"WAVX" + b[12:],
    lambda b: b[:8],
    lambda b: b[:40],                       # data chunk header cut off
    lambda b: b[:-1],                       # data chunk body truncated
    lambda b: b[:12] + b[36:],              # fmt chunk removed
    lambda b: b[:36],                       # data chunk removed
])
def test_load_wav_malformed(mangle):
    with pytest.raises(MalformedWav):
        load_wav(mangle(make_wav([1, 2, 3, 4])))


def test_load_wav_skips_unknown_chunks():
    extra = b"LIST" + struct.pack("<I", 5) + b"abcde" + b"\x00"  # odd size, padded
    clip = load_wav(make_wav([100, -100], extra_chunks=extra))
    assert np.allclose(clip.samples, [100 / 32768, -100 / 32768])


def test_save_wav_examples():
    data = save_wav(AudioClip([0.0], 8000))
    assert len(data) == 46
    assert data[36:40] == b"data" and data[44:] == b"\x00\x00"
    ints = np.frombuffer(save_wav(AudioClip([1.0, -1.0]))[44:], dtype="<i2")
    assert ints.tolist() == [32767, -32767]


def test_save_wav_header_layout():
    data = save_wav(AudioClip(np.zeros(10), 16000))
    riff, size, wave, fmt, fmt_size, code, ch, rate, brate, align, bits, dtag, dsize = \
        struct.unpack("<4sI4s4sIHHIIHH4sI", data[:44])
    assert (riff, wave, fmt, dtag) == (b"RIFF", b"WAVE", b"fmt ", b"data")
    assert (size, fmt_size, code, ch, rate, brate, align, bits, dsize) == \
        (36 + 20, 16, 1, 1, 16000, 32000, 2, 16, 20)


def test_wav_bytes_round_trip_bit_identical():
    # canonical file built independently of save_wav
    rng = np.random.default_rng(0)
    ints = rng.integers(-32767, 32768, 2000)
    original = make_wav(ints)
    assert len(original) == 44 + 4000
    assert save_wav(load_wav(original)) == original


def test_wav_most_negative_sample_clamps():
    ints = np.array([-32768, -32767, -16384, 16384, 32767])
    back = np.frombuffer(save_wav(load_wav(make_wav(ints)))[44:], dtype="<i2")
    assert back.tolist() == [-32767, -32767, -16384, 16384, 32767]


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(1, 300), elements=st.floats(-1.0, 1.0)),
       st.sampled_from([8000, 16000]))
def test_wav_round_trip_within_one_step(samples, rate):
    clip = AudioClip(samples, rate)
    back = load_wav(save_wav(clip))
    assert back.sample_rate == rate
    assert np.max(np.abs(back.samples - clip.samples)) <= 1.0 / 32767 + 1e-12


def test_clip_rejects_out_of_range():
    with pytest.raises(ValueError):
        AudioClip([1.5])
    with pytest.raises(UnsupportedFormat):
        AudioClip([0.0], 22050)


# ----------------------------------------------------------------- endpoints

def tone_clip(sr=8000):
    sil = np.zeros(int(0.1 * sr))
    t = np.arange(int(0.2 * sr)) / sr
    tone = np.sin(2 * np.pi * 440 * t)
    return AudioClip(np.concatenate([sil, tone, sil]), sr)


def test_endpoints_cover_tone_with_margin():
    cfg = EndpointConfig()
    clip = tone_clip()
    out = detect_endpoints(clip, cfg)
    flen, shift = 200, 80
    tone_start, tone_end = 800, 2400
    # first frame with any tone energy overlaps the onset by at least the threshold
    first = (tone_start - flen) // shift + 1
    assert len(out) < len(clip)
    start = next(i for i in range(len(clip)) if np.array_equal(clip.samples[i:i + len(out)], out.samples))
    assert start <= tone_start and tone_end <= start + len(out)
    assert start >= (first - cfg.margin_frames - 1) * shift
    assert start + len(out) <= tone_end + (cfg.margin_frames + 1) * shift + flen


def test_endpoints_silence_raises():
    with pytest.raises(NoSpeech):
        detect_endpoints(AudioClip(np.zeros(800)))


def test_endpoints_short_clip():
    with pytest.raises(ClipTooShort):
        detect_endpoints(AudioClip(np.ones(10) * 0.1))


def test_endpoints_unchanged_when_all_speech():
    rng = np.random.default_rng(1)
    clip = AudioClip(0.5 * np.sign(rng.standard_normal(4000)))
    assert detect_endpoints(clip) is clip


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2000), st.integers(200, 3000), st.integers(0, 2000),
       st.integers(0, 5), st.floats(0.01, 0.5))
def test_endpoints_idempotent(lead, body, tail, margin, ratio):
    rng = np.random.default_rng(lead * 7 + body)
    x = np.concatenate([np.zeros(lead), 0.3 * rng.standard_normal(body).clip(-3, 3), np.zeros(tail)])
    cfg = EndpointConfig(threshold_ratio=ratio, margin_frames=margin)
    once = detect_endpoints(AudioClip(x), cfg)
    twice = detect_endpoints(once, cfg)
    assert once == twice


# --------------------------------------------------------------------- noise

def test_noise_power_exact():
    noise = gaussian_noise(5000, 1.0, seed=3)
    assert abs(np.mean(noise * noise) - 1.0) <= 1e-9
    assert abs(noise.mean()) < 1e-12


def test_add_noise_realized_snr():
    clip = synthesize_word_token(2, 0, 0)
    for snr in (0.0, 5.0, 20.0):
        noisy = add_noise(clip, snr, seed=1)
        # token peak 0.5, small noise -> no clamping at these levels except 0 dB
        if np.max(np.abs(noisy.samples)) < 1.0:
            assert abs(realized_snr_db(clip.samples, noisy.samples - clip.samples) - snr) < 1e-6


def test_add_noise_clean_and_deterministic():
    clip = synthesize_word_token(0, 0, 0)
    assert add_noise(clip, CLEAN, 5) is clip
    assert add_noise(clip, 10, 42) == add_noise(clip, 10, 42)
    assert add_noise(clip, 10, 42) != add_noise(clip, 10, 43)


def test_add_noise_silent():
    with pytest.raises(SilentSignal):
        add_noise(AudioClip(np.zeros(100)), 10, 0)


# ----------------------------------------------------------- synthetic tokens

def test_token_determinism_and_shape():
    a = synthesize_word_token(3, 1, 17)
    assert a == synthesize_word_token(3, 1, 17)
    for cls in range(12):
        for spk in range(3):
            tok = synthesize_word_token(cls, spk, spk * 11 + cls)
            assert 0.4 <= tok.duration <= 0.8
            assert abs(np.max(np.abs(tok.samples)) - 0.5) <= 1e-6


def test_token_unknown_class():
    with pytest.raises(UnknownClass):
        synthesize_word_token(12, 0, 0)


def lpc_log_spectrum(clip, p=12, n_freq=256):
    x = clip.samples[np.abs(clip.samples) > 0]
    mid = len(x) // 2
    frame = hamming_window(x[mid - 100:mid + 100])
    a = levinson_durbin(autocorrelate(frame, p)).a
    w = np.linspace(0, np.pi, n_freq)
    denom = 1 - sum(a[i] * np.exp(-1j * w * (i + 1)) for i in range(p))
    return -20 * np.log10(np.abs(denom))


def test_token_classes_differ_beyond_jitter():
    def dist(s1, s2):
        d = (s1 - s1.mean()) - (s2 - s2.mean())
        return np.sqrt(np.mean(d * d))

    same = [dist(lpc_log_spectrum(synthesize_word_token(0, 0, s)),
                 lpc_log_spectrum(synthesize_word_token(0, 0, s + 100))) for s in range(5)]
    cross = [dist(lpc_log_spectrum(synthesize_word_token(0, 0, s)),
                  lpc_log_spectrum(synthesize_word_token(1, 0, s))) for s in range(5)]
    assert min(cross) > max(same)
