"""Audio clips: WAV codec, endpointing, noise injection and synthetic tokens."""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import (ClipTooShort, MalformedWav, NoSpeech, SilentSignal, UnknownClass,
                     UnsupportedFormat)

SUPPORTED_RATES = (8000, 16000)
CLEAN = math.inf  # snr sentinel meaning "no noise"


@dataclass(frozen=True, eq=False)
class AudioClip:
    samples: np.ndarray
    sample_rate: int = 8000

    def __post_init__(self):
        x = np.array(self.samples, dtype=np.float64).reshape(-1)
        if self.sample_rate not in SUPPORTED_RATES:
            raise UnsupportedFormat(f"sample rate {self.sample_rate} Hz not supported")
        if x.size and (not np.all(np.isfinite(x)) or np.max(np.abs(x)) > 1.0):
            raise ValueError("samples must be finite and lie in [-1, 1]")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)

    def __len__(self):
        return self.samples.size

    @property
    def duration(self):
        return self.samples.size / self.sample_rate

    def scaled(self, gain):
        return AudioClip(np.clip(self.samples * gain, -1.0, 1.0), self.sample_rate)

    def __eq__(self, other):
        if not isinstance(other, AudioClip):
            return NotImplemented
        return (self.sample_rate == other.sample_rate
                and np.array_equal(self.samples, other.samples))

    __hash__ = None


# ---------------------------------------------------------------------------
# WAV codec

def load_wav(data: bytes) -> AudioClip:
    """Decode a 16-bit mono PCM RIFF/WAVE byte string.

    Unknown chunks are skipped. Structural problems raise ``MalformedWav``;
    a well formed file in a format we do not handle raises
    ``UnsupportedFormat``.
    """
    data = bytes(data)
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedWav("missing RIFF/WAVE magic")

    fmt = None
    pcm = None
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if len(body) < size:
            raise MalformedWav(f"chunk {cid!r} truncated")
        if cid == b"fmt ":
            if size < 16:
                raise MalformedWav("fmt chunk shorter than 16 bytes")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data":
            pcm = body
        pos += 8 + size + (size & 1)  # chunks are word aligned
    if fmt is None:
        raise MalformedWav("no fmt chunk")
    if pcm is None:
        raise MalformedWav("no data chunk")

    code, channels, rate, _byte_rate, _align, bits = fmt
    if code != 1:
        raise UnsupportedFormat(f"format code {code} is not PCM")
    if channels != 1:
        raise UnsupportedFormat(f"{channels} channels, only mono is supported")
    if bits != 16:
        raise UnsupportedFormat(f"{bits}-bit samples, only 16-bit is supported")
    if rate not in SUPPORTED_RATES:
        raise UnsupportedFormat(f"sample rate {rate} Hz not supported")
    if len(pcm) % 2:
        raise MalformedWav("odd data chunk length for 16-bit samples")

    ints = np.frombuffer(pcm, dtype="<i2")
    return AudioClip(ints.astype(np.float64) / 32768.0, rate)


def save_wav(clip: AudioClip) -> bytes:
    # same 32768 scale as the decoder so that decode->encode is exact; the
    # symmetric clamp keeps -1.0 at -32767
    ints = np.clip(np.round(clip.samples * 32768.0), -32767, 32767).astype("<i2")
    body = ints.tobytes()
    rate = clip.sample_rate
    header = struct.pack("<4sI4s4sIHHIIHH4sI",
                         b"RIFF", 36 + len(body), b"WAVE",
                         b"fmt ", 16, 1, 1, rate, rate * 2, 2, 16,
                         b"data", len(body))
    return header + body


def read_wav(path) -> AudioClip:
    with open(path, "rb") as f:
        return load_wav(f.read())


def write_wav(path, clip: AudioClip):
    with open(path, "wb") as f:
        f.write(save_wav(clip))


# ---------------------------------------------------------------------------
# endpoint detection

@dataclass(frozen=True)
class EndpointConfig:
    frame_len_ms: float = 25.0
    shift_ms: float = 10.0
    threshold_ratio: float = 0.05
    margin_frames: int = 3

    def __post_init__(self):
        if not 0.0 < self.threshold_ratio < 1.0:
            raise ValueError("threshold_ratio must lie in (0, 1)")
        if not self.frame_len_ms >= self.shift_ms > 0:
            raise ValueError("need frame_len_ms >= shift_ms > 0")
        if self.margin_frames < 0:
            raise ValueError("margin_frames must be non-negative")


def detect_endpoints(clip: AudioClip, cfg: EndpointConfig = EndpointConfig()) -> AudioClip:
    """Trim leading and trailing low-energy frames.

    Keeps the span from the first to the last frame whose energy reaches
    ``threshold_ratio`` of the loudest frame, padded by ``margin_frames``
    frame shifts on either side.
    """
    sr = clip.sample_rate
    flen = int(round(cfg.frame_len_ms * sr / 1000))
    shift = int(round(cfg.shift_ms * sr / 1000))
    x = clip.samples
    if len(x) < flen:
        raise ClipTooShort(f"clip of {len(x)} samples is shorter than one frame ({flen})")

    # per-frame dot products; a cumulative sum would smear rounding into silent frames
    n = (len(x) - flen) // shift + 1
    energy = np.array([np.dot(x[i * shift:i * shift + flen], x[i * shift:i * shift + flen])
                       for i in range(n)])
    peak = energy.max()
    if peak < 1e-10:
        raise NoSpeech("no frame rises above the silence floor")
    active = np.flatnonzero(energy >= cfg.threshold_ratio * peak)
    first, last = active[0], active[-1]
    start = max(0, (first - cfg.margin_frames) * shift)
    stop = min(len(x), last * shift + flen + cfg.margin_frames * shift)
    if start == 0 and stop == len(x):
        return clip
    return AudioClip(x[start:stop], sr)


# ---------------------------------------------------------------------------
# noise

def add_noise(clip: AudioClip, snr_db: float, seed: int) -> AudioClip:
    """Add white Gaussian noise at an exact signal-to-noise ratio.

    The drawn noise is made zero-mean and rescaled so its mean power hits
    the target before it is added. ``snr_db = CLEAN`` (``inf``) is a no-op.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return clip
    x = clip.samples
    p_signal = float(np.mean(x * x)) if x.size else 0.0
    if p_signal == 0.0:
        raise SilentSignal("cannot set an SNR against a silent signal")
    noise = gaussian_noise(x.size, p_signal / 10.0 ** (snr_db / 10.0), seed)
    return AudioClip(np.clip(x + noise, -1.0, 1.0), clip.sample_rate)


def gaussian_noise(size: int, power: float, seed: int) -> np.ndarray:
    """Zero-mean white noise whose mean square is exactly ``power``."""
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(size)
    noise -= noise.mean()
    noise *= math.sqrt(power / np.mean(noise * noise))
    return noise


def realized_snr_db(clean: np.ndarray, noise: np.ndarray) -> float:
    return 10.0 * math.log10(np.mean(clean * clean) / np.mean(noise * noise))


# ---------------------------------------------------------------------------
# synthetic word tokens

# (F1, F2, F3) in Hz, one vowel-like resonance set per vocabulary class
CLASS_FORMANTS = np.array([
    [270, 2290, 3010],
    [300, 870, 2240],
    [730, 1090, 2440],
    [660, 1720, 2410],
    [490, 1350, 1690],
    [570, 840, 2410],
    [530, 1840, 2480],
    [390, 1990, 2550],
    [440, 1020, 2240],
    [640, 1190, 2390],
    [500, 1500, 2500],
    [350, 1400, 2900],
], dtype=float)
N_CLASSES = len(CLASS_FORMANTS)
FORMANT_JITTER = 0.03
TOKEN_PEAK = 0.5


def speaker_pitch(speaker_id: int) -> float:
    """Mean F0 of a synthetic speaker, spread over 95-265 Hz."""
    frac = (speaker_id * 0.6180339887498949) % 1.0
    return 95.0 + 170.0 * frac


def _pulse_train(n, sr, f0_start, f0_end):
    f0 = np.linspace(f0_start, f0_end, n)
    phase = np.cumsum(f0 / sr)
    pulses = np.zeros(n)
    pulses[np.flatnonzero(np.diff(np.floor(phase), prepend=-1.0) > 0)] = 1.0
    return pulses


def synthesize_word_token(class_id: int, speaker_id: int, attempt_seed: int,
                          sample_rate: int = 8000) -> AudioClip:
    """Generate one synthetic utterance of a vocabulary class.

    A pulse train at the speaker's pitch, softened by a one-pole glottal
    lowpass, drives a fixed all-pole vocal tract for the class. Each attempt
    jitters the resonances by at most 3% and the pitch by at most 5%.
    """
    if not 0 <= class_id < N_CLASSES:
        raise UnknownClass(f"class {class_id} outside 0..{N_CLASSES - 1}")
    if sample_rate not in SUPPORTED_RATES:
        raise UnsupportedFormat(f"sample rate {sample_rate} Hz not supported")
    rng = np.random.default_rng([class_id, speaker_id, attempt_seed])

    sr = sample_rate
    n_voiced = int(round(rng.uniform(0.35, 0.60) * sr))
    lead = int(round(rng.uniform(0.03, 0.08) * sr))
    tail = int(round(rng.uniform(0.03, 0.08) * sr))

    f0 = speaker_pitch(speaker_id) * (1.0 + rng.uniform(-0.05, 0.05))
    excitation = _pulse_train(n_voiced, sr, f0, 0.9 * f0)
    excitation = lfilter([1.0], [1.0, -0.9], excitation)
    excitation += 0.02 * rng.standard_normal(n_voiced)

    formants = CLASS_FORMANTS[class_id] * (1.0 + rng.uniform(-FORMANT_JITTER, FORMANT_JITTER, 3))
    bandwidths = 50.0 + 0.04 * formants
    radii = np.exp(-np.pi * bandwidths / sr)
    poles = radii * np.exp(2j * np.pi * formants / sr)
    denom = np.real(np.poly(np.concatenate([poles, poles.conj()])))
    voiced = lfilter([1.0], denom, excitation)

    attack, release = int(0.03 * sr), int(0.05 * sr)
    env = np.ones(n_voiced)
    env[:attack] = 0.5 - 0.5 * np.cos(np.pi * np.arange(attack) / attack)
    env[n_voiced - release:] = 0.5 + 0.5 * np.cos(np.pi * np.arange(release) / release)
    voiced *= env
    voiced *= TOKEN_PEAK / np.max(np.abs(voiced))

    samples = np.concatenate([np.zeros(lead), voiced, np.zeros(tail)])
    return AudioClip(samples, sr)
