"""LPC front end: preemphasis, framing, windowing, LPC analysis, cepstra.

Predictor sign convention throughout: s(n) ~ sum_i a[i-1] * s(n - i).
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .audio import AudioClip
from .errors import ClipTooShort, NumericalBreakdown, OrderTooHigh, SilentFrame

SILENCE_FLOOR = 1e-10


@dataclass(frozen=True)
class FrontendConfig:
    preemphasis_alpha: float = 0.97
    frame_len_ms: float = 25.0
    shift_ms: float = 10.0
    lpc_order: int = 12
    cepstrum_order: int = 12

    def __post_init__(self):
        if not 0.0 <= self.preemphasis_alpha < 1.0:
            raise ValueError("preemphasis_alpha must lie in [0, 1)")
        if self.lpc_order < 1 or self.cepstrum_order < 1:
            raise ValueError("lpc_order and cepstrum_order must be positive")
        if not self.frame_len_ms >= self.shift_ms > 0:
            raise ValueError("need frame_len_ms >= shift_ms > 0")

    def frame_samples(self, sample_rate):
        return int(round(self.frame_len_ms * sample_rate / 1000))

    def shift_samples(self, sample_rate):
        return int(round(self.shift_ms * sample_rate / 1000))

    def fingerprint(self):
        return json.dumps(asdict(self), sort_keys=True)


@dataclass(frozen=True, eq=False)
class LpcResult:
    a: np.ndarray         # predictor coefficients a_1..a_p
    k: np.ndarray         # reflection coefficients k_1..k_p
    error: float          # final prediction error energy E_p
    energies: np.ndarray  # E_0..E_p, E_0 = r[0]

    @property
    def order(self):
        return self.a.size


@dataclass(frozen=True, eq=False)
class FeatureSequence:
    vectors: np.ndarray   # shape (T, Q)
    fingerprint: str = ""

    def __len__(self):
        return self.vectors.shape[0]

    def to_json(self):
        return json.dumps({"fingerprint": self.fingerprint,
                           "vectors": self.vectors.tolist()})

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        return cls(np.array(obj["vectors"], dtype=float).reshape(len(obj["vectors"]), -1),
                   obj["fingerprint"])


def preemphasize(clip: AudioClip, alpha: float) -> AudioClip:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    x = clip.samples
    y = x.copy()
    y[1:] -= alpha * x[:-1]
    # a first difference can leave [-1, 1]; keep the full-range value
    return _unchecked_clip(y, clip.sample_rate)


def _unchecked_clip(samples, sample_rate):
    clip = object.__new__(AudioClip)
    samples = np.asarray(samples, dtype=np.float64)
    samples.setflags(write=False)
    object.__setattr__(clip, "samples", samples)
    object.__setattr__(clip, "sample_rate", sample_rate)
    return clip


def frame_blocks(clip: AudioClip, cfg: FrontendConfig) -> np.ndarray:
    """Split into overlapping frames, one per row; a trailing partial frame is dropped."""
    flen = cfg.frame_samples(clip.sample_rate)
    shift = cfg.shift_samples(clip.sample_rate)
    return _frames(clip.samples, flen, shift)


def _frames(x, flen, shift):
    if len(x) < flen:
        raise ClipTooShort(f"clip of {len(x)} samples is shorter than one frame ({flen})")
    count = (len(x) - flen) // shift + 1
    idx = np.arange(count)[:, None] * shift + np.arange(flen)[None, :]
    return x[idx]


def hamming_window(frame: np.ndarray) -> np.ndarray:
    frame = np.asarray(frame, dtype=float)
    n = frame.shape[-1]
    if n < 2:
        raise ValueError("hamming window needs at least 2 samples")
    w = 0.54 - 0.46 * np.cos(2.0 * np.pi * np.arange(n) / (n - 1))
    return frame * w


def autocorrelate(frame: np.ndarray, p: int) -> np.ndarray:
    x = np.asarray(frame, dtype=float)
    n = x.size
    if not 0 <= p < n:
        raise OrderTooHigh(f"order {p} needs a frame longer than {n} samples")
    return np.array([np.dot(x[:n - k], x[k:]) for k in range(p + 1)])


def levinson_durbin(r) -> LpcResult:
    """Solve the Toeplitz normal equations order by order."""
    r = np.asarray(r, dtype=float)
    p = r.size - 1
    if r[0] <= SILENCE_FLOOR:
        raise SilentFrame(f"r[0] = {r[0]:.3g} is below the silence floor")
    a = np.zeros(p)
    k = np.zeros(p)
    energies = np.empty(p + 1)
    energies[0] = e = r[0]
    for i in range(1, p + 1):
        acc = r[i] - np.dot(a[:i - 1], r[i - 1:0:-1])
        ki = acc / e
        prev = a[:i - 1].copy()
        a[:i - 1] = prev - ki * prev[::-1]
        a[i - 1] = ki
        k[i - 1] = ki
        e = e * (1.0 - ki * ki)
        if e <= 0.0:
            raise NumericalBreakdown(f"prediction error went non-positive at order {i}")
        energies[i] = e
    return LpcResult(a, k, float(e), energies)


def lpc_to_cepstrum(lpc: LpcResult | np.ndarray, q: int) -> np.ndarray:
    """Cepstral coefficients c_1..c_q of the all-pole model (gain term c_0 omitted)."""
    a = lpc.a if isinstance(lpc, LpcResult) else np.asarray(lpc, dtype=float)
    if q < 1:
        raise ValueError("cepstrum order must be positive")
    p = a.size
    c = np.zeros(q + 1)  # c[0] unused
    for m in range(1, q + 1):
        acc = a[m - 1] if m <= p else 0.0
        for k in range(max(1, m - p), m):
            acc += (k / m) * c[k] * a[m - k - 1]
        c[m] = acc
    return c[1:]


def extract_features(clip: AudioClip, cfg: FrontendConfig = FrontendConfig()) -> FeatureSequence:
    emph = preemphasize(clip, cfg.preemphasis_alpha)
    frames = frame_blocks(emph, cfg)
    if frames.shape[1] <= cfg.lpc_order:
        raise OrderTooHigh("frame length must exceed the LPC order")
    windowed = hamming_window(frames)
    out = np.zeros((frames.shape[0], cfg.cepstrum_order))
    for t, frame in enumerate(windowed):
        r = autocorrelate(frame, cfg.lpc_order)
        try:
            lpc = levinson_durbin(r)
        except SilentFrame:
            continue
        out[t] = lpc_to_cepstrum(lpc, cfg.cepstrum_order)
    return FeatureSequence(out, cfg.fingerprint())
