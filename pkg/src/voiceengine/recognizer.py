"""Isolated-word recognizer: one discrete HMM per word over a shared codebook."""
from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import hmm as hmm_mod
from .audio import (CLEAN, AudioClip, EndpointConfig, add_noise, detect_endpoints,
                    read_wav)
from .errors import (MalformedModelFile, MissingWordSamples, UnknownWord,
                     UnsupportedVersion, VoiceEngineError, CorpusError)
from .frontend import FeatureSequence, FrontendConfig, extract_features
from .hmm import HMMConfig, Hmm
from .vq import Codebook, VQConfig, quantize_sequence, train_codebook

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
DEFAULT_VOCABULARY = ("zero", "one", "two", "three", "four", "five", "six",
                      "seven", "eight", "nine", "plus", "minus")
MANIFEST_NAME = "manifest.csv"


# ---------------------------------------------------------------------------
# corpus

@dataclass(frozen=True)
class Sample:
    source: object          # path or AudioClip
    speaker: str = ""
    attempt: int = 0

    def load(self) -> AudioClip:
        if isinstance(self.source, AudioClip):
            return self.source
        return read_wav(self.source)

    @property
    def name(self):
        return str(self.source) if not isinstance(self.source, AudioClip) else \
            f"<clip speaker={self.speaker} attempt={self.attempt}>"


@dataclass
class TrainingCorpus:
    entries: dict = field(default_factory=dict)  # word -> list[Sample]

    def add(self, word, source, speaker="", attempt=0):
        self.entries.setdefault(word, []).append(Sample(source, str(speaker), int(attempt)))

    @property
    def words(self):
        return list(self.entries)

    def __len__(self):
        return sum(len(v) for v in self.entries.values())

    def items(self):
        """(word, sample) pairs in a stable order."""
        for word, samples in self.entries.items():
            for s in samples:
                yield word, s


def load_manifest(path) -> TrainingCorpus:
    path = Path(path)
    corpus = TrainingCorpus()
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 4:
                raise CorpusError(f"{path}:{lineno}: expected path,word,speaker,attempt")
            rel, word, speaker, attempt = parts
            try:
                attempt = int(attempt)
            except ValueError:
                raise CorpusError(f"{path}:{lineno}: attempt {attempt!r} is not an integer")
            corpus.add(word, path.parent / rel, speaker, attempt)
    return corpus


def load_corpus_dir(root) -> TrainingCorpus:
    """Read ``root/manifest.csv`` if present, else ``root/<word>/<speaker>_<attempt>.wav``.

    Word directories without any WAV file are kept as empty entries so a
    missing word can be reported by name.
    """
    root = Path(root)
    if not root.is_dir():
        raise CorpusError(f"corpus directory {root} does not exist")
    if (root / MANIFEST_NAME).is_file():
        return load_manifest(root / MANIFEST_NAME)
    corpus = TrainingCorpus()
    for word_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        corpus.entries.setdefault(word_dir.name, [])
        for wav in sorted(word_dir.glob("*.wav")):
            speaker, _, attempt = wav.stem.rpartition("_")
            corpus.add(word_dir.name, wav, speaker, int(attempt) if attempt.isdigit() else 0)
    return corpus


# ---------------------------------------------------------------------------
# model

@dataclass(frozen=True, eq=False)
class Recognizer:
    frontend: FrontendConfig
    endpoint: EndpointConfig
    codebook: Codebook
    word_models: dict  # word -> Hmm, in vocabulary order

    @property
    def vocabulary(self):
        return list(self.word_models)


class Ranking(list):
    """Ranked (word, log_likelihood) pairs, best first."""

    @property
    def best(self):
        return self[0][0]

    @property
    def all_impossible(self):
        return all(ll == -math.inf for _, ll in self)


def _annotate(exc, name):
    exc.args = (f"{name}: {exc}",)


def features_for(clip: AudioClip, fe: FrontendConfig, ep: EndpointConfig) -> FeatureSequence:
    return extract_features(detect_endpoints(clip, ep), fe)


def train_recognizer(corpus: TrainingCorpus, vocab=None, fe_cfg=FrontendConfig(),
                     hmm_cfg=HMMConfig(), vq_cfg=VQConfig(), seed=0,
                     ep_cfg=EndpointConfig(), stats=None) -> Recognizer:
    """Endpoint and featurize every sample, train the shared codebook on the
    pooled vectors, then fit one left-to-right HMM per word.

    ``stats``, if a dict, receives each word's per-iteration training
    log-likelihoods.
    """
    vocab = list(corpus.words if vocab is None else vocab)
    for word in vocab:
        if not corpus.entries.get(word):
            raise MissingWordSamples(word)

    feats = {}
    for word in vocab:
        feats[word] = []
        for sample in corpus.entries[word]:
            try:
                feats[word].append(features_for(sample.load(), fe_cfg, ep_cfg))
            except VoiceEngineError as exc:
                _annotate(exc, sample.name)
                raise

    pooled = np.concatenate([fs.vectors for word in vocab for fs in feats[word]])
    size = min(vq_cfg.size, 1 << int(math.log2(len(pooled))))
    if size < vq_cfg.size:
        log.warning("codebook size reduced to %d for %d training vectors", size, len(pooled))
    codebook = train_codebook(pooled, size, seed, vq_cfg.max_iters, vq_cfg.tol, vq_cfg.split_eps)

    # seeds for the per-word initial models are drawn up front, in vocabulary order
    word_seeds = np.random.SeedSequence(seed).spawn(len(vocab))
    models = {}
    for word, ss in zip(vocab, word_seeds):
        seqs = [quantize_sequence(codebook, fs) for fs in feats[word]]
        init = hmm_mod.init_left_right(hmm_cfg.n_states, codebook.size,
                                       int(ss.generate_state(1)[0]))
        model, history = hmm_mod.baum_welch(init, seqs, hmm_cfg.max_iters, hmm_cfg.tol,
                                            hmm_cfg.floor_b, hmm_cfg.floor_a)
        log.info("word %s: %d iterations, log-likelihood %.3f", word, len(history) - 1, history[-1])
        models[word] = model
        if stats is not None:
            stats[word] = history
    return Recognizer(fe_cfg, ep_cfg, codebook, models)


def score(r: Recognizer, obs) -> Ranking:
    scored = [(w, hmm_mod.log_likelihood(m, obs)) for w, m in r.word_models.items()]
    # stable sort keeps vocabulary order among equal scores
    return Ranking(sorted(scored, key=lambda wl: -wl[1]))


def recognize(r: Recognizer, clip: AudioClip) -> Ranking:
    obs = quantize_sequence(r.codebook, features_for(clip, r.frontend, r.endpoint))
    return score(r, obs)


# ---------------------------------------------------------------------------
# evaluation

@dataclass
class EvalReport:
    words: list
    confusion: np.ndarray  # rows: true word, columns: predicted word

    @property
    def total(self):
        return int(self.confusion.sum())

    @property
    def correct(self):
        return int(np.trace(self.confusion))

    @property
    def accuracy(self):
        return self.correct / self.total if self.total else 0.0

    @property
    def per_word_accuracy(self):
        rows = self.confusion.sum(axis=1)
        return {w: (float(self.confusion[i, i] / rows[i]) if rows[i] else 0.0)
                for i, w in enumerate(self.words)}

    def to_dict(self):
        return {"total": self.total, "correct": self.correct, "accuracy": self.accuracy,
                "words": list(self.words), "confusion": self.confusion.tolist(),
                "per_word_accuracy": self.per_word_accuracy}

    def format(self):
        width = max(6, max(len(w) for w in self.words) + 1)
        lines = [f"accuracy: {self.accuracy:.4f} ({self.correct}/{self.total})", "",
                 "per-word accuracy:"]
        for w, acc in self.per_word_accuracy.items():
            lines.append(f"  {w:<{width}}{acc:.4f}")
        lines += ["", "confusion (rows = true, columns = predicted):",
                  " " * width + "".join(f"{w:>{width}}" for w in self.words)]
        for w, row in zip(self.words, self.confusion):
            lines.append(f"{w:<{width}}" + "".join(f"{int(v):>{width}}" for v in row))
        return "\n".join(lines)


def evaluate(r: Recognizer, test: TrainingCorpus, noise_snr_db=None, seed=0) -> EvalReport:
    """Top-1 accuracy and confusion matrix, optionally after adding noise.

    Each test sample gets its own noise seed derived from ``seed`` and its
    position in the corpus.
    """
    words = r.vocabulary
    index = {w: i for i, w in enumerate(words)}
    for w in test.words:
        if w not in index:
            raise UnknownWord(w)
    confusion = np.zeros((len(words), len(words)), dtype=np.int64)
    snr = CLEAN if noise_snr_db is None else noise_snr_db
    for n, (word, sample) in enumerate(test.items()):
        clip = sample.load()
        if not math.isinf(snr):
            clip = add_noise(clip, snr, int(np.random.SeedSequence([seed, n]).generate_state(1)[0]))
        try:
            best = recognize(r, clip).best
        except VoiceEngineError as exc:
            _annotate(exc, sample.name)
            raise
        confusion[index[word], index[best]] += 1
    return EvalReport(words, confusion)


# ---------------------------------------------------------------------------
# persistence

def save_model(r: Recognizer) -> bytes:
    doc = {
        "format_version": FORMAT_VERSION,
        "frontend": {**asdict(r.frontend), "endpoint": asdict(r.endpoint)},
        "codebook": r.codebook.centroids.tolist(),
        "words": {w: m.to_dict() for w, m in r.word_models.items()},
    }
    # json writes floats with repr(), which round-trips exactly
    return (json.dumps(doc, indent=1) + "\n").encode("utf-8")


def load_model(data: bytes) -> Recognizer:
    try:
        doc = json.loads(bytes(data).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedModelFile(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise MalformedModelFile("model file has no format_version")
    version = doc["format_version"]
    if not isinstance(version, int):
        raise MalformedModelFile("format_version must be an integer")
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"model format version {version}, expected {FORMAT_VERSION}")
    try:
        fe = dict(doc["frontend"])
        ep = EndpointConfig(**fe.pop("endpoint"))
        frontend = FrontendConfig(**fe)
        codebook = Codebook(doc["codebook"])
        models = {w: Hmm.from_dict(d) for w, d in doc["words"].items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedModelFile(f"bad model contents: {exc}") from exc
    if not models:
        raise MalformedModelFile("model has no word models")
    if any(m.M != codebook.size for m in models.values()):
        raise MalformedModelFile("word models disagree with codebook size")
    if codebook.dim != frontend.cepstrum_order:
        raise MalformedModelFile("codebook dimension disagrees with cepstrum order")
    return Recognizer(frontend, ep, codebook, models)


def read_model(path) -> Recognizer:
    with open(path, "rb") as f:
        return load_model(f.read())


def write_model(path, r: Recognizer):
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as f:
        f.write(save_model(r))
    os.replace(tmp, path)
