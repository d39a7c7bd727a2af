import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from voiceengine.hmm import Hmm  # noqa: E402

_criteria = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    name = report.nodeid.split("::")[-1]
    if "test_acceptance.py" in report.nodeid and name.startswith("test_criterion_"):
        _criteria[name] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda n: int(n.split("_")[2])):
        terminalreporter.write_line(f"{_criteria[name]}  {name}")


def random_stochastic(rng, shape, zero_frac=0.0):
    x = rng.dirichlet(np.ones(shape[-1]), size=shape[:-1])
    if zero_frac:
        x[rng.random(shape) < zero_frac] = 0.0
        for row in x.reshape(-1, shape[-1]):
            if row.sum() == 0:
                row[rng.integers(shape[-1])] = 1.0
        x /= x.sum(axis=-1, keepdims=True)
    return x


def random_hmm(rng, n, m, zero_frac=0.0):
    pi = random_stochastic(rng, (n,), zero_frac)
    A = random_stochastic(rng, (n, n), zero_frac)
    B = random_stochastic(rng, (n, m), zero_frac)
    return Hmm(pi, A, B, np.ones((n, n), dtype=bool))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def chain():
    """Deterministic two-state chain: state 0 emits 'a' (0), state 1 emits 'b' (1)."""
    return Hmm([1.0, 0.0], [[0.0, 1.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 1.0]])


def synthetic_corpus(classes, speakers, attempts, seed):
    from voiceengine.audio import synthesize_word_token
    from voiceengine.recognizer import DEFAULT_VOCABULARY, TrainingCorpus

    corpus = TrainingCorpus()
    for k in classes:
        for s in speakers:
            for a in range(attempts):
                clip = synthesize_word_token(k, s, seed * 1000 + a)
                corpus.add(DEFAULT_VOCABULARY[k], clip, s, a)
    return corpus


@pytest.fixture(scope="session")
def twelve_word():
    """Recognizer trained in memory on 12 classes x 5 speakers x 5 attempts."""
    from voiceengine.recognizer import train_recognizer

    train = synthetic_corpus(range(12), range(5), 5, seed=0)
    return train, train_recognizer(train, seed=0)
