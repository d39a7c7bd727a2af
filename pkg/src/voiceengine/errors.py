"""Exception classes shared across the pipeline.

Every error raised on purpose by this package derives from ``VoiceEngineError``
so the command line layer can map failures to exit codes in one place.
"""


class VoiceEngineError(Exception):
    pass


# audio
class MalformedWav(VoiceEngineError):
    pass


class UnsupportedFormat(VoiceEngineError):
    pass


class NoSpeech(VoiceEngineError):
    pass


class SilentSignal(VoiceEngineError):
    pass


class UnknownClass(VoiceEngineError):
    pass


# front end
class ClipTooShort(VoiceEngineError):
    pass


class OrderTooHigh(VoiceEngineError):
    pass


class SilentFrame(VoiceEngineError):
    pass


class NumericalBreakdown(VoiceEngineError):
    pass


# vector quantization
class EmptyData(VoiceEngineError):
    pass


class TooManyCentroids(VoiceEngineError):
    pass


class DimensionMismatch(VoiceEngineError):
    pass


# hmm
class EmptyTrainingSet(VoiceEngineError):
    pass


class InvalidObservation(VoiceEngineError):
    pass


class DegenerateModel(UserWarning):
    """Issued (not raised) when a state gets no expected occupancy."""


# recognizer
class MissingWordSamples(VoiceEngineError):
    def __init__(self, word):
        super().__init__(f"no training samples for word {word!r}")
        self.word = word


class UnknownWord(VoiceEngineError):
    def __init__(self, word):
        super().__init__(f"word {word!r} is not in the recognizer vocabulary")
        self.word = word


class MalformedModelFile(VoiceEngineError):
    pass


class UnsupportedVersion(VoiceEngineError):
    pass


class CorpusError(VoiceEngineError):
    pass


# lexicon / config
class OutOfVocabulary(VoiceEngineError):
    def __init__(self, words):
        self.words = list(words)
        super().__init__("out of vocabulary: " + ", ".join(self.words))


class ConfigError(VoiceEngineError):
    pass
