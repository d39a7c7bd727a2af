"""Isolated-word speech recognition with an LPC front end, VQ and discrete HMMs."""

__version__ = "0.1.0"

from .audio import (AudioClip, EndpointConfig, add_noise, detect_endpoints, load_wav,
                    save_wav, synthesize_word_token)
from .frontend import FeatureSequence, FrontendConfig, extract_features
from .hmm import HMMConfig, Hmm, baum_welch, forward, init_left_right, viterbi
from .lexicon import Lexicon, text_to_phonemes
from .recognizer import (EvalReport, Recognizer, TrainingCorpus, evaluate, load_model,
                         recognize, save_model, train_recognizer)
from .vq import Codebook, VQConfig, quantize, quantize_sequence, train_codebook
