"""Word-level text-to-phoneme lookup (ARPAbet symbols)."""
from __future__ import annotations

from pathlib import Path

from .errors import OutOfVocabulary

BOUNDARY = "|"

DIGIT_WORDS = ("zero", "one", "two", "three", "four",
               "five", "six", "seven", "eight", "nine")

DEFAULT_ENTRIES = {
    "zero": ["Z", "IH", "R", "OW"],
    "one": ["W", "AH", "N"],
    "two": ["T", "UW"],
    "three": ["TH", "R", "IY"],
    "four": ["F", "AO", "R"],
    "five": ["F", "AY", "V"],
    "six": ["S", "IH", "K", "S"],
    "seven": ["S", "EH", "V", "AH", "N"],
    "eight": ["EY", "T"],
    "nine": ["N", "AY", "N"],
    "plus": ["P", "L", "AH", "S"],
    "minus": ["M", "AY", "N", "AH", "S"],
    "times": ["T", "AY", "M", "Z"],
    "divided": ["D", "IH", "V", "AY", "D", "IH", "D"],
    "by": ["B", "AY"],
    "equals": ["IY", "K", "W", "AH", "L", "Z"],
}


class Lexicon(dict):
    """Mapping of lowercase word -> list of phoneme symbols."""

    def __init__(self, entries=None):
        super().__init__()
        for word, phones in (entries or {}).items():
            if not phones:
                raise ValueError(f"empty pronunciation for {word!r}")
            self[word.lower()] = list(phones)

    @classmethod
    def default(cls):
        return cls(DEFAULT_ENTRIES)

    @classmethod
    def parse(cls, text):
        """Parse ``word<TAB>PH PH PH`` lines; blank lines and ``#`` comments are skipped."""
        entries = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].rstrip()
            if not line.strip():
                continue
            word, sep, phones = line.partition("\t")
            if not sep or not phones.split():
                raise ValueError(f"line {lineno}: expected word<TAB>phonemes")
            entries[word.strip().lower()] = phones.split()
        return cls(entries)

    @classmethod
    def load(cls, path):
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def dumps(self):
        return "".join(f"{w}\t{' '.join(p)}\n" for w, p in self.items())


def _normalize(token):
    token = token.lower()
    if len(token) == 1 and token.isdigit():
        return DIGIT_WORDS[int(token)]
    return token


def text_to_phonemes(text: str, lex: Lexicon | None = None) -> list[str]:
    """Phonemes for each whitespace-separated word, with ``|`` between words."""
    lex = Lexicon.default() if lex is None else lex
    words = [_normalize(t) for t in text.split()]
    if not words:
        raise ValueError("no words to convert")
    missing = [w for w in words if w not in lex]
    if missing:
        raise OutOfVocabulary(dict.fromkeys(missing))
    out = []
    for i, w in enumerate(words):
        if i:
            out.append(BOUNDARY)
        out.extend(lex[w])
    return out
