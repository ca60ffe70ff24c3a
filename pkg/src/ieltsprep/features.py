"""Tokenization and hand-crafted linguistic indicators.

Everything here is deterministic and dependency-free so that both
scorers and the feedback engine can be tested hermetically.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

WORD_RE = re.compile(r"[A-Za-z]+(?:'[A-Za-z]+)*")
PUNCT_RE = re.compile(r"[.,;:!?\"()–—‘’“”-]")
_SENT_END_RE = re.compile(r"[.!?]+")

# Trailing-word stoplist: a sentence never ends right after these.
ABBREVIATIONS = {"mr", "mrs", "ms", "dr", "prof", "etc", "e.g", "i.e", "vs", "st", "no"}

DEFAULT_LEXICON_SIZE = 2000


class FeatureError(ValueError):
    """Raised for untokenizable text or invalid feature inputs."""


@dataclass(frozen=True)
class TokenizedEssay:
    words: tuple[str, ...]
    sentences: tuple[tuple[str, ...], ...]
    paragraphs: tuple[tuple[tuple[str, ...], ...], ...]

    @property
    def word_count(self) -> int:
        return len(self.words)

    @property
    def sentence_count(self) -> int:
        return len(self.sentences)

    @property
    def paragraph_count(self) -> int:
        return len(self.paragraphs)


@dataclass(frozen=True)
class FeatureVector:
    word_count: int
    mean_sentence_length: float
    lexical_diversity: float
    punctuation_density: float
    sophistication_ratio: float
    grammar_error_density: float
    connector_density: float
    paragraph_count: int

    FIELD_ORDER = (
        "word_count",
        "mean_sentence_length",
        "lexical_diversity",
        "punctuation_density",
        "sophistication_ratio",
        "grammar_error_density",
        "connector_density",
        "paragraph_count",
    )

    def as_list(self) -> list[float]:
        return [float(getattr(self, name)) for name in self.FIELD_ORDER]


def _load_lines(name: str) -> list[str]:
    text = resources.files("ieltsprep.data").joinpath(name).read_text(encoding="utf-8")
    return [line.strip() for line in text.splitlines() if line.strip()]


def load_frequency_lexicon(path: str | None = None, top_k: int = DEFAULT_LEXICON_SIZE) -> frozenset[str]:
    """Load the rank-ordered frequency list and keep the top K forms."""
    if path is None:
        words = _load_lines("frequency_lexicon.txt")
    else:
        with open(path, encoding="utf-8") as fh:
            words = [line.strip() for line in fh if line.strip()]
    return frozenset(w.lower() for w in words[:top_k])


def load_connectors(path: str | None = None) -> tuple[tuple[str, ...], ...]:
    """Connector phrases as word-token tuples, longest first."""
    lines = _load_lines("connectors.txt") if path is None else [
        line.strip() for line in open(path, encoding="utf-8") if line.strip()
    ]
    phrases = [tuple(p.lower().split()) for p in lines]
    return tuple(sorted(set(phrases), key=len, reverse=True))


def _split_sentence_spans(paragraph: str) -> list[str]:
    """Split one paragraph into sentence chunks.

    A boundary is terminal punctuation followed by whitespace and an
    uppercase letter, unless the preceding word is a known abbreviation.
    """
    chunks = []
    start = 0
    for match in _SENT_END_RE.finditer(paragraph):
        end = match.end()
        rest = paragraph[end:]
        stripped = rest.lstrip()
        if not stripped:
            continue
        if len(stripped) == len(rest):  # no whitespace after punctuation
            continue
        if not stripped[0].isupper():
            continue
        preceding = WORD_RE.findall(paragraph[start : match.start()])
        if preceding and preceding[-1].lower() in ABBREVIATIONS:
            continue
        chunks.append(paragraph[start:end])
        start = end
    chunks.append(paragraph[start:])
    return chunks


def paragraph_sentence_spans(text: str) -> list[list[tuple[int, int]]]:
    """Character spans of each sentence, grouped by paragraph.

    Spans are trimmed of surrounding whitespace and cover the same
    sentences tokenize() produces (word-free chunks are skipped).
    """
    result = []
    offset = 0
    parts = re.split(r"(\n\s*\n)", text)
    for i, part in enumerate(parts):
        if i % 2 == 1:  # paragraph separator
            offset += len(part)
            continue
        spans = []
        chunk_start = offset
        for chunk in _split_sentence_spans(part):
            if WORD_RE.search(chunk):
                leading = len(chunk) - len(chunk.lstrip())
                trailing = len(chunk) - len(chunk.rstrip())
                spans.append((chunk_start + leading, chunk_start + len(chunk) - trailing))
            chunk_start += len(chunk)
        if spans:
            result.append(spans)
        offset += len(part)
    return result


def tokenize(text: str) -> TokenizedEssay:
    """Deterministic word/sentence/paragraph tokenization.

    Words are maximal runs of letters and internal apostrophes;
    paragraphs are separated by blank lines.
    """
    if not text or not text.strip():
        raise FeatureError("no word tokens in text")
    paragraphs = []
    for block in re.split(r"\n\s*\n", text):
        sentences = []
        for chunk in _split_sentence_spans(block):
            words = tuple(WORD_RE.findall(chunk))
            if words:
                sentences.append(words)
        if sentences:
            paragraphs.append(tuple(sentences))
    if not paragraphs:
        raise FeatureError("no word tokens in text")
    sentences = tuple(s for p in paragraphs for s in p)
    words = tuple(w for s in sentences for w in s)
    return TokenizedEssay(words=words, sentences=sentences, paragraphs=tuple(paragraphs))


def lexical_diversity(words: tuple[str, ...]) -> float:
    """Type-token ratio over case-folded word tokens."""
    if not words:
        raise FeatureError("empty word list")
    return len({w.lower() for w in words}) / len(words)


def sophistication_ratio(words: tuple[str, ...] | list[str], lexicon: frozenset[str]) -> float:
    """Fraction of alphabetic tokens outside the frequency lexicon."""
    alpha = [w.lower() for w in words if w.replace("'", "").isalpha()]
    if not alpha:
        raise FeatureError("empty word list")
    return sum(1 for w in alpha if w not in lexicon) / len(alpha)


def count_connectors(sentences, connectors) -> int:
    """Count connector-phrase occurrences across sentences (greedy, longest match first)."""
    total = 0
    for sentence in sentences:
        lowered = [w.lower() for w in sentence]
        i = 0
        while i < len(lowered):
            for phrase in connectors:
                if tuple(lowered[i : i + len(phrase)]) == phrase:
                    total += 1
                    i += len(phrase) - 1
                    break
            i += 1
    return total


def extract_features(text: str, lexicon: frozenset[str], backend, connectors=None) -> FeatureVector:
    """Compose tokenize, grammar checking, and the lexical ratios."""
    tokenized = tokenize(text)
    issues = backend.check(text)
    return build_features(text, tokenized, len(issues), lexicon, connectors)


def build_features(
    text: str, tokenized: TokenizedEssay, issue_count: int, lexicon: frozenset[str], connectors=None
) -> FeatureVector:
    if connectors is None:
        connectors = load_connectors()
    wc = tokenized.word_count
    return FeatureVector(
        word_count=wc,
        mean_sentence_length=wc / tokenized.sentence_count,
        lexical_diversity=lexical_diversity(tokenized.words),
        punctuation_density=len(PUNCT_RE.findall(text)) * 100.0 / wc,
        sophistication_ratio=sophistication_ratio(tokenized.words, lexicon),
        grammar_error_density=issue_count * 100.0 / wc,
        connector_density=count_connectors(tokenized.sentences, connectors) / tokenized.sentence_count,
        paragraph_count=tokenized.paragraph_count,
    )
