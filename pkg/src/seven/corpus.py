"""Corpus ingestion: sentence segmentation, tokenization, and vocabulary.

Raw text flows through three steps: files are split into sentences, sentences
are tokenized and stopword-filtered, and a frequency-ranked vocabulary maps
surviving tokens to dense integer ids. Sentence boundaries are authoritative:
nothing downstream ever pairs tokens across two sentences. Stopwords and
(by default) out-of-vocabulary tokens are removed *before* positions are
assigned, so every distance measured downstream refers to the filtered
sequence.
"""

from __future__ import annotations

import gzip
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import DataError

log = logging.getLogger(__name__)

# Position holder for out-of-vocabulary tokens in "gap" mode: occupies a
# position (so distances are preserved) but never participates in a pair.
GAP = -1

# Word-internal hyphens and apostrophes stick to the token ("state-of-the-art",
# "don't"); everything else is a boundary.
_TOKEN_RE = re.compile(r"\w+(?:['’\-]\w+)*")

# Sentence terminator: run of . ! ? plus any closing quotes/brackets, then
# whitespace. The split is confirmed by an uppercase/open-quote lookahead.
_TERMINAL_RE = re.compile(r"([.!?]+)[\"'”’\)\]]*\s+")
_OPEN_QUOTES = "\"'“‘«"
_TAIL_TOKEN_RE = re.compile(r"[\w.]+\Z")

# Words after which a period does not end the sentence.
_ABBREVIATIONS = frozenset(
    """
    Dr Mr Mrs Ms Prof Rev Hon Capt Col Gen Lt Sgt Sr Jr St Mt
    Inc Ltd Co Corp Univ Dept Fig No vs etc cf al ca
    Jan Feb Mar Apr Jun Jul Aug Sep Sept Oct Nov Dec
    e.g i.e U.S U.K Ph.D M.D B.A M.A M.Sc D.C approx est
    """.split()
)


def read_text(path) -> str:
    """Read a UTF-8 text file (gzip transparently unpacked)."""
    p = Path(path)
    opener = gzip.open if p.suffix == ".gz" else open
    with opener(p, "rb") as fh:
        data = fh.read()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DataError(f"{p}: invalid UTF-8 at byte {exc.start}") from exc


def _is_abbreviation(text: str, lo: int, hi: int) -> bool:
    # Token immediately before the terminal period; uppercase single letters
    # count as initials ("J. Smith").
    m = _TAIL_TOKEN_RE.search(text, max(lo, hi - 40), hi)
    if m is None:
        return False
    tok = m.group()
    return tok in _ABBREVIATIONS or (len(tok) == 1 and tok.isupper())


def segment_sentences(text: str) -> list[str]:
    """Split text into sentences at terminal punctuation.

    A split happens at a run of ``. ! ?`` followed by whitespace when the next
    character is uppercase or an opening quote, unless the period terminates a
    known abbreviation or a single-letter initial. All non-whitespace input is
    preserved across the returned sentences.
    """
    sentences: list[str] = []
    start = 0
    for m in _TERMINAL_RE.finditer(text):
        if m.start() < start:
            continue
        nxt = text[m.end() : m.end() + 1]
        if not nxt or not (nxt.isupper() or nxt in _OPEN_QUOTES):
            continue
        if m.group(1) == "." and _is_abbreviation(text, start, m.start()):
            continue
        chunk = text[start : m.end()].strip()
        if chunk:
            sentences.append(chunk)
        start = m.end()
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def load_stopwords(path) -> frozenset[str]:
    """Load a stopword file: one token per line, ``#`` comments ignored."""
    words = set()
    for line in read_text(path).splitlines():
        tok = line.strip()
        if tok and not tok.startswith("#"):
            words.add(tok.lower())
    return frozenset(words)


def default_stopwords() -> frozenset[str]:
    text = resources.files("seven").joinpath("data/stopwords.txt").read_text("utf-8")
    words = set()
    for line in text.splitlines():
        tok = line.strip()
        if tok and not tok.startswith("#"):
            words.add(tok.lower())
    return frozenset(words)


def tokenize(
    sentence: str,
    stopwords: frozenset[str],
    vocab: "Vocabulary | None" = None,
    *,
    lowercase: bool = False,
    oov_mode: str = "drop",
) -> list:
    """Tokenize one sentence; returns strings, or ids when ``vocab`` is given.

    Stopword matching is case-insensitive regardless of the ``lowercase``
    flag. With a vocabulary, out-of-vocabulary tokens are dropped before
    positions exist ("drop") or retained as GAP placeholders ("gap").
    """
    if oov_mode not in ("drop", "gap"):
        raise ValueError(f"unknown oov_mode {oov_mode!r}")
    toks = _TOKEN_RE.findall(sentence)
    if lowercase:
        toks = [t.lower() for t in toks]
    toks = [t for t in toks if t.lower() not in stopwords]
    if vocab is None:
        return toks
    out: list[int] = []
    for t in toks:
        i = vocab.id(t)
        if i is not None:
            out.append(i)
        elif oov_mode == "gap":
            out.append(GAP)
    return out


@dataclass
class Vocabulary:
    """Frequency-ranked word list; dense ids are list positions."""

    words: list[str]
    freqs: list[int]
    _ids: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self._ids = {w: i for i, w in enumerate(self.words)}
        if len(self._ids) != len(self.words):
            raise DataError("duplicate words in vocabulary")
        if len(self.freqs) != len(self.words):
            raise DataError("words and freqs length mismatch")

    def id(self, word: str):
        return self._ids.get(word)

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self._ids

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for w, c in zip(self.words, self.freqs):
                fh.write(f"{w}\t{c}\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        words: list[str] = []
        freqs: list[int] = []
        for lineno, line in enumerate(read_text(path).splitlines(), 1):
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected 'word<TAB>count'")
            try:
                freqs.append(int(parts[1]))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad count {parts[1]!r}") from exc
            words.append(parts[0])
        for i in range(1, len(freqs)):
            if freqs[i] > freqs[i - 1]:
                raise DataError(f"{path}:{i + 1}: frequencies not non-increasing")
        return cls(words, freqs)


def build_vocabulary(
    tokens: Iterable[str], size: int, stopwords: frozenset[str] = frozenset()
) -> Vocabulary:
    """Rank tokens by frequency and keep the top ``size``.

    Equal frequencies are ordered lexicographically so the ranking is a total
    order. If the corpus has fewer distinct tokens than requested, all of them
    are returned with a warning.
    """
    if size < 1:
        raise ValueError("vocabulary size must be >= 1")
    counts = Counter(t for t in tokens if t.lower() not in stopwords)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    if len(ranked) < size:
        log.warning(
            "corpus has only %d distinct tokens; requested vocabulary of %d",
            len(ranked),
            size,
        )
    ranked = ranked[:size]
    return Vocabulary([w for w, _ in ranked], [c for _, c in ranked])


def iter_sentences(paths: Sequence) -> Iterator[str]:
    for path in paths:
        yield from segment_sentences(read_text(path))


def iter_tokens(
    paths: Sequence, stopwords: frozenset[str], *, lowercase: bool = False
) -> Iterator[str]:
    """Flat token stream over files, for vocabulary building."""
    for sent in iter_sentences(paths):
        yield from tokenize(sent, stopwords, lowercase=lowercase)


def iter_token_ids(
    paths: Sequence,
    stopwords: frozenset[str],
    vocab: Vocabulary,
    *,
    lowercase: bool = False,
    oov_mode: str = "drop",
) -> Iterator[list[int]]:
    """Sentence-by-sentence id sequences over files."""
    for sent in iter_sentences(paths):
        yield tokenize(sent, stopwords, vocab, lowercase=lowercase, oov_mode=oov_mode)
