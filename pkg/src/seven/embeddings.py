"""Pretrained word vector storage with id-indexed access.

Two on-disk formats are supported: the common text layout (optional
"count dim" header, then one ``word v1 ... vd`` line per word) and the packed
binary variant (ascii ``count dim`` header line, then per record the word
bytes, one space, and d little-endian float32 values). Vectors are held as
float32; downstream accumulation happens in float64.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Vocabulary
from .errors import DataError

log = logging.getLogger(__name__)


@dataclass
class EmbeddingStore:
    """Immutable map from vocabulary id to a d-dimensional float32 vector."""

    dim: int
    vectors: np.ndarray            # (covered, dim) float32, read-only
    rows: dict                     # vocab id -> row index
    coverage: float                # covered / |vocab|

    def get(self, word_id: int):
        row = self.rows.get(word_id)
        return None if row is None else self.vectors[row]

    def has(self, word_id: int) -> bool:
        return word_id in self.rows

    def rowmap(self, vocab_size: int) -> np.ndarray:
        """Dense id -> row lookup table; -1 where no vector is stored."""
        out = np.full(vocab_size, -1, dtype=np.int64)
        for word_id, row in self.rows.items():
            out[word_id] = row
        return out


def get_vector(store: EmbeddingStore, word_id: int):
    return store.get(word_id)


def _sniff_binary(path: Path) -> bool:
    # A binary file starts with an ascii "count dim" header and then raw
    # float32 bytes, which almost never form valid UTF-8.
    with open(path, "rb") as fh:
        first = fh.readline()
        parts = first.split()
        if len(parts) != 2:
            return False
        try:
            int(parts[0]), int(parts[1])
        except ValueError:
            return False
        chunk = fh.read(4096)
    try:
        chunk.decode("utf-8")
    except UnicodeDecodeError:
        return True
    return False


def _iter_text_records(path: Path):
    dim = None
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, 1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid UTF-8") from exc
            parts = line.split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    continue  # header line
                except ValueError:
                    pass
            if dim is None:
                dim = len(parts) - 1
                if dim < 1:
                    raise DataError(f"{path}:{lineno}: no vector components")
            if len(parts) - 1 != dim:
                raise DataError(
                    f"{path}:{lineno}: expected {dim} components, got {len(parts) - 1}"
                )
            try:
                vec = np.array(parts[1:], dtype=np.float32)
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad float") from exc
            if not np.isfinite(vec).all():
                raise DataError(f"{path}:{lineno}: non-finite component")
            yield parts[0], vec, lineno


def _iter_binary_records(path: Path):
    with open(path, "rb") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise DataError(f"{path}: bad binary header")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError as exc:
            raise DataError(f"{path}: bad binary header") from exc
        for rec in range(count):
            chars = []
            while True:
                ch = fh.read(1)
                if not ch:
                    raise DataError(f"{path}: truncated at record {rec}")
                if ch == b" ":
                    break
                if ch in (b"\n", b"\r"):
                    continue
                chars.append(ch)
            word = b"".join(chars).decode("utf-8")
            buf = fh.read(4 * dim)
            if len(buf) != 4 * dim:
                raise DataError(f"{path}: truncated vector for {word!r}")
            vec = np.frombuffer(buf, dtype="<f4").copy()
            if not np.isfinite(vec).all():
                raise DataError(f"{path}: non-finite component for {word!r}")
            yield word, vec, rec + 2


def load_embeddings(path, vocab: Vocabulary, binary: bool | None = None) -> EmbeddingStore:
    """Load vectors for the intersection of the file's words and ``vocab``.

    ``binary=None`` sniffs the format. Only the first occurrence of a word is
    kept. Raises on dimension inconsistencies and on empty intersection.
    """
    p = Path(path)
    if binary is None:
        binary = _sniff_binary(p)
    records = _iter_binary_records(p) if binary else _iter_text_records(p)

    dim = None
    rows: dict = {}
    chunks: list[np.ndarray] = []
    for word, vec, where in records:
        if dim is None:
            dim = len(vec)
        elif len(vec) != dim:
            raise DataError(f"{p}:{where}: expected {dim} components, got {len(vec)}")
        word_id = vocab.id(word)
        if word_id is None:
            continue
        if word_id in rows:
            log.warning("duplicate embedding for %r; keeping the first", word)
            continue
        rows[word_id] = len(chunks)
        chunks.append(vec)
    if not rows:
        raise DataError(f"{p}: no overlap between embedding file and vocabulary")
    matrix = np.vstack(chunks).astype(np.float32)
    matrix.setflags(write=False)
    coverage = len(rows) / len(vocab)
    log.info("loaded %d/%d vectors (d=%d) from %s", len(rows), len(vocab), dim, p)
    return EmbeddingStore(dim=int(dim), vectors=matrix, rows=rows, coverage=coverage)


def save_embeddings(store: EmbeddingStore, vocab: Vocabulary, path) -> None:
    """Write the store in word2vec text format with 9 significant digits."""
    ids = sorted(store.rows)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(ids)} {store.dim}\n")
        for word_id in ids:
            row = store.vectors[store.rows[word_id]]
            vals = " ".join(f"{float(x):.9g}" for x in row)
            fh.write(f"{vocab.words[word_id]} {vals}\n")
