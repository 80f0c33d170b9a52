"""Raw relation vectors: averaged context embeddings per selected edge.

For every ordered occurrence of an edge pair within the window, three segment
means are taken over the sentence's embedded tokens: strictly before the first
word, strictly between the two, and strictly after the second. Per-direction
block means over all such occurrences are concatenated into a 6d vector laid
out as pre|mid|post for the canonical direction followed by pre|mid|post for
the reverse. Tokens without embeddings contribute to neither sum nor divisor;
an empty segment is the zero vector.

The same container also holds compressed stores: ``m > 0`` means each record
carries the two directed m-dimensional codes instead of the raw 6d vector.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .embeddings import EmbeddingStore
from .errors import DataError
from .graph import EdgeGraph, DEFAULT_WINDOW

log = logging.getLogger(__name__)

MAGIC = b"SVN1"


def swap_directions(z: np.ndarray, d: int) -> np.ndarray:
    """Exchange the two 3-block halves of a 6d relation vector."""
    z = np.asarray(z)
    if z.shape[-1] != 6 * d:
        raise ValueError(f"expected a vector of length {6 * d}, got {z.shape[-1]}")
    return np.concatenate([z[..., 3 * d :], z[..., : 3 * d]], axis=-1)


def relation_strength(vec_or_record) -> float:
    """Euclidean norm of a relation vector (or a record's vector); large
    codes mark strongly related pairs."""
    vec = getattr(vec_or_record, "vec", vec_or_record)
    return float(np.linalg.norm(np.asarray(vec, dtype=np.float64)))


def sentence_context_vectors(
    sent, p: int, q: int, store: EmbeddingStore
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Segment means (pre, mid, post) around positions p < q of one sentence."""
    n = len(sent)
    if not (0 <= p < q < n):
        raise ValueError(f"positions must satisfy 0 <= p < q < len(sent); got {p}, {q}")
    d = store.dim

    def seg_mean(lo: int, hi: int) -> np.ndarray:
        acc = np.zeros(d, dtype=np.float64)
        k = 0
        for t in sent[lo:hi]:
            v = store.get(t) if t >= 0 else None
            if v is not None:
                acc += v
                k += 1
        return acc / k if k else acc

    return seg_mean(0, p), seg_mean(p + 1, q), seg_mean(q + 1, n)


@dataclass
class RelationRecord:
    a: int              # vocab ids; word(a) < word(b) lexicographically
    b: int
    count_ab: int       # ordered occurrences with a before b
    count_ba: int
    vec: np.ndarray     # 6d raw vector (m == 0) or r_ab|r_ba codes (m > 0)


@dataclass
class RelationStore:
    """Per-edge relation vectors, raw (m == 0) or compressed (m > 0)."""

    d: int
    m: int
    records: list
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self._index = {(min(r.a, r.b), max(r.a, r.b)): r for r in self.records}

    def get(self, i: int, j: int):
        return self._index.get((min(i, j), max(i, j)))

    def directed(self, w: int, n: int):
        """Vector for the ordered pair (w, n): w in first position, or None."""
        rec = self.get(w, n)
        if rec is None:
            return None
        if self.m == 0:
            return rec.vec if w == rec.a else swap_directions(rec.vec, self.d)
        return rec.vec[: self.m] if w == rec.a else rec.vec[self.m :]

    def __len__(self) -> int:
        return len(self.records)


def record_usable(rec: RelationRecord, store: EmbeddingStore) -> bool:
    """An edge is usable when observed at least once and both ends are embedded."""
    return (rec.count_ab > 0 or rec.count_ba > 0) and store.has(rec.a) and store.has(rec.b)


def build_relation_records(
    sentences: Iterable,
    graph: EdgeGraph,
    store: EmbeddingStore,
    window: int = DEFAULT_WINDOW,
) -> RelationStore:
    """Average sentence context vectors over every ordered edge occurrence.

    Each ordered position pair (p, q) with q - p <= window whose words form a
    selected edge contributes one (pre, mid, post) term to the matching
    direction of that edge. Directions with no occurrences are left at zero.
    """
    V = len(graph.vocab)
    d = store.dim
    items = sorted(graph.edges.items())
    edge_keys = np.array([k for k, _ in items], dtype=np.int64)
    edge_ab = [(e.a, e.b) for _, e in items]
    n_edges = len(items)
    sums = np.zeros((n_edges, 6 * d), dtype=np.float64)
    cnt_ab = np.zeros(n_edges, dtype=np.int64)
    cnt_ba = np.zeros(n_edges, dtype=np.int64)
    rowmap = store.rowmap(V)
    vectors = store.vectors

    for sent in sentences:
        n = len(sent)
        if n < 2 or n_edges == 0:
            continue
        ids = np.asarray(sent, dtype=np.int64)
        hits: list[tuple[int, int, int]] = []
        for delta in range(1, min(window, n - 1) + 1):
            a = ids[:-delta]
            b = ids[delta:]
            idx = np.flatnonzero((a >= 0) & (b >= 0) & (a != b))
            if idx.size == 0:
                continue
            am = a[idx]
            bm = b[idx]
            keys = np.minimum(am, bm) * V + np.maximum(am, bm)
            slot = np.searchsorted(edge_keys, keys)
            slot = np.minimum(slot, n_edges - 1)
            hit = edge_keys[slot] == keys
            for p, row in zip(idx[hit], slot[hit]):
                hits.append((int(p), int(p) + delta, int(row)))
        if not hits:
            continue

        # Prefix sums over embedded tokens only: P[k] sums rows of the first k
        # tokens, C[k] counts how many of them had a vector.
        rm = rowmap[np.maximum(ids, 0)]
        rm[ids < 0] = -1
        present = rm >= 0
        mat = np.zeros((n, d), dtype=np.float64)
        if present.any():
            mat[present] = vectors[rm[present]]
        P = np.zeros((n + 1, d), dtype=np.float64)
        np.cumsum(mat, axis=0, out=P[1:])
        C = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(present, out=C[1:])

        def seg(lo: int, hi: int) -> np.ndarray:
            k = C[hi] - C[lo]
            if k == 0:
                return np.zeros(d, dtype=np.float64)
            return (P[hi] - P[lo]) / k

        for p, q, row in hits:
            block = np.concatenate([seg(0, p), seg(p + 1, q), seg(q + 1, n)])
            if ids[p] == edge_ab[row][0]:
                sums[row, : 3 * d] += block
                cnt_ab[row] += 1
            else:
                sums[row, 3 * d :] += block
                cnt_ba[row] += 1

    z = np.zeros_like(sums)
    has_ab = cnt_ab > 0
    has_ba = cnt_ba > 0
    z[has_ab, : 3 * d] = sums[has_ab, : 3 * d] / cnt_ab[has_ab, None]
    z[has_ba, 3 * d :] = sums[has_ba, 3 * d :] / cnt_ba[has_ba, None]

    words = graph.vocab.words
    order = sorted(range(n_edges), key=lambda t: (words[edge_ab[t][0]], words[edge_ab[t][1]]))
    records = [
        RelationRecord(edge_ab[t][0], edge_ab[t][1], int(cnt_ab[t]), int(cnt_ba[t]), z[t])
        for t in order
    ]
    unusable = sum(1 for r in records if not record_usable(r, store))
    if unusable:
        log.info("%d/%d edges flagged unusable (no occurrences or missing vectors)",
                 unusable, n_edges)
    return RelationStore(d=d, m=0, records=records)


def save_store(store: RelationStore, path) -> None:
    """Binary store: SVN1 header (d, m, count), then fixed-size records."""
    width = 6 * store.d if store.m == 0 else 2 * store.m
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIII", MAGIC, store.d, store.m, len(store.records)))
        for rec in store.records:
            if len(rec.vec) != width:
                raise DataError(f"record ({rec.a}, {rec.b}) has wrong vector width")
            fh.write(struct.pack("<IIII", rec.a, rec.b, rec.count_ab, rec.count_ba))
            fh.write(np.asarray(rec.vec, dtype="<f4").tobytes())


def load_store(path) -> RelationStore:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 16 or data[:4] != MAGIC:
        raise DataError(f"{path}: not a relation store (bad magic)")
    _, d, m, count = struct.unpack_from("<4sIII", data, 0)
    width = 6 * d if m == 0 else 2 * m
    rec_bytes = 16 + 4 * width
    if len(data) != 16 + count * rec_bytes:
        raise DataError(f"{path}: truncated or padded store")
    records = []
    off = 16
    for _ in range(count):
        a, b, cab, cba = struct.unpack_from("<IIII", data, off)
        vec = np.frombuffer(data, dtype="<f4", count=width, offset=off + 16).copy()
        records.append(RelationRecord(int(a), int(b), int(cab), int(cba), vec))
        off += rec_bytes
    return RelationStore(d=int(d), m=int(m), records=records)
