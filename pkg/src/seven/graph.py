"""Distance-weighted co-occurrence counting, PMI, and edge selection.

Co-occurrence mass for a word pair is the sum of 1/|p-q| over all position
pairs within the same sentence at distance <= window; pairs of identical words
are excluded. PMI uses the natural log of x_ij * x_total / (x_i * x_j). Edges
are chosen in two phases: each word contributes its top-K PMI partners among
pairs seen at least ``min_count`` times, then the globally best remaining
eligible pairs fill up to the edge target.

Counting is block-sharded: each shard reduces to sorted (key, weight, count)
arrays and shards merge in a fixed order, so results are identical for any
shard layout or worker count.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .corpus import Vocabulary
from .errors import DataError

log = logging.getLogger(__name__)

DEFAULT_WINDOW = 10
DEFAULT_MIN_COUNT = 10
DEFAULT_TOP_K = 10


def pair_weight(p: int, q: int, same_sentence: bool = True, window: int = DEFAULT_WINDOW) -> float:
    """Nearness weight of two word positions: 1/|p-q| within the window."""
    if p == q:
        raise ValueError("pair weight undefined for identical positions")
    if not same_sentence:
        return 0.0
    dist = abs(p - q)
    if dist > window:
        return 0.0
    return 1.0 / dist


@dataclass
class CooccurrenceCounts:
    """Sparse symmetric co-occurrence statistics over a fixed vocabulary.

    Pairs are stored once under the key ``min(i,j) * vocab_size + max(i,j)``;
    ``keys`` is sorted. ``x_row[i]`` is the weighted mass of word i summed over
    all partners, and ``x_total`` is the grand total over ordered pairs.
    """

    vocab_size: int
    keys: np.ndarray       # int64, sorted
    weighted: np.ndarray   # float64, aligned with keys
    raw: np.ndarray        # int64 co-occurrence event counts, aligned
    x_row: np.ndarray      # float64 (vocab_size,)
    x_total: float

    @property
    def n_pairs(self) -> int:
        return len(self.keys)

    def get(self, i: int, j: int) -> tuple[float, int]:
        """(weighted, raw) for an unordered pair; (0.0, 0) if never counted."""
        if i == j:
            raise ValueError("self-pairs are excluded from co-occurrence counts")
        key = min(i, j) * self.vocab_size + max(i, j)
        idx = np.searchsorted(self.keys, key)
        if idx < len(self.keys) and self.keys[idx] == key:
            return float(self.weighted[idx]), int(self.raw[idx])
        return 0.0, 0

    def pairs(self) -> Iterator[tuple[int, int, float, int]]:
        for key, w, r in zip(self.keys, self.weighted, self.raw):
            yield int(key // self.vocab_size), int(key % self.vocab_size), float(w), int(r)


def _count_block(sentences: list, vocab_size: int, window: int):
    """Reduce one shard of sentences to (keys, weighted, raw) arrays."""
    total = sum(len(s) for s in sentences) + window * len(sentences)
    buf = np.full(total, -1, dtype=np.int64)
    pos = 0
    for s in sentences:
        n = len(s)
        if n:
            buf[pos : pos + n] = s
        pos += n + window
    if buf.size and buf.max() >= vocab_size:
        raise DataError("token id exceeds vocabulary size")
    parts_k, parts_w, parts_r = [], [], []
    for delta in range(1, window + 1):
        if delta >= buf.size:
            break
        a = buf[:-delta]
        b = buf[delta:]
        mask = (a >= 0) & (b >= 0) & (a != b)
        if not mask.any():
            continue
        am = a[mask]
        bm = b[mask]
        keys = np.minimum(am, bm) * vocab_size + np.maximum(am, bm)
        u, cnt = np.unique(keys, return_counts=True)
        parts_k.append(u)
        parts_w.append(cnt / delta)
        parts_r.append(cnt)
    if not parts_k:
        return (np.empty(0, np.int64), np.empty(0, np.float64), np.empty(0, np.int64))
    return (
        np.concatenate(parts_k),
        np.concatenate(parts_w),
        np.concatenate(parts_r).astype(np.int64),
    )


def _finalize(vocab_size: int, parts) -> CooccurrenceCounts:
    ks = [p[0] for p in parts if len(p[0])]
    if not ks:
        return CooccurrenceCounts(
            vocab_size,
            np.empty(0, np.int64),
            np.empty(0, np.float64),
            np.empty(0, np.int64),
            np.zeros(vocab_size),
            0.0,
        )
    allk = np.concatenate(ks)
    allw = np.concatenate([p[1] for p in parts if len(p[0])])
    allr = np.concatenate([p[2] for p in parts if len(p[0])])
    keys, inv = np.unique(allk, return_inverse=True)
    weighted = np.bincount(inv, weights=allw, minlength=len(keys))
    raw = np.bincount(inv, weights=allr, minlength=len(keys)).astype(np.int64)
    x_row = np.zeros(vocab_size)
    np.add.at(x_row, keys // vocab_size, weighted)
    np.add.at(x_row, keys % vocab_size, weighted)
    return CooccurrenceCounts(vocab_size, keys, weighted, raw, x_row, float(x_row.sum()))


def _blocks(sentences: Iterable, block_size: int) -> Iterator[list]:
    block: list = []
    for sent in sentences:
        block.append(list(sent))
        if len(block) >= block_size:
            yield block
            block = []
    if block:
        yield block


def count_cooccurrences(
    sentences: Iterable,
    vocab_size: int,
    window: int = DEFAULT_WINDOW,
    *,
    threads: int = 1,
    block_size: int = 16384,
) -> CooccurrenceCounts:
    """Accumulate weighted co-occurrence counts over id sentences.

    ``sentences`` yields sequences of vocabulary ids (negatives are position
    gaps and never pair). With ``threads > 1`` shards are counted in worker
    processes and merged in submission order, which keeps the result identical
    to the single-threaded run.
    """
    if vocab_size < 1:
        raise ValueError("vocab_size must be >= 1")
    if window < 1:
        raise ValueError("window must be >= 1")
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(
                pool.map(
                    _count_block,
                    _blocks(sentences, block_size),
                    _repeat(vocab_size),
                    _repeat(window),
                )
            )
    else:
        parts = [_count_block(b, vocab_size, window) for b in _blocks(sentences, block_size)]
    return _finalize(vocab_size, parts)


def _repeat(value):
    while True:
        yield value


def merge_counts(a: CooccurrenceCounts, b: CooccurrenceCounts) -> CooccurrenceCounts:
    """Combine two compatible accumulations (commutative up to float rounding)."""
    if a.vocab_size != b.vocab_size:
        raise ValueError("cannot merge counts over different vocabularies")
    return _finalize(
        a.vocab_size, [(a.keys, a.weighted, a.raw), (b.keys, b.weighted, b.raw)]
    )


def pmi(counts: CooccurrenceCounts, i: int, j: int) -> float:
    """Natural-log pointwise mutual information of a counted pair."""
    w, _ = counts.get(i, j)
    if w <= 0.0:
        raise DataError(f"pmi undefined: pair ({i}, {j}) never co-occurred")
    return math.log(w * counts.x_total / (counts.x_row[i] * counts.x_row[j]))


@dataclass
class Edge:
    a: int          # vocab ids; word(a) < word(b) lexicographically
    b: int
    pmi: float
    weighted: float
    raw: int


@dataclass
class EdgeGraph:
    """Selected undirected edges plus a PMI-sorted adjacency view."""

    vocab: Vocabulary
    edges: dict                      # key = min(id)*V + max(id) -> Edge
    adjacency: dict = field(default_factory=dict)  # id -> [(neighbor id, pmi)]

    def key(self, i: int, j: int) -> int:
        return min(i, j) * len(self.vocab) + max(i, j)

    def has_edge(self, i: int, j: int) -> bool:
        return self.key(i, j) in self.edges

    def edge(self, i: int, j: int):
        return self.edges.get(self.key(i, j))

    def neighbors(self, w: int) -> list:
        return self.adjacency.get(w, [])

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def _lexrank(vocab: Vocabulary) -> np.ndarray:
    order = sorted(range(len(vocab)), key=vocab.words.__getitem__)
    rank = np.empty(len(vocab), dtype=np.int64)
    rank[order] = np.arange(len(vocab))
    return rank


def _build_adjacency(edges: dict, lexrank: np.ndarray) -> dict:
    adj: dict = {}
    for e in edges.values():
        adj.setdefault(e.a, []).append(e)
        adj.setdefault(e.b, []).append(e)
    out = {}
    for w, lst in adj.items():
        lst.sort(key=lambda e: (-e.pmi, -e.raw, lexrank[e.b if e.a == w else e.a]))
        out[w] = [(e.b if e.a == w else e.a, e.pmi) for e in lst]
    return out


def select_edges(
    counts: CooccurrenceCounts,
    vocab: Vocabulary,
    *,
    top_k: int = DEFAULT_TOP_K,
    edge_target: int = 0,
    min_count: int = DEFAULT_MIN_COUNT,
) -> EdgeGraph:
    """Two-phase edge selection over counted pairs.

    Phase 1 keeps, for every word, its ``top_k`` highest-PMI partners among
    pairs with raw count >= ``min_count``. Phase 2 appends the globally
    highest-PMI remaining eligible pairs until ``edge_target`` edges exist or
    eligible pairs run out. Ties break on higher raw count, then on the
    lexicographic word pair. An edge is added at most once.
    """
    if len(vocab) != counts.vocab_size:
        raise ValueError("vocabulary size does not match counts")
    V = counts.vocab_size
    elig = counts.raw >= min_count
    keys = counts.keys[elig]
    w8 = counts.weighted[elig]
    raw = counts.raw[elig]
    n = len(keys)
    lexrank = _lexrank(vocab)
    if n == 0:
        log.warning("no pairs meet the co-occurrence floor (%d)", min_count)
        return EdgeGraph(vocab, {}, {})

    lo = keys // V
    hi = keys % V
    pm = np.log(w8 * counts.x_total / (counts.x_row[lo] * counts.x_row[hi]))
    first = np.where(lexrank[lo] <= lexrank[hi], lo, hi)
    second = np.where(lexrank[lo] <= lexrank[hi], hi, lo)

    order = np.lexsort((lexrank[second], lexrank[first], -raw, -pm))
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)

    # Phase 1: per-word top-k in global rank order.
    word_exp = np.concatenate([lo, hi])
    pair_exp = np.concatenate([np.arange(n), np.arange(n)])
    sidx = np.lexsort((rank[pair_exp], word_exp))
    ws = word_exp[sidx]
    new_group = np.r_[True, ws[1:] != ws[:-1]]
    group_id = np.cumsum(new_group) - 1
    starts = np.flatnonzero(new_group)
    pos_in_group = np.arange(len(ws)) - starts[group_id]
    selected = np.zeros(n, dtype=bool)
    selected[np.unique(pair_exp[sidx][pos_in_group < top_k])] = True
    phase1 = int(selected.sum())

    # Phase 2: fill with the best remaining pairs.
    if edge_target > phase1:
        rest = order[~selected[order]]
        selected[rest[: edge_target - phase1]] = True
    elif edge_target < phase1:
        log.warning(
            "phase 1 already yields %d edges (target %d); nothing removed",
            phase1,
            edge_target,
        )

    edges = {}
    for idx in np.flatnonzero(selected):
        edges[int(keys[idx])] = Edge(
            a=int(first[idx]),
            b=int(second[idx]),
            pmi=float(pm[idx]),
            weighted=float(w8[idx]),
            raw=int(raw[idx]),
        )
    log.info(
        "selected %d edges (%d from per-word top-%d, target %d)",
        len(edges),
        phase1,
        top_k,
        edge_target,
    )
    return EdgeGraph(vocab, edges, _build_adjacency(edges, lexrank))


def save_edges(graph: EdgeGraph, path) -> None:
    """TSV edge list: word_a, word_b, pmi, weighted, raw; descending PMI."""
    words = graph.vocab.words
    rows = sorted(
        graph.edges.values(), key=lambda e: (-e.pmi, -e.raw, words[e.a], words[e.b])
    )
    with open(path, "w", encoding="utf-8") as fh:
        for e in rows:
            fh.write(
                f"{words[e.a]}\t{words[e.b]}\t{e.pmi:.9g}\t{e.weighted:.9g}\t{e.raw}\n"
            )


def load_edges(path, vocab: Vocabulary) -> EdgeGraph:
    edges: dict = {}
    V = len(vocab)
    for lineno, line in enumerate(open(path, encoding="utf-8"), 1):
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise DataError(f"{path}:{lineno}: expected 5 tab-separated fields")
        wa, wb = parts[0], parts[1]
        a, b = vocab.id(wa), vocab.id(wb)
        if a is None or b is None:
            missing = wa if a is None else wb
            raise DataError(f"{path}:{lineno}: unknown word {missing!r}")
        try:
            e = Edge(a, b, float(parts[2]), float(parts[3]), int(parts[4]))
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: bad numeric field") from exc
        edges[min(a, b) * V + max(a, b)] = e
    g = EdgeGraph(vocab, edges)
    g.adjacency = _build_adjacency(edges, _lexrank(vocab))
    return g
