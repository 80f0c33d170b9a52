"""Qualitative queries and the enriched per-word export.

Nearest-neighbor search runs over one of three spaces: raw 6d relation
vectors, compressed codes, or the word-vector-difference baseline. The
enriched export concatenates each word's vector with its top-K PMI neighbors'
vectors and the matching directed relation codes, zero-padded when the degree
falls short of K.
"""

from __future__ import annotations

import logging

import numpy as np

from .errors import DataError, OOVWordError
from .graph import EdgeGraph
from .simeval import NetworkHandle, cosine

log = logging.getLogger(__name__)

SPACES = ("raw_z", "compressed", "diffvec")


def _resolve(net: NetworkHandle, word: str) -> int:
    i = net.vocab.id(word)
    if i is None:
        raise OOVWordError(word)
    return i


def nearest_relations(
    net: NetworkHandle, probe: tuple, k: int = 7, space: str = "compressed"
) -> list:
    """Top-k stored pairs by cosine to the probe's vector in the chosen space.

    The probe keeps the direction the caller typed; candidates use their
    canonical stored direction. The probe's own pair is excluded. Returns
    ``[((word_a, word_b), cosine), ...]`` with lexicographic tie-breaks.
    """
    if space not in SPACES:
        raise ValueError(f"unknown space {space!r}")
    w1, w2 = probe
    i1, i2 = _resolve(net, w1), _resolve(net, w2)
    words = net.vocab.words

    if space == "diffvec":
        store = net.raw if net.raw is not None else net.relations
        if store is None:
            raise DataError("no relation store loaded")
        e1, e2 = net.embeddings.get(i1), net.embeddings.get(i2)
        if e1 is None or e2 is None:
            missing = w1 if e1 is None else w2
            raise DataError(f"no word vector for {missing!r}")
        probe_vec = np.asarray(e1, np.float64) - np.asarray(e2, np.float64)
    else:
        store = net.raw if space == "raw_z" else net.relations
        if store is None:
            raise DataError(f"no {'raw' if space == 'raw_z' else 'compressed'} store loaded")
        if store.get(i1, i2) is None:
            raise DataError(f"pair ({w1}, {w2}) not in the relation store")
        probe_vec = np.asarray(store.directed(i1, i2), np.float64)

    probe_key = (min(i1, i2), max(i1, i2))
    scored = []
    for rec in store.records:
        if (min(rec.a, rec.b), max(rec.a, rec.b)) == probe_key:
            continue
        if space == "diffvec":
            ea, eb = net.embeddings.get(rec.a), net.embeddings.get(rec.b)
            if ea is None or eb is None:
                continue
            cand = np.asarray(ea, np.float64) - np.asarray(eb, np.float64)
        elif space == "raw_z":
            cand = rec.vec
        else:
            cand = rec.vec[: store.m]
        scored.append(((words[rec.a], words[rec.b]), cosine(probe_vec, cand)))
    scored.sort(key=lambda t: (-t[1], t[0]))
    return scored[:k]


def neighbors_of(word: str, graph: EdgeGraph) -> list:
    """Adjacency of a word as (neighbor word, pmi), descending PMI."""
    i = graph.vocab.id(word)
    if i is None:
        raise OOVWordError(word)
    return [(graph.vocab.words[n], p) for n, p in graph.neighbors(i)]


def export_enriched(net: NetworkHandle, k: int = 10, out=None) -> int:
    """Write one enriched row per embedded vocabulary word.

    Row layout: v_w, then K neighbor vectors, then the K directed relation
    codes r_{w,n}, neighbors ordered by descending PMI; missing neighbors are
    zero blocks. Row dimension is d + K*(d + m). Returns the row count.
    """
    if net.relations is None:
        raise DataError("no compressed relation store loaded; run compression first")
    d = net.embeddings.dim
    m = net.relations.m
    width = d + k * (d + m)
    written = 0
    skipped = 0
    isolated = 0
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(f"#SVN-ENRICHED {d} {k} {m}\n")
        for i, word in enumerate(net.vocab.words):
            v = net.embeddings.get(i)
            if v is None:
                skipped += 1
                continue
            row = np.zeros(width, dtype=np.float64)
            row[:d] = v
            nbrs = net.usable_neighbors(i)[:k]
            if not nbrs:
                isolated += 1
            for t, (n, _) in enumerate(nbrs):
                row[d + t * d : d + (t + 1) * d] = net.embeddings.get(n)
                row[d + k * d + t * m : d + k * d + (t + 1) * m] = net.relation(i, n)
            fh.write(word + "\t" + " ".join(f"{x:.6g}" for x in row) + "\n")
            written += 1
    log.info(
        "exported %d enriched rows (width %d); %d words without vectors skipped, "
        "%d isolated words zero-padded",
        written, width, skipped, isolated,
    )
    return written
