"""Neighbor-matching word similarity and the benchmark evaluation harness.

Beyond the plain cosine baseline, two variants refine a word pair's score with
its best-matching graph neighbors: the supporting pair (n1, n2) maximizes
cos(v_n1, v_n2) + cos(r_{w1,n1}, r_{w2,n2}) over the usable neighborhoods, and
the score is the cosine of the concatenations v_w | mu*v_n (word variant) or
v_w | mu*v_n | r_{w,n} (relation variant). The scaling factor mu damps the
neighbor's influence; it defaults to 0.5.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .corpus import Vocabulary
from .embeddings import EmbeddingStore
from .errors import DataError, OOVWordError
from .graph import EdgeGraph
from .relvec import RelationStore

log = logging.getLogger(__name__)

VARIANTS = ("baseline", "word_only", "with_relation")
DEFAULT_MU = 0.5


@dataclass
class SimilarityDataset:
    name: str
    pairs: list  # (word1, word2, gold score)


def load_dataset(path) -> SimilarityDataset:
    """TSV word1<TAB>word2<TAB>score; a non-numeric third field on the first
    line is treated as a header. Multiword entries are dropped."""
    pairs = []
    seen = set()
    filtered = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) < 3:
                raise DataError(f"{path}:{lineno}: expected 3 tab-separated fields")
            try:
                score = float(parts[2])
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise DataError(f"{path}:{lineno}: bad score {parts[2]!r}")
            w1, w2 = parts[0].strip(), parts[1].strip()
            if " " in w1 or " " in w2:
                filtered += 1
                continue
            if (w1, w2) in seen:
                log.warning("%s:%d: duplicate pair (%s, %s) ignored", path, lineno, w1, w2)
                continue
            seen.add((w1, w2))
            pairs.append((w1, w2, score))
    if filtered:
        log.info("%s: dropped %d multiword entries", path, filtered)
    return SimilarityDataset(name=Path(path).stem, pairs=pairs)


@dataclass
class NetworkHandle:
    """Read-only bundle of everything query-time code needs."""

    vocab: Vocabulary
    embeddings: EmbeddingStore
    graph: EdgeGraph
    relations: RelationStore | None = None   # compressed, m > 0
    raw: RelationStore | None = None         # uncompressed z store
    mu: float = DEFAULT_MU
    _usable: dict = field(default_factory=dict, repr=False, compare=False)

    def relation(self, w: int, n: int):
        """Directed compressed vector r_{w,n} (w first), or None."""
        if self.relations is None:
            return None
        return self.relations.directed(w, n)

    def usable_neighbors(self, w: int) -> list:
        """Adjacency restricted to neighbors with a vector and a relation code."""
        cached = self._usable.get(w)
        if cached is None:
            cached = [
                (n, p)
                for n, p in self.graph.neighbors(w)
                if self.embeddings.has(n) and self.relation(w, n) is not None
            ]
            self._usable[w] = cached
        return cached


def cosine(u, v) -> float:
    """Cosine similarity in [-1, 1]; zero vectors compare as 0 with a warning."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        log.warning("cosine of a zero vector defined as 0")
        return 0.0
    return float(min(1.0, max(-1.0, np.dot(u, v) / (nu * nv))))


def _match_ids(net: NetworkHandle, w1: int, w2: int):
    n1s = net.usable_neighbors(w1)
    n2s = net.usable_neighbors(w2)
    if not n1s or not n2s:
        return None
    words = net.vocab.words
    # Tie-breaks must commute with swapping (w1, w2), hence the unordered word
    # pair plus an orientation rule tied to the query order.
    straight_first = words[w1] <= words[w2]
    best = None
    best_key = None
    for n1, _ in n1s:
        v1 = net.embeddings.get(n1)
        r1 = net.relation(w1, n1)
        for n2, _ in n2s:
            wc = cosine(v1, net.embeddings.get(n2))
            obj = wc + cosine(r1, net.relation(w2, n2))
            a, b = words[n1], words[n2]
            lo, hi = (a, b) if a <= b else (b, a)
            key = (-obj, -wc, lo, hi, 0 if (a <= b) == straight_first else 1)
            if best_key is None or key < best_key:
                best_key = key
                best = (n1, n2)
    return best


def match_neighbors(net: NetworkHandle, w1: str, w2: str):
    """Best supporting neighbor pair as words, or None when either side
    has no usable neighbors."""
    i1, i2 = net.vocab.id(w1), net.vocab.id(w2)
    if i1 is None:
        raise OOVWordError(w1)
    if i2 is None:
        raise OOVWordError(w2)
    got = _match_ids(net, i1, i2)
    if got is None:
        return None
    return net.vocab.words[got[0]], net.vocab.words[got[1]]


def similarity(
    net: NetworkHandle, w1: str, w2: str, variant: str = "with_relation", mu=None
) -> float:
    """Similarity under one of the three variants; falls back to the plain
    cosine when no neighbor pair is available."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    mu = net.mu if mu is None else mu
    i1, i2 = net.vocab.id(w1), net.vocab.id(w2)
    if i1 is None or not net.embeddings.has(i1):
        raise OOVWordError(w1)
    if i2 is None or not net.embeddings.has(i2):
        raise OOVWordError(w2)
    v1 = np.asarray(net.embeddings.get(i1), dtype=np.float64)
    v2 = np.asarray(net.embeddings.get(i2), dtype=np.float64)
    if variant == "baseline":
        return cosine(v1, v2)
    matched = _match_ids(net, i1, i2)
    if matched is None:
        return cosine(v1, v2)
    n1, n2 = matched
    u1 = [v1, mu * np.asarray(net.embeddings.get(n1), dtype=np.float64)]
    u2 = [v2, mu * np.asarray(net.embeddings.get(n2), dtype=np.float64)]
    if variant == "with_relation":
        u1.append(np.asarray(net.relation(i1, n1), dtype=np.float64))
        u2.append(np.asarray(net.relation(i2, n2), dtype=np.float64))
    return cosine(np.concatenate(u1), np.concatenate(u2))


def evaluate(
    net: NetworkHandle, dataset: SimilarityDataset, variant: str = "with_relation", mu=None
) -> dict:
    """Pearson/Spearman correlation of predictions against gold scores.

    Pairs with an out-of-vocabulary word are skipped and reported through the
    coverage ratio. Spearman uses average ranks on ties.
    """
    preds = []
    golds = []
    for w1, w2, gold in dataset.pairs:
        try:
            preds.append(similarity(net, w1, w2, variant, mu))
        except OOVWordError:
            continue
        golds.append(gold)
    if len(preds) < 2:
        raise DataError(
            f"{dataset.name}: only {len(preds)} covered pairs; need at least 2"
        )
    pearson = float(stats.pearsonr(preds, golds)[0])
    spearman = float(stats.spearmanr(preds, golds)[0])
    return {
        "pearson": pearson,
        "spearman": spearman,
        "average": (pearson + spearman) / 2.0,
        "coverage": len(preds) / len(dataset.pairs),
    }
