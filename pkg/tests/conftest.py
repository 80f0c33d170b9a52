import sys
from pathlib import Path

import numpy as np
import pytest

from seven.corpus import Vocabulary
from seven.embeddings import EmbeddingStore
from seven.graph import Edge, EdgeGraph, _build_adjacency, _lexrank
from seven.relvec import RelationRecord, RelationStore

TESTS_DIR = Path(__file__).parent
DATA_DIR = TESTS_DIR / "data"

# Experiment scripts double as corpus/embedding generators for heavy tests.
sys.path.insert(0, str(TESTS_DIR.parent / "scripts"))


def make_vocab(words) -> Vocabulary:
    words = list(words)
    return Vocabulary(words, list(range(len(words), 0, -1)))


def store_from_dict(vocab: Vocabulary, mapping: dict) -> EmbeddingStore:
    """EmbeddingStore over explicit word -> vector entries."""
    items = [(w, np.asarray(v, dtype=np.float32)) for w, v in mapping.items()]
    dim = len(items[0][1])
    matrix = np.vstack([v for _, v in items]).astype(np.float32)
    matrix.setflags(write=False)
    rows = {vocab.id(w): t for t, (w, _) in enumerate(items)}
    assert None not in rows
    return EmbeddingStore(dim=dim, vectors=matrix, rows=rows,
                          coverage=len(rows) / len(vocab))


def one_hot_store(vocab: Vocabulary) -> EmbeddingStore:
    eye = np.eye(len(vocab), dtype=np.float32)
    return store_from_dict(vocab, {w: eye[i] for i, w in enumerate(vocab.words)})


def graph_from_edges(vocab: Vocabulary, triples) -> EdgeGraph:
    """EdgeGraph from (word_a, word_b, pmi, weighted, raw) tuples."""
    V = len(vocab)
    lexrank = _lexrank(vocab)
    edges = {}
    for wa, wb, pmi_score, weighted, raw in triples:
        a, b = vocab.id(wa), vocab.id(wb)
        assert a is not None and b is not None
        if lexrank[a] > lexrank[b]:
            a, b = b, a
        edges[min(a, b) * V + max(a, b)] = Edge(a, b, float(pmi_score),
                                                float(weighted), int(raw))
    g = EdgeGraph(vocab, edges)
    g.adjacency = _build_adjacency(edges, lexrank)
    return g


def relation_store_from_dict(vocab: Vocabulary, d: int, mapping: dict,
                             m: int = 0) -> RelationStore:
    """RelationStore from (word_a, word_b) -> vector (6d raw or 2m codes).

    Keys must already be in lexicographic order; counts default to 1/1.
    """
    records = []
    for (wa, wb), vec in sorted(mapping.items()):
        assert wa < wb, "mapping keys must be lexicographically ordered pairs"
        records.append(
            RelationRecord(vocab.id(wa), vocab.id(wb), 1, 1,
                           np.asarray(vec, dtype=np.float64))
        )
    return RelationStore(d=d, m=m, records=records)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def write_mini_corpus(dirpath, rng, n_sentences=600, n_types=40, d=6,
                      n_files=2, drop_vectors=2):
    """Small on-disk corpus + embeddings for pipeline/CLI tests.

    Sentences are capitalized (the splitter needs the uppercase lookahead),
    so builds over this corpus should set lowercase=true.
    """
    dirpath = Path(dirpath)
    types = [f"tok{k:02d}" for k in range(n_types)]
    weights = 1.0 / np.arange(1, n_types + 1)
    weights /= weights.sum()
    paths = []
    per_file = n_sentences // n_files
    for f in range(n_files):
        lines = []
        for s in range(per_file):
            length = int(rng.integers(3, 9))
            toks = [types[k] for k in rng.choice(n_types, size=length, p=weights)]
            toks[0] = toks[0].capitalize()
            lines.append(" ".join(toks) + ".")
        path = dirpath / f"corpus{f}.txt"
        path.write_text(" ".join(lines) + "\n", encoding="utf-8")
        paths.append(path)
    emb_path = dirpath / "embeddings.txt"
    with open(emb_path, "w", encoding="utf-8") as fh:
        fh.write(f"{n_types - drop_vectors} {d}\n")
        for w in types[: n_types - drop_vectors]:
            vals = " ".join(f"{x:.6f}" for x in rng.normal(size=d))
            fh.write(f"{w} {vals}\n")
    return paths, emb_path, types
