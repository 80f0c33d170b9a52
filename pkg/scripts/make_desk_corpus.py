#!/usr/bin/env python3
"""Generate a desk-scale synthetic corpus with topic structure.

Words are grouped into topics; each sentence draws most of its tokens from a
single topic, so topically related words co-occur heavily and PMI edges form
inside topics. Matching synthetic embeddings (topic center + noise) and a
topic-based word-similarity dataset make the output usable end to end:
similarity judgments correlate with shared topics, which the network's
neighborhood structure can exploit.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

_SYLLABLES = [
    "ba", "bo", "da", "du", "ka", "ke", "li", "lo", "ma", "mi",
    "na", "no", "pa", "pe", "ra", "ri", "sa", "so", "ta", "ti",
    "va", "vo", "za", "zo", "fe", "fi", "gu", "go", "hu", "he",
]

# Drawn from the package's default stopword list so filtering engages.
_FUNCTION_WORDS = [
    "the", "of", "and", "to", "in", "a", "is", "was", "for", "with",
    "on", "as", "by", "at", "from", "it", "an", "be", "this", "which",
    "or", "were", "are", "not", "their",
]


@dataclass
class DeskSpec:
    tokens: int = 1_000_000
    n_types: int = 8000
    n_topics: int = 50
    dim: int = 50
    seed: int = 13
    stopword_rate: float = 0.22
    topic_rate: float = 0.75          # remaining slots draw global words
    embedding_noise: float = 1.0      # keeps the cosine baseline off the ceiling
    embedding_dropout: float = 0.02   # fraction of types left unembedded
    n_dataset_pairs: int = 120


def word_forms(n_types: int) -> list:
    base = len(_SYLLABLES)
    out = []
    for k in range(n_types):
        w = _SYLLABLES[k % base] + _SYLLABLES[(k // base) % base] \
            + _SYLLABLES[(k // (base * base)) % base]
        out.append(w + str(k % 7))
    assert len(set(out)) == n_types
    return out


def _zipf_weights(n: int, s: float = 1.05, shift: float = 2.7) -> np.ndarray:
    w = 1.0 / np.power(np.arange(n) + shift, s)
    return w / w.sum()


def generate_sentences(spec: DeskSpec, rng: np.random.Generator):
    """Yield sentences as arrays of type indices until the token budget."""
    weights = _zipf_weights(spec.n_types)
    global_cdf = np.cumsum(weights)
    topic_of = np.arange(spec.n_types) % spec.n_topics
    topic_types = [np.flatnonzero(topic_of == t) for t in range(spec.n_topics)]
    topic_cdfs = []
    for t in range(spec.n_topics):
        w = weights[topic_types[t]]
        topic_cdfs.append(np.cumsum(w / w.sum()))

    produced = 0
    block = 4096
    while produced < spec.tokens:
        lengths = rng.integers(6, 21, size=block)
        topics = rng.integers(0, spec.n_topics, size=block)
        for length, topic in zip(lengths, topics):
            slots = rng.random(length)
            sent = np.empty(length, dtype=np.int64)
            is_stop = slots < spec.stopword_rate
            is_topic = (~is_stop) & (slots < spec.stopword_rate + spec.topic_rate)
            is_global = (~is_stop) & (~is_topic)
            n_topic = int(is_topic.sum())
            n_global = int(is_global.sum())
            if n_topic:
                draws = np.searchsorted(topic_cdfs[topic], rng.random(n_topic))
                sent[is_topic] = topic_types[topic][draws]
            if n_global:
                sent[is_global] = np.searchsorted(global_cdf, rng.random(n_global))
            sent[is_stop] = -1 - rng.integers(0, len(_FUNCTION_WORDS), size=int(is_stop.sum()))
            yield sent
            produced += length
            if produced >= spec.tokens:
                break


def write_corpus(spec: DeskSpec, out_path: Path, rng: np.random.Generator) -> int:
    """Write the corpus text; returns the number of tokens emitted."""
    forms = word_forms(spec.n_types)
    total = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        line: list = []
        for sent in generate_sentences(spec, rng):
            words = [
                forms[t] if t >= 0 else _FUNCTION_WORDS[-t - 1] for t in sent
            ]
            words[0] = words[0].capitalize()
            line.append(" ".join(words) + ".")
            total += len(words)
            if len(line) >= 8:
                fh.write(" ".join(line) + "\n")
                line = []
        if line:
            fh.write(" ".join(line) + "\n")
    return total


def write_embeddings(spec: DeskSpec, out_path: Path, rng: np.random.Generator):
    forms = word_forms(spec.n_types)
    centers = rng.normal(size=(spec.n_topics, spec.dim))
    topic_of = np.arange(spec.n_types) % spec.n_topics
    vectors = centers[topic_of] + spec.embedding_noise * rng.normal(
        size=(spec.n_types, spec.dim)
    )
    dropped = rng.random(spec.n_types) < spec.embedding_dropout
    kept = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(f"{int((~dropped).sum())} {spec.dim}\n")
        for k in range(spec.n_types):
            if dropped[k]:
                continue
            vals = " ".join(f"{x:.6f}" for x in vectors[k])
            fh.write(f"{forms[k]} {vals}\n")
            kept += 1
    return kept


def write_dataset(spec: DeskSpec, out_path: Path, rng: np.random.Generator):
    """Topic-based gold similarity pairs over frequent types."""
    forms = word_forms(spec.n_types)
    topic_of = np.arange(spec.n_types) % spec.n_topics
    frequent = np.arange(min(1500, spec.n_types))
    rows = []
    seen = set()
    while len(rows) < spec.n_dataset_pairs:
        same = len(rows) % 2 == 0
        a = int(rng.choice(frequent))
        if same:
            mates = frequent[(topic_of[frequent] == topic_of[a]) & (frequent != a)]
            if len(mates) == 0:
                continue
            b = int(rng.choice(mates))
            gold = 7.0 + 3.0 * rng.random()
        else:
            b = int(rng.choice(frequent))
            if topic_of[b] == topic_of[a] or b == a:
                continue
            gold = 4.0 * rng.random()
        key = (min(a, b), max(a, b))
        if key in seen:
            continue
        seen.add(key)
        rows.append(f"{forms[a]}\t{forms[b]}\t{gold:.3f}")
    out_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return len(rows)


def generate_all(spec: DeskSpec, out_dir: Path) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "corpus": out_dir / "corpus.txt",
        "embeddings": out_dir / "embeddings.txt",
        "dataset": out_dir / "topicsim.tsv",
    }
    rng = np.random.default_rng(spec.seed)
    n_tokens = write_corpus(spec, paths["corpus"], rng)
    n_vectors = write_embeddings(spec, paths["embeddings"], rng)
    n_pairs = write_dataset(spec, paths["dataset"], rng)
    return {"paths": paths, "tokens": n_tokens, "vectors": n_vectors,
            "pairs": n_pairs}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, required=True)
    ap.add_argument("--tokens", type=int, default=1_000_000)
    ap.add_argument("--types", type=int, default=8000)
    ap.add_argument("--topics", type=int, default=50)
    ap.add_argument("--dim", type=int, default=50)
    ap.add_argument("--seed", type=int, default=13)
    args = ap.parse_args()
    spec = DeskSpec(tokens=args.tokens, n_types=args.types,
                    n_topics=args.topics, dim=args.dim, seed=args.seed)
    info = generate_all(spec, args.out_dir)
    print(f"corpus: {info['tokens']} tokens -> {info['paths']['corpus']}")
    print(f"embeddings: {info['vectors']} vectors -> {info['paths']['embeddings']}")
    print(f"dataset: {info['pairs']} pairs -> {info['paths']['dataset']}")


if __name__ == "__main__":
    main()
