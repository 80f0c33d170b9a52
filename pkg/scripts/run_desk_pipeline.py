#!/usr/bin/env python3
"""End-to-end desk-scale demo: generate data, build the network, explore it.

Builds a ~1M-token synthetic corpus, runs the full pipeline (vocabulary,
PMI graph, relation vectors, autoencoder, compression), prints the nearest
relation neighbors for a few probe pairs in all three spaces, and evaluates
the similarity variants against the topic-based gold dataset.
"""

from __future__ import annotations

import argparse
import logging
import time
from pathlib import Path

from make_desk_corpus import DeskSpec, generate_all

from seven.pipeline import PipelineConfig, load_network, run_pipeline
from seven.query import nearest_relations
from seven.simeval import evaluate, load_dataset

log = logging.getLogger("desk-demo")


def pick_probes(net, n=3):
    """Frequently observed edges make stable qualitative probes."""
    records = sorted(
        net.relations.records,
        key=lambda r: -(r.count_ab + r.count_ba),
    )
    words = net.vocab.words
    return [(words[r.a], words[r.b]) for r in records[:n]]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workdir", type=Path, default=Path("desk-run"))
    ap.add_argument("--tokens", type=int, default=1_000_000)
    ap.add_argument("--vocab-size", type=int, default=5000)
    ap.add_argument("--edge-target", type=int, default=50_000)
    ap.add_argument("--code-dim", type=int, default=10)
    ap.add_argument("--epochs", type=int, default=10)
    ap.add_argument("--seed", type=int, default=13)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")

    data_dir = args.workdir / "data"
    corpus = data_dir / "corpus.txt"
    if corpus.exists():
        log.info("reusing existing corpus under %s", data_dir)
    else:
        t0 = time.perf_counter()
        info = generate_all(DeskSpec(tokens=args.tokens, seed=args.seed), data_dir)
        log.info("generated %d tokens in %.1fs", info["tokens"], time.perf_counter() - t0)

    cfg = PipelineConfig(
        inputs=[str(corpus)],
        embeddings=str(data_dir / "embeddings.txt"),
        out_dir=str(args.workdir / "network"),
        vocab_size=args.vocab_size,
        min_count=10,
        top_k=10,
        edge_target=args.edge_target,
        lowercase=True,
        code_dim=args.code_dim,
        epochs=args.epochs,
        seed=args.seed,
        threads=args.threads,
    )
    t0 = time.perf_counter()
    netdir = run_pipeline(cfg)
    log.info("pipeline finished in %.1fs", time.perf_counter() - t0)

    net = load_network(netdir.path)
    print("\n=== nearest relation neighbors (top 7) ===")
    for probe in pick_probes(net):
        print(f"\nprobe: {probe[0]} - {probe[1]}")
        for space, label in (("raw_z", "raw 6d"), ("compressed", "compressed"),
                             ("diffvec", "diffvec")):
            hits = nearest_relations(net, probe, k=7, space=space)
            rendered = ", ".join(f"{a}-{b} ({c:.2f})" for (a, b), c in hits)
            print(f"  {label:>10}: {rendered}")

    print("\n=== similarity evaluation (topicsim) ===")
    ds = load_dataset(data_dir / "topicsim.tsv")
    print(f"{'variant':>14}  pearson  spearman  average  coverage")
    for variant in ("baseline", "word_only", "with_relation"):
        r = evaluate(net, ds, variant)
        print(f"{variant:>14}  {r['pearson']:.4f}   {r['spearman']:.4f}"
              f"   {r['average']:.4f}   {r['coverage']:.3f}")


if __name__ == "__main__":
    main()
