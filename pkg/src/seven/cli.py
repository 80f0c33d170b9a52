"""Command-line umbrella.

Exit codes: 0 ok, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import logging
import sys

import click

from . import autoenc, corpus, pipeline, query, relvec, simeval
from .embeddings import load_embeddings
from .errors import DataError, NumericError
from .graph import count_cooccurrences, load_edges, save_edges, select_edges

log = logging.getLogger(__name__)

_VARIANT_NAMES = {"baseline": "baseline", "word": "word_only", "relation": "with_relation"}
_SPACE_NAMES = {"z": "raw_z", "r": "compressed", "diffvec": "diffvec"}


@click.group()
def cli():
    """Build, compress, query, and evaluate a word relation network."""


def _stopword_set(path):
    return corpus.load_stopwords(path) if path else corpus.default_stopwords()


@cli.command("build-vocab")
@click.option("--input", "inputs", multiple=True, required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--vocab-size", type=int, required=True)
@click.option("--stopwords", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--lowercase", type=bool, default=False, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def build_vocab_cmd(inputs, vocab_size, stopwords, lowercase, out):
    """Count tokens and write the frequency-ranked vocabulary TSV."""
    sw = _stopword_set(stopwords)
    tokens = corpus.iter_tokens(inputs, sw, lowercase=lowercase)
    vocab = corpus.build_vocabulary(tokens, vocab_size, sw)
    vocab.save(out)
    click.echo(f"wrote {len(vocab)} words to {out}")


@cli.command("build-graph")
@click.option("--vocab", "vocab_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--input", "inputs", multiple=True, required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--window", type=int, default=10, show_default=True)
@click.option("--min-count", type=int, default=10, show_default=True)
@click.option("--top-k", type=int, default=10, show_default=True)
@click.option("--edge-target", type=int, required=True)
@click.option("--stopwords", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--lowercase", type=bool, default=False, show_default=True)
@click.option("--oov-mode", type=click.Choice(["drop", "gap"]), default="drop")
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def build_graph_cmd(vocab_path, inputs, window, min_count, top_k, edge_target,
                    stopwords, lowercase, oov_mode, threads, out):
    """Count weighted co-occurrences and select the PMI edge set."""
    vocab = corpus.Vocabulary.load(vocab_path)
    sents = corpus.iter_token_ids(inputs, _stopword_set(stopwords), vocab,
                                  lowercase=lowercase, oov_mode=oov_mode)
    counts = count_cooccurrences(sents, len(vocab), window, threads=threads)
    g = select_edges(counts, vocab, top_k=top_k, edge_target=edge_target,
                     min_count=min_count)
    save_edges(g, out)
    click.echo(f"wrote {g.n_edges} edges to {out}")


@cli.command("build-relvecs")
@click.option("--graph", "graph_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--vocab", "vocab_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--embeddings", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--input", "inputs", multiple=True, required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--window", type=int, default=10, show_default=True)
@click.option("--stopwords", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--lowercase", type=bool, default=False, show_default=True)
@click.option("--oov-mode", type=click.Choice(["drop", "gap"]), default="drop")
@click.option("--binary", "emb_binary", type=bool, default=None,
              help="Embedding file format; omit to sniff.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def build_relvecs_cmd(graph_path, vocab_path, embeddings, inputs, window,
                      stopwords, lowercase, oov_mode, emb_binary, out):
    """Average context embeddings into a raw relation vector per edge."""
    vocab = corpus.Vocabulary.load(vocab_path)
    g = load_edges(graph_path, vocab)
    emb = load_embeddings(embeddings, vocab, binary=emb_binary)
    sents = corpus.iter_token_ids(inputs, _stopword_set(stopwords), vocab,
                                  lowercase=lowercase, oov_mode=oov_mode)
    store = relvec.build_relation_records(sents, g, emb, window)
    relvec.save_store(store, out)
    click.echo(f"wrote {len(store)} relation records to {out}")


@cli.command("train-autoencoder")
@click.option("--relvecs", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--vocab", "vocab_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--embeddings", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--dim", "code_dim", type=int, required=True, help="Code dimension m.")
@click.option("--lambda", "lam", type=float, default=0.01, show_default=True)
@click.option("--epochs", type=int, default=20, show_default=True)
@click.option("--batch-size", type=int, default=256, show_default=True)
@click.option("--learning-rate", type=float, default=1e-3, show_default=True)
@click.option("--optimizer", type=click.Choice(["adam", "sgd"]), default="adam")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--binary", "emb_binary", type=bool, default=None)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def train_cmd(relvecs, vocab_path, embeddings, code_dim, lam, epochs, batch_size,
              learning_rate, optimizer, seed, emb_binary, out):
    """Fit the relation autoencoder and save its parameters."""
    vocab = corpus.Vocabulary.load(vocab_path)
    emb = load_embeddings(embeddings, vocab, binary=emb_binary)
    store = relvec.load_store(relvecs)
    tc = autoenc.TrainConfig(m=code_dim, lam=lam, epochs=epochs,
                             batch_size=batch_size, learning_rate=learning_rate,
                             optimizer=optimizer, seed=seed)
    params, history = autoenc.train(store, emb, tc)
    autoenc.save_params(params, out)
    final = history[-1]
    click.echo(f"wrote params to {out} (final train loss {final['train_loss']:.6g})")


@cli.command("compress")
@click.option("--relvecs", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--params", "params_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--vocab", "vocab_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--embeddings", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def compress_cmd(relvecs, params_path, vocab_path, embeddings, out):
    """Encode every usable edge into the compressed relation store."""
    store = relvec.load_store(relvecs)
    params = autoenc.load_params(params_path)
    emb = None
    if embeddings and vocab_path:
        emb = load_embeddings(embeddings, corpus.Vocabulary.load(vocab_path))
    compressed = autoenc.compress_store(store, params, emb)
    relvec.save_store(compressed, out)
    click.echo(f"wrote {len(compressed)} compressed records to {out}")


@cli.command("build")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
              help="Override a config key.")
@click.option("--threads", type=int, default=None)
@click.option("--deterministic/--no-deterministic", default=None)
def build_cmd(config_path, overrides, threads, deterministic):
    """Run the full pipeline from a key=value config file."""
    values = {}
    for line in corpus.read_text(config_path).splitlines():
        s = line.strip()
        if s and not s.startswith("#") and "=" in s:
            key, _, value = s.partition("=")
            values[key.strip()] = value.strip()
    for item in overrides:
        if "=" not in item:
            raise click.UsageError(f"--set expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        values[key.strip()] = value.strip()
    if threads is not None:
        values["threads"] = str(threads)
    if deterministic is not None:
        values["deterministic"] = "true" if deterministic else "false"
    cfg = pipeline.config_from_strings(values)
    netdir = pipeline.run_pipeline(cfg)
    click.echo(f"network directory ready at {netdir.path}")


@cli.command("similarity-eval")
@click.option("--network", "network_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--dataset", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--variant", type=click.Choice(sorted(_VARIANT_NAMES)), default="relation",
              show_default=True)
@click.option("--mu", type=float, default=simeval.DEFAULT_MU, show_default=True)
def similarity_eval_cmd(network_dir, dataset, variant, mu):
    """Evaluate a similarity dataset; prints pearson/spearman/avg/coverage TSV."""
    net = pipeline.load_network(network_dir, mu=mu)
    ds = simeval.load_dataset(dataset)
    res = simeval.evaluate(net, ds, _VARIANT_NAMES[variant], mu)
    click.echo("pearson\tspearman\taverage\tcoverage")
    click.echo(f"{res['pearson']:.6g}\t{res['spearman']:.6g}"
               f"\t{res['average']:.6g}\t{res['coverage']:.6g}")


@cli.group("query")
def query_group():
    """Explore the network: neighbors and nearest relation vectors."""


@query_group.command("neighbors")
@click.option("--network", "network_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--word", required=True)
@click.option("--top", type=int, default=10, show_default=True)
def query_neighbors_cmd(network_dir, word, top):
    """Print a word's neighbors sorted by descending PMI."""
    net = pipeline.load_network(network_dir)
    for nbr, pmi_score in query.neighbors_of(word, net.graph)[:top]:
        click.echo(f"{nbr}\t{pmi_score:.6g}")


@query_group.command("relations")
@click.option("--network", "network_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--pair", required=True, help="Comma-separated word pair, e.g. lion,zebra.")
@click.option("--space", type=click.Choice(sorted(_SPACE_NAMES)), default="r",
              show_default=True)
@click.option("--top", type=int, default=7, show_default=True)
def query_relations_cmd(network_dir, pair, space, top):
    """Print the stored pairs whose relation vectors are closest to a probe pair."""
    parts = [p.strip() for p in pair.split(",")]
    if len(parts) != 2 or not all(parts):
        raise click.UsageError("--pair expects two comma-separated words")
    net = pipeline.load_network(network_dir)
    hits = query.nearest_relations(net, (parts[0], parts[1]), k=top,
                                   space=_SPACE_NAMES[space])
    for (wa, wb), score in hits:
        click.echo(f"{wa}\t{wb}\t{score:.6g}")


@cli.command("export-enriched")
@click.option("--network", "network_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--k", type=int, default=10, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def export_enriched_cmd(network_dir, k, out):
    """Write the enriched per-word representation file."""
    net = pipeline.load_network(network_dir)
    n = query.export_enriched(net, k=k, out=out)
    click.echo(f"wrote {n} enriched rows to {out}")


# Umbrella aliases.
cli.add_command(similarity_eval_cmd, name="eval")
cli.add_command(export_enriched_cmd, name="export")


def main(argv=None) -> int:
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 2
    except DataError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except NumericError as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        return 3
    return 0


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
