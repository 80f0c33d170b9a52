"""End-to-end build orchestration and the on-disk network directory.

The build runs five stages in order: vocabulary, edge graph, relation vectors,
autoencoder training, and compression. Every stage reads its inputs from disk
and writes one artifact, and the manifest records a hash of each stage's
inputs and parameters next to the output checksum. A rerun skips any stage
whose descriptor and output both still match, so editing one knob (say,
lambda) reruns only the stages downstream of it. The manifest carries no
timestamps: a deterministic rerun leaves the directory byte-identical.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import resource
import time
from dataclasses import dataclass
from pathlib import Path

from . import autoenc, corpus, graph, relvec
from .embeddings import load_embeddings
from .errors import DataError, NumericError
from .simeval import DEFAULT_MU, NetworkHandle

log = logging.getLogger(__name__)

STAGES = ("vocab", "graph", "relvecs", "train", "compress")
STAGE_FILES = {
    "vocab": "vocab.tsv",
    "graph": "edges.tsv",
    "relvecs": "relvecs.bin",
    "train": "params.bin",
    "compress": "relvecs-compressed.bin",
}
CONFIG_NAME = "config.snapshot"
MANIFEST_NAME = "manifest.json"

# Artifacts a directory can live without: queries needing them are disabled.
_OPTIONAL_STAGES = ("train", "compress")


@dataclass
class PipelineConfig:
    """All build tunables; serialized next to the outputs for provenance."""

    inputs: list
    embeddings: str
    out_dir: str
    vocab_size: int = 100_000
    window: int = 10
    min_count: int = 10
    top_k: int = 10
    edge_target: int | None = None      # None -> 10 * vocab_size
    stopwords: str | None = None        # None -> bundled list
    lowercase: bool = False
    oov_mode: str = "drop"
    embeddings_binary: bool | None = None
    code_dim: int = 10
    lam: float = 0.01
    epochs: int = 20
    batch_size: int = 256
    learning_rate: float = 1e-3
    lr_decay: float = 1.0
    optimizer: str = "adam"
    holdout_frac: float = 0.05
    seed: int = 0
    mu: float = DEFAULT_MU
    threads: int = 1
    deterministic: bool = True


_LIST_FIELDS = {"inputs"}
_OPT_INT_FIELDS = {"edge_target"}
_OPT_STR_FIELDS = {"stopwords"}
_OPT_BOOL_FIELDS = {"embeddings_binary"}
_BOOL_FIELDS = {"lowercase", "deterministic"}
_INT_FIELDS = {"vocab_size", "window", "min_count", "top_k", "code_dim",
               "epochs", "batch_size", "seed", "threads"}
_FLOAT_FIELDS = {"lam", "learning_rate", "lr_decay", "holdout_frac", "mu"}

_TRUE = {"true", "yes", "1"}
_FALSE = {"false", "no", "0"}


def _parse_bool(value: str, key: str) -> bool:
    v = value.lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise DataError(f"config key {key}: expected a boolean, got {value!r}")


def config_from_strings(values: dict) -> PipelineConfig:
    """Build a config from raw string values (file contents or CLI --set)."""
    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    kwargs = {}
    for key, value in values.items():
        if key not in known:
            raise DataError(f"unknown config key {key!r}")
        value = value.strip()
        if key in _LIST_FIELDS:
            kwargs[key] = [p.strip() for p in value.split(",") if p.strip()]
        elif key in _OPT_INT_FIELDS:
            kwargs[key] = None if value.lower() == "none" else int(value)
        elif key in _OPT_STR_FIELDS:
            kwargs[key] = None if value.lower() == "none" else value
        elif key in _OPT_BOOL_FIELDS:
            kwargs[key] = None if value.lower() in ("none", "auto") else _parse_bool(value, key)
        elif key in _BOOL_FIELDS:
            kwargs[key] = _parse_bool(value, key)
        elif key in _INT_FIELDS:
            kwargs[key] = int(value)
        elif key in _FLOAT_FIELDS:
            kwargs[key] = float(value)
        else:
            kwargs[key] = value
    missing = {"inputs", "embeddings", "out_dir"} - kwargs.keys()
    if missing:
        raise DataError(f"config missing required keys: {', '.join(sorted(missing))}")
    return PipelineConfig(**kwargs)


def load_config(path) -> PipelineConfig:
    """Flat ``key = value`` file; '#' lines are comments."""
    values = {}
    for lineno, line in enumerate(corpus.read_text(path).splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise DataError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = s.partition("=")
        values[key.strip()] = value.strip()
    try:
        return config_from_strings(values)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return ",".join(str(v) for v in value)
    return str(value)


def save_config(cfg: PipelineConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for f in dataclasses.fields(PipelineConfig):
            fh.write(f"{f.name} = {_format_value(getattr(cfg, f.name))}\n")


def validate_config(cfg: PipelineConfig) -> PipelineConfig:
    """Check every field up front; returns a copy with defaults resolved."""
    problems = []
    if not cfg.inputs:
        problems.append("inputs: at least one corpus file is required")
    for p in cfg.inputs:
        if not Path(p).is_file():
            problems.append(f"inputs: {p} does not exist")
    if not Path(cfg.embeddings).is_file():
        problems.append(f"embeddings: {cfg.embeddings} does not exist")
    if cfg.stopwords is not None and not Path(cfg.stopwords).is_file():
        problems.append(f"stopwords: {cfg.stopwords} does not exist")
    if cfg.vocab_size < 1:
        problems.append("vocab_size must be >= 1")
    if cfg.window < 1:
        problems.append("window must be >= 1")
    if cfg.min_count < 1:
        problems.append("min_count must be >= 1")
    if cfg.top_k < 1:
        problems.append("top_k must be >= 1")
    if cfg.edge_target is not None and cfg.edge_target < 0:
        problems.append("edge_target must be >= 0")
    if cfg.code_dim < 1:
        problems.append("code_dim must be >= 1")
    if cfg.lam < 0:
        problems.append("lam must be >= 0")
    if cfg.epochs < 1:
        problems.append("epochs must be >= 1")
    if cfg.batch_size < 1:
        problems.append("batch_size must be >= 1")
    if cfg.learning_rate <= 0:
        problems.append("learning_rate must be > 0")
    if not 0 < cfg.lr_decay <= 1:
        problems.append("lr_decay must be in (0, 1]")
    if cfg.optimizer not in ("adam", "sgd"):
        problems.append(f"unknown optimizer {cfg.optimizer!r}")
    if cfg.oov_mode not in ("drop", "gap"):
        problems.append(f"unknown oov_mode {cfg.oov_mode!r}")
    if not 0 <= cfg.holdout_frac < 1:
        problems.append("holdout_frac must be in [0, 1)")
    if not 0 < cfg.mu <= 1:
        problems.append("mu must be in (0, 1]")
    if cfg.threads < 1:
        problems.append("threads must be >= 1")
    if problems:
        raise DataError("invalid configuration: " + "; ".join(problems))
    resolved = dataclasses.replace(
        cfg,
        inputs=[str(Path(p).resolve()) for p in cfg.inputs],
        embeddings=str(Path(cfg.embeddings).resolve()),
        stopwords=None if cfg.stopwords is None else str(Path(cfg.stopwords).resolve()),
        edge_target=10 * cfg.vocab_size if cfg.edge_target is None else cfg.edge_target,
    )
    if resolved.deterministic and resolved.threads > 1:
        log.info("deterministic mode with %d threads: shard merges are order-fixed",
                 resolved.threads)
    return resolved


@dataclass
class NetworkDirectory:
    path: Path

    def file(self, stage: str) -> Path:
        return self.path / STAGE_FILES[stage]


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _desc_hash(desc: dict) -> str:
    return hashlib.sha256(json.dumps(desc, sort_keys=True).encode()).hexdigest()


def _load_stopwords(cfg: PipelineConfig) -> frozenset:
    if cfg.stopwords is None:
        return corpus.default_stopwords()
    return corpus.load_stopwords(cfg.stopwords)


def _stopword_fingerprint(cfg: PipelineConfig) -> str:
    return hashlib.sha256("\n".join(sorted(_load_stopwords(cfg))).encode()).hexdigest()


def _sentences(cfg: PipelineConfig, vocab):
    return corpus.iter_token_ids(
        cfg.inputs,
        _load_stopwords(cfg),
        vocab,
        lowercase=cfg.lowercase,
        oov_mode=cfg.oov_mode,
    )


def _stage_vocab(cfg: PipelineConfig, out: Path) -> None:
    tokens = corpus.iter_tokens(cfg.inputs, _load_stopwords(cfg), lowercase=cfg.lowercase)
    vocab = corpus.build_vocabulary(tokens, cfg.vocab_size, _load_stopwords(cfg))
    vocab.save(out / STAGE_FILES["vocab"])


def _stage_graph(cfg: PipelineConfig, out: Path) -> None:
    vocab = corpus.Vocabulary.load(out / STAGE_FILES["vocab"])
    counts = graph.count_cooccurrences(
        _sentences(cfg, vocab), len(vocab), cfg.window, threads=cfg.threads
    )
    g = graph.select_edges(
        counts, vocab, top_k=cfg.top_k, edge_target=cfg.edge_target,
        min_count=cfg.min_count,
    )
    graph.save_edges(g, out / STAGE_FILES["graph"])


def _stage_relvecs(cfg: PipelineConfig, out: Path) -> None:
    vocab = corpus.Vocabulary.load(out / STAGE_FILES["vocab"])
    g = graph.load_edges(out / STAGE_FILES["graph"], vocab)
    emb = load_embeddings(cfg.embeddings, vocab, binary=cfg.embeddings_binary)
    store = relvec.build_relation_records(_sentences(cfg, vocab), g, emb, cfg.window)
    relvec.save_store(store, out / STAGE_FILES["relvecs"])


def _stage_train(cfg: PipelineConfig, out: Path) -> None:
    vocab = corpus.Vocabulary.load(out / STAGE_FILES["vocab"])
    emb = load_embeddings(cfg.embeddings, vocab, binary=cfg.embeddings_binary)
    store = relvec.load_store(out / STAGE_FILES["relvecs"])
    tc = autoenc.TrainConfig(
        m=cfg.code_dim, lam=cfg.lam, epochs=cfg.epochs, batch_size=cfg.batch_size,
        learning_rate=cfg.learning_rate, lr_decay=cfg.lr_decay,
        optimizer=cfg.optimizer, holdout_frac=cfg.holdout_frac, seed=cfg.seed,
    )
    params, _history = autoenc.train(store, emb, tc)
    autoenc.save_params(params, out / STAGE_FILES["train"])


def _stage_compress(cfg: PipelineConfig, out: Path) -> None:
    vocab = corpus.Vocabulary.load(out / STAGE_FILES["vocab"])
    emb = load_embeddings(cfg.embeddings, vocab, binary=cfg.embeddings_binary)
    store = relvec.load_store(out / STAGE_FILES["relvecs"])
    params = autoenc.load_params(out / STAGE_FILES["train"])
    compressed = autoenc.compress_store(store, params, emb)
    relvec.save_store(compressed, out / STAGE_FILES["compress"])


_STAGE_FN = {
    "vocab": _stage_vocab,
    "graph": _stage_graph,
    "relvecs": _stage_relvecs,
    "train": _stage_train,
    "compress": _stage_compress,
}


def _stage_descriptor(name: str, cfg: PipelineConfig, out: Path) -> dict:
    corpus_hashes = [_sha256(Path(p)) for p in cfg.inputs]
    common = {"stage": name}
    if name == "vocab":
        return common | {
            "inputs": corpus_hashes,
            "vocab_size": cfg.vocab_size,
            "lowercase": cfg.lowercase,
            "stopwords": _stopword_fingerprint(cfg),
        }
    token_env = {
        "lowercase": cfg.lowercase,
        "oov_mode": cfg.oov_mode,
        "stopwords": _stopword_fingerprint(cfg),
        "vocab": _sha256(out / STAGE_FILES["vocab"]),
    }
    if name == "graph":
        return common | token_env | {
            "inputs": corpus_hashes,
            "window": cfg.window,
            "min_count": cfg.min_count,
            "top_k": cfg.top_k,
            "edge_target": cfg.edge_target,
        }
    emb_hash = _sha256(Path(cfg.embeddings))
    if name == "relvecs":
        return common | token_env | {
            "inputs": corpus_hashes,
            "window": cfg.window,
            "edges": _sha256(out / STAGE_FILES["graph"]),
            "embeddings": emb_hash,
        }
    if name == "train":
        return common | {
            "relvecs": _sha256(out / STAGE_FILES["relvecs"]),
            "embeddings": emb_hash,
            "vocab": _sha256(out / STAGE_FILES["vocab"]),
            "code_dim": cfg.code_dim,
            "lam": cfg.lam,
            "epochs": cfg.epochs,
            "batch_size": cfg.batch_size,
            "learning_rate": cfg.learning_rate,
            "lr_decay": cfg.lr_decay,
            "optimizer": cfg.optimizer,
            "holdout_frac": cfg.holdout_frac,
            "seed": cfg.seed,
        }
    if name == "compress":
        return common | {
            "relvecs": _sha256(out / STAGE_FILES["relvecs"]),
            "params": _sha256(out / STAGE_FILES["train"]),
            "embeddings": emb_hash,
            "vocab": _sha256(out / STAGE_FILES["vocab"]),
        }
    raise ValueError(f"unknown stage {name!r}")


def _load_manifest(out: Path) -> dict:
    path = out / MANIFEST_NAME
    if not path.is_file():
        return {"format": 1, "stages": {}}
    try:
        data = json.loads(path.read_text())
    except (json.JSONDecodeError, UnicodeDecodeError):
        log.warning("ignoring unreadable manifest at %s", path)
        return {"format": 1, "stages": {}}
    if not isinstance(data, dict) or "stages" not in data:
        return {"format": 1, "stages": {}}
    return data


def _save_manifest(manifest: dict, out: Path) -> None:
    (out / MANIFEST_NAME).write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def run_pipeline(cfg: PipelineConfig) -> NetworkDirectory:
    """Run all stages, skipping any whose inputs are unchanged.

    Partial results survive a failed run: the manifest is flushed after every
    stage, so a rerun resumes where the failure happened.
    """
    cfg = validate_config(cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_config(cfg, out / CONFIG_NAME)
    manifest = _load_manifest(out)

    for name in STAGES:
        desc = _desc_hash(_stage_descriptor(name, cfg, out))
        target = out / STAGE_FILES[name]
        entry = manifest["stages"].get(name)
        if (
            entry
            and entry.get("desc") == desc
            and target.is_file()
            and _sha256(target) == entry.get("sha256")
        ):
            log.info("stage %-8s unchanged; skipping", name)
            continue
        t0 = time.perf_counter()
        try:
            _STAGE_FN[name](cfg, out)
        except (DataError, NumericError) as exc:
            exc.args = (f"stage {name}: {exc}",)
            raise
        elapsed = time.perf_counter() - t0
        rss_mb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
        manifest["stages"][name] = {
            "desc": desc,
            "file": STAGE_FILES[name],
            "sha256": _sha256(target),
        }
        _save_manifest(manifest, out)
        log.info("stage %-8s done in %.2fs (peak rss %.0f MB)", name, elapsed, rss_mb)
    return NetworkDirectory(out)


def load_network(path, mu: float = DEFAULT_MU) -> NetworkHandle:
    """Validate a network directory and serve it as an immutable handle.

    Checksum or dimension mismatches refuse to load. A directory without the
    trained/compressed artifacts loads with compressed queries disabled.
    """
    out = Path(path)
    if not (out / MANIFEST_NAME).is_file():
        raise DataError(f"{out}: no manifest; not a network directory")
    if not (out / CONFIG_NAME).is_file():
        raise DataError(f"{out}: missing config snapshot")
    manifest = _load_manifest(out)
    available = {}
    for name in STAGES:
        entry = manifest["stages"].get(name)
        target = out / STAGE_FILES[name]
        if entry is None or not target.is_file():
            if name in _OPTIONAL_STAGES:
                log.info("%s: %s absent; related queries disabled", out, STAGE_FILES[name])
                continue
            raise DataError(f"{out}: missing required artifact {STAGE_FILES[name]}")
        if _sha256(target) != entry.get("sha256"):
            raise DataError(f"{out}: checksum mismatch for {STAGE_FILES[name]}")
        available[name] = target

    cfg = load_config(out / CONFIG_NAME)
    vocab = corpus.Vocabulary.load(available["vocab"])
    emb = load_embeddings(cfg.embeddings, vocab, binary=cfg.embeddings_binary)
    g = graph.load_edges(available["graph"], vocab)
    raw = relvec.load_store(available["relvecs"])
    if raw.d != emb.dim:
        raise DataError(
            f"{out}: relation store dimension {raw.d} != embedding dimension {emb.dim}"
        )
    relations = None
    if "compress" in available:
        relations = relvec.load_store(available["compress"])
        if relations.d != emb.dim:
            raise DataError(f"{out}: compressed store d={relations.d} != {emb.dim}")
        if "train" in available:
            params = autoenc.load_params(available["train"])
            if params.d != relations.d or params.m != relations.m:
                raise DataError(
                    f"{out}: parameter dims (d={params.d}, m={params.m}) do not match "
                    f"compressed store (d={relations.d}, m={relations.m})"
                )
    return NetworkHandle(
        vocab=vocab, embeddings=emb, graph=g, relations=relations, raw=raw, mu=mu
    )
