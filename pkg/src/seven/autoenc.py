"""Linear autoencoder that squeezes 6d relation vectors into m-dimensional codes.

The encoder is the affine map r = A z + b. The decoder also receives both
endpoint word vectors: z* = B (v_i | r | v_j) + c, so the code is free to drop
whatever the word vectors already explain and keep only the relational signal.
Training minimizes the squared reconstruction error plus lambda * |r|^2 with
mini-batch gradient descent on analytic gradients.
"""

from __future__ import annotations

import hashlib
import logging
import struct
from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingStore
from .errors import DataError, NumericError
from .relvec import RelationRecord, RelationStore, record_usable, swap_directions

log = logging.getLogger(__name__)

PARAMS_MAGIC = b"SVNP"


@dataclass
class AutoencoderParams:
    A: np.ndarray        # (m, 6d)
    b: np.ndarray        # (m,)
    B: np.ndarray        # (6d, m + 2d)
    c: np.ndarray        # (6d,)
    lam: float
    m: int
    d: int


@dataclass
class Gradients:
    A: np.ndarray
    b: np.ndarray
    B: np.ndarray
    c: np.ndarray


def init_params(d: int, m: int, lam: float, rng: np.random.Generator) -> AutoencoderParams:
    """Uniform +-sqrt(6/(fan_in+fan_out)) matrices, zero biases."""
    zdim = 6 * d
    udim = m + 2 * d
    lim_a = np.sqrt(6.0 / (zdim + m))
    lim_b = np.sqrt(6.0 / (udim + zdim))
    return AutoencoderParams(
        A=rng.uniform(-lim_a, lim_a, size=(m, zdim)),
        b=np.zeros(m),
        B=rng.uniform(-lim_b, lim_b, size=(zdim, udim)),
        c=np.zeros(zdim),
        lam=float(lam),
        m=m,
        d=d,
    )


def encode(params: AutoencoderParams, z: np.ndarray) -> np.ndarray:
    """r = A z + b. Accepts a single vector or a batch (rows)."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape[-1] != 6 * params.d:
        raise ValueError(f"encoder expects length {6 * params.d}, got {z.shape[-1]}")
    return z @ params.A.T + params.b


def decode(
    params: AutoencoderParams, v_i: np.ndarray, r: np.ndarray, v_j: np.ndarray
) -> np.ndarray:
    """z* = B (v_i | r | v_j) + c. Accepts single vectors or batches."""
    v_i = np.asarray(v_i, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    v_j = np.asarray(v_j, dtype=np.float64)
    if v_i.shape[-1] != params.d or v_j.shape[-1] != params.d:
        raise ValueError(f"decoder expects word vectors of length {params.d}")
    if r.shape[-1] != params.m:
        raise ValueError(f"decoder expects a code of length {params.m}")
    u = np.concatenate([v_i, r, v_j], axis=-1)
    return u @ params.B.T + params.c


def loss(params: AutoencoderParams, z, v_i, v_j) -> float:
    """Squared reconstruction error plus lambda * |r|^2 for one example."""
    z = np.asarray(z, dtype=np.float64)
    r = encode(params, z)
    zs = decode(params, v_i, r, v_j)
    e = zs - z
    return float(e @ e + params.lam * (r @ r))


def _forward(params, Z, Vi, Vj):
    R = Z @ params.A.T + params.b
    U = np.concatenate([Vi, R, Vj], axis=1)
    Zs = U @ params.B.T + params.c
    return R, Zs


def mean_loss(params: AutoencoderParams, Z, Vi, Vj, chunk: int = 8192) -> float:
    """Mean loss over a dataset, evaluated in float64 chunks."""
    n = len(Z)
    if n == 0:
        raise ValueError("empty dataset")
    total = 0.0
    for s in range(0, n, chunk):
        Zc = np.asarray(Z[s : s + chunk], dtype=np.float64)
        Vic = np.asarray(Vi[s : s + chunk], dtype=np.float64)
        Vjc = np.asarray(Vj[s : s + chunk], dtype=np.float64)
        R, Zs = _forward(params, Zc, Vic, Vjc)
        E = Zs - Zc
        total += float((E * E).sum() + params.lam * (R * R).sum())
    return total / n


def gradients(params: AutoencoderParams, Z, Vi, Vj, pairs=None) -> Gradients:
    """Mean analytic gradient of the loss over a batch.

    The chain rule runs through the code r twice: once inside the
    reconstruction (r is part of the decoder input) and once in the
    regularizer.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    Vi = np.atleast_2d(np.asarray(Vi, dtype=np.float64))
    Vj = np.atleast_2d(np.asarray(Vj, dtype=np.float64))
    n = len(Z)
    if n == 0:
        raise ValueError("gradient of an empty batch")
    d, m = params.d, params.m
    R, Zs = _forward(params, Z, Vi, Vj)
    E = Zs - Z
    if not np.isfinite(E).all():
        bad = int(np.flatnonzero(~np.isfinite(E).all(axis=1))[0])
        label = pairs[bad] if pairs is not None else f"batch row {bad}"
        raise NumericError(f"non-finite forward pass at {label}")
    U = np.concatenate([Vi, R, Vj], axis=1)
    gB = 2.0 * (E.T @ U) / n
    gc = 2.0 * E.sum(axis=0) / n
    dR = 2.0 * (E @ params.B[:, d : d + m]) + 2.0 * params.lam * R
    gA = (dR.T @ Z) / n
    gb = dR.sum(axis=0) / n
    return Gradients(A=gA, b=gb, B=gB, c=gc)


@dataclass
class TrainConfig:
    m: int
    lam: float = 0.01
    epochs: int = 20
    batch_size: int = 256
    learning_rate: float = 1e-3
    lr_decay: float = 1.0          # multiplicative, applied after each epoch
    optimizer: str = "adam"        # "adam" | "sgd"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    holdout_frac: float = 0.05
    seed: int = 0


def _holdout_mask(pairs, seed: int, frac: float) -> np.ndarray:
    """Deterministic per-edge split; both directions of an edge stay together."""
    cut = int(frac * 10_000)
    out = np.zeros(len(pairs), dtype=bool)
    for t, (a, b) in enumerate(pairs):
        lo, hi = min(a, b), max(a, b)
        digest = hashlib.blake2b(f"{seed}:{lo}:{hi}".encode(), digest_size=8).digest()
        out[t] = int.from_bytes(digest, "little") % 10_000 < cut
    return out


def build_training_set(relstore: RelationStore, emb: EmbeddingStore):
    """Both directions of every usable edge as (Z, Vi, Vj, pairs) float32 arrays."""
    if relstore.m != 0:
        raise ValueError("training needs a raw (uncompressed) relation store")
    d = relstore.d
    usable = [r for r in relstore.records if record_usable(r, emb)]
    n = 2 * len(usable)
    Z = np.empty((n, 6 * d), dtype=np.float32)
    Vi = np.empty((n, d), dtype=np.float32)
    Vj = np.empty((n, d), dtype=np.float32)
    pairs = []
    for t, rec in enumerate(usable):
        z = np.asarray(rec.vec, dtype=np.float64)
        Z[2 * t] = z
        Z[2 * t + 1] = swap_directions(z, d)
        Vi[2 * t] = emb.get(rec.a)
        Vj[2 * t] = emb.get(rec.b)
        Vi[2 * t + 1] = emb.get(rec.b)
        Vj[2 * t + 1] = emb.get(rec.a)
        pairs.append((rec.a, rec.b))
        pairs.append((rec.b, rec.a))
    return Z, Vi, Vj, pairs


def train(
    relstore: RelationStore, emb: EmbeddingStore, config: TrainConfig
) -> tuple[AutoencoderParams, list]:
    """Fit the autoencoder; returns final parameters and a per-epoch log.

    Deterministic for a fixed seed. Aborts with NumericError if the training
    loss exceeds 1000x its initial value or any parameter goes non-finite.
    """
    Z, Vi, Vj, pairs = build_training_set(relstore, emb)
    if len(Z) == 0:
        raise DataError("no usable relation records to train on")
    held = _holdout_mask(pairs, config.seed, config.holdout_frac)
    tr = np.flatnonzero(~held)
    ho = np.flatnonzero(held)
    if len(tr) == 0:
        tr, ho = ho, tr  # degenerate split on tiny data: train on everything
    log.info("training on %d examples (%d held out), m=%d lambda=%g",
             len(tr), len(ho), config.m, config.lam)

    rng = np.random.default_rng(config.seed)
    params = init_params(relstore.d, config.m, config.lam, rng)
    state = {name: (np.zeros_like(getattr(params, name)),
                    np.zeros_like(getattr(params, name)))
             for name in ("A", "b", "B", "c")}
    step = 0
    lr = config.learning_rate
    initial = mean_loss(params, Z[tr], Vi[tr], Vj[tr])
    history = []

    for epoch in range(1, config.epochs + 1):
        perm = rng.permutation(len(tr))
        for s in range(0, len(perm), config.batch_size):
            bidx = tr[perm[s : s + config.batch_size]]
            g = gradients(params, Z[bidx], Vi[bidx], Vj[bidx],
                          pairs=[pairs[t] for t in bidx])
            step += 1
            for name in ("A", "b", "B", "c"):
                theta = getattr(params, name)
                grad = getattr(g, name)
                if config.optimizer == "adam":
                    mom, vel = state[name]
                    mom *= config.beta1
                    mom += (1 - config.beta1) * grad
                    vel *= config.beta2
                    vel += (1 - config.beta2) * grad * grad
                    mhat = mom / (1 - config.beta1 ** step)
                    vhat = vel / (1 - config.beta2 ** step)
                    theta -= lr * mhat / (np.sqrt(vhat) + config.eps)
                elif config.optimizer == "sgd":
                    theta -= lr * grad
                else:
                    raise ValueError(f"unknown optimizer {config.optimizer!r}")
        lr *= config.lr_decay
        for name in ("A", "b", "B", "c"):
            if not np.isfinite(getattr(params, name)).all():
                raise NumericError(f"non-finite values in parameter {name} after epoch {epoch}")
        train_loss = mean_loss(params, Z[tr], Vi[tr], Vj[tr])
        holdout_loss = mean_loss(params, Z[ho], Vi[ho], Vj[ho]) if len(ho) else None
        history.append(
            {"epoch": epoch, "train_loss": train_loss,
             "holdout_loss": holdout_loss, "learning_rate": lr}
        )
        log.info("epoch %d: train %.6g%s", epoch, train_loss,
                 f", holdout {holdout_loss:.6g}" if holdout_loss is not None else "")
        if train_loss > 1e3 * initial and initial > 0:
            raise NumericError(
                f"training diverged (loss {train_loss:.3g} vs initial {initial:.3g}); "
                "lower the learning rate"
            )
    return params, history


def compress_store(
    relstore: RelationStore,
    params: AutoencoderParams,
    emb: EmbeddingStore | None = None,
) -> RelationStore:
    """Encode both directions of every usable edge into an m-code store.

    Without an embedding store, usability falls back to the occurrence counts
    alone (endpoint coverage is then enforced at network load time).
    """
    if relstore.m != 0:
        raise ValueError("store is already compressed")
    if relstore.d != params.d:
        raise DataError(f"dimension mismatch: store d={relstore.d}, params d={params.d}")
    d, m = params.d, params.m
    records = []
    for rec in relstore.records:
        if emb is not None:
            if not record_usable(rec, emb):
                continue
        elif rec.count_ab == 0 and rec.count_ba == 0:
            continue
        z = np.asarray(rec.vec, dtype=np.float64)
        r_ab = encode(params, z)
        r_ba = encode(params, swap_directions(z, d))
        records.append(
            RelationRecord(rec.a, rec.b, rec.count_ab, rec.count_ba,
                           np.concatenate([r_ab, r_ba]))
        )
    return RelationStore(d=d, m=m, records=records)


def save_params(params: AutoencoderParams, path) -> None:
    """Binary layout: SVNP, d, m, lambda (f32), then A, b, B, c row-major f32."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIIf", PARAMS_MAGIC, params.d, params.m, params.lam))
        for name in ("A", "b", "B", "c"):
            fh.write(np.asarray(getattr(params, name), dtype="<f4").tobytes())


def load_params(path) -> AutoencoderParams:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 16 or data[:4] != PARAMS_MAGIC:
        raise DataError(f"{path}: not a parameter file (bad magic)")
    _, d, m, lam = struct.unpack_from("<4sIIf", data, 0)
    zdim, udim = 6 * d, m + 2 * d
    sizes = [m * zdim, m, zdim * udim, zdim]
    if len(data) != 16 + 4 * sum(sizes):
        raise DataError(f"{path}: truncated parameter file")
    off = 16
    arrays = []
    for size in sizes:
        arrays.append(
            np.frombuffer(data, dtype="<f4", count=size, offset=off).astype(np.float64)
        )
        off += 4 * size
    return AutoencoderParams(
        A=arrays[0].reshape(m, zdim),
        b=arrays[1],
        B=arrays[2].reshape(zdim, udim),
        c=arrays[3],
        lam=float(lam),
        m=int(m),
        d=int(d),
    )
