"""Step 5 – Sentence-level extractive summarizer.

A bi-directional GRU runs over the sentence vectors of one transcript. Its
states feed a document representation and a sequential classifier that
scores every sentence on content, salience against the document, novelty
against the summary built so far, absolute and relative position, and
whether the sentence carries a number. Training minimizes binary
cross-entropy with Adam; gradients are computed by hand.

Checkpoint layout (little-endian):

  b"ECTX" | uint32 version | uint32 header length | JSON header
  {"dims": {...}, "tensors": [{"name", "shape"}, ...]} | float64 payload in
  header order

Standalone: python main.py train | python main.py summarize
Module:     from extractor import forward, gradients, train, select
"""

from __future__ import annotations

import json
import logging
import math
import struct
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

import store
from text_core import Sentence

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Configuration constants (adjust as needed)
# ---------------------------------------------------------------------------

HIDDEN_DIM: int = 64
POS_DIM: int = 16
MAX_POS: int = 100
REL_BUCKETS: int = 10
WORD_BUDGET: int = 50
PROB_EPS: float = 1e-12
CHECKPOINT_MAGIC: bytes = b"ECTX"
CHECKPOINT_VERSION: int = 1

_DIRECTIONS = ("f", "b")
_GATES = ("z", "r", "h")

# ---------------------------------------------------------------------------
# Models and errors
# ---------------------------------------------------------------------------


class ShapeError(ValueError):
    pass


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int, step: int, loss: float) -> None:
        self.epoch, self.step, self.loss = epoch, step, loss
        super().__init__(f"loss became {loss} at epoch {epoch}, step {step}")


class ExtractorDims(BaseModel):
    input_dim: int
    hidden_dim: int = HIDDEN_DIM
    pos_dim: int = POS_DIM
    max_pos: int = MAX_POS
    rel_buckets: int = REL_BUCKETS


class ExtractorParams(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    dims: ExtractorDims
    tensors: dict[str, np.ndarray]

    def clone(self) -> ExtractorParams:
        return ExtractorParams(dims=self.dims, tensors={k: v.copy() for k, v in self.tensors.items()})


class SentenceStates(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    h_f: np.ndarray                               # (N, Hd)
    h_b: np.ndarray                               # (N, Hd)
    h: np.ndarray                                 # (N, Hd)
    d: np.ndarray                                 # (Hd,)
    nu: np.ndarray                                # (N,)
    p_abs_idx: list[int]
    p_rel_idx: list[int]
    n_sentences: int


class DecodeState(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    sums: np.ndarray                              # (N, Hd); row i is sum_i, seen before sentence i
    probs: np.ndarray                             # (N,)


class TrainConfig(BaseModel):
    learning_rate: float = Field(default=1e-5, ge=0.0)
    batch_size: int = Field(default=8, ge=1)
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    max_epochs: int = Field(default=30, ge=1)
    patience: int | None = None
    seed: int = 0
    threads: int = Field(default=1, ge=1)


class TrainingDoc(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    pair_id: str
    vectors: np.ndarray                           # (N, D)
    nu: np.ndarray                                # (N,)
    labels: np.ndarray                            # (N,)


class EpochRecord(BaseModel):
    epoch: int
    train_loss: float
    val_loss: float


class TrainResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    params: ExtractorParams
    history: list[EpochRecord]
    best_epoch: int


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------


def param_shapes(dims: ExtractorDims) -> dict[str, tuple[int, ...]]:
    D, H, P = dims.input_dim, dims.hidden_dim, dims.pos_dim
    shapes: dict[str, tuple[int, ...]] = {}
    for direction in _DIRECTIONS:
        for gate in _GATES:
            shapes[f"W{gate}_{direction}"] = (H, D)
            shapes[f"U{gate}_{direction}"] = (H, H)
            shapes[f"b{gate}_{direction}"] = (H,)
    shapes.update({
        "W_h": (H, 2 * H), "b_h": (H,),
        "W_d": (H, 2 * H), "b_d": (H,),
        "w_c": (H,), "W_s": (H, H), "W_n": (H, H),
        "P_abs": (dims.max_pos, P), "w_ap": (P,),
        "P_rel": (dims.rel_buckets, P), "w_rp": (P,),
        "w_nu": (1,), "b_cls": (1,),
    })
    return shapes


def zero_params(dims: ExtractorDims) -> ExtractorParams:
    return ExtractorParams(dims=dims, tensors={k: np.zeros(s) for k, s in param_shapes(dims).items()})


def init_params(dims: ExtractorDims, seed: int = 0) -> ExtractorParams:
    """Uniform(±1/sqrt(fan_in)) weights, zero biases, small Gaussian position tables."""
    rng = np.random.default_rng(seed)
    tensors: dict[str, np.ndarray] = {}
    for name, shape in param_shapes(dims).items():
        if name.startswith("b"):
            tensors[name] = np.zeros(shape)
        elif name in ("P_abs", "P_rel"):
            tensors[name] = rng.normal(0.0, 0.1, size=shape)
        else:
            fan_in = shape[-1]
            bound = 1.0 / math.sqrt(fan_in)
            tensors[name] = rng.uniform(-bound, bound, size=shape)
    return ExtractorParams(dims=dims, tensors=tensors)


# ---------------------------------------------------------------------------
# Forward pass
# ---------------------------------------------------------------------------


def _sigmoid(x: np.ndarray | float) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x)))


def position_indices(n: int, dims: ExtractorDims) -> tuple[list[int], list[int]]:
    abs_idx = [min(i, dims.max_pos - 1) for i in range(n)]
    rel_idx = [dims.rel_buckets * i // n for i in range(n)]
    return abs_idx, rel_idx


def _gru(X: np.ndarray, t: dict[str, np.ndarray], direction: str) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """Run one GRU direction over X in row order; returns states and cache."""
    n, H = X.shape[0], t[f"bz_{direction}"].shape[0]
    Wz, Uz, bz = t[f"Wz_{direction}"], t[f"Uz_{direction}"], t[f"bz_{direction}"]
    Wr, Ur, br = t[f"Wr_{direction}"], t[f"Ur_{direction}"], t[f"br_{direction}"]
    Wh, Uh, bh = t[f"Wh_{direction}"], t[f"Uh_{direction}"], t[f"bh_{direction}"]
    xz, xr, xh = X @ Wz.T + bz, X @ Wr.T + br, X @ Wh.T + bh

    cache = {k: np.zeros((n, H)) for k in ("h_prev", "z", "r", "hc", "out")}
    h = np.zeros(H)
    for i in range(n):
        z = _sigmoid(xz[i] + Uz @ h)
        r = _sigmoid(xr[i] + Ur @ h)
        hc = np.tanh(xh[i] + Uh @ (r * h))
        cache["h_prev"][i], cache["z"][i], cache["r"][i], cache["hc"][i] = h, z, r, hc
        h = (1.0 - z) * h + z * hc
        cache["out"][i] = h
    return cache["out"], cache


def _check_inputs(X: np.ndarray, nu: np.ndarray, params: ExtractorParams) -> None:
    if X.ndim != 2 or X.shape[0] == 0:
        raise ShapeError(f"expected a nonempty (N, D) matrix, got shape {X.shape}")
    if X.shape[1] != params.dims.input_dim:
        raise ShapeError(f"sentence vectors have dimension {X.shape[1]}, model expects {params.dims.input_dim}")
    if nu.shape != (X.shape[0],):
        raise ShapeError(f"numeric flags have shape {nu.shape}, expected ({X.shape[0]},)")


def _forward(X: np.ndarray, nu: np.ndarray, params: ExtractorParams) -> dict:
    _check_inputs(X, nu, params)
    t = params.tensors
    n, H = X.shape[0], params.dims.hidden_dim

    h_f, cache_f = _gru(X, t, "f")
    h_b_rev, cache_b = _gru(X[::-1], t, "b")
    h_b = h_b_rev[::-1]
    C = np.concatenate([h_f, h_b], axis=1)
    hrep = np.tanh(C @ t["W_h"].T + t["b_h"])
    mean = C.mean(axis=0)
    d = np.tanh(t["W_d"] @ mean + t["b_d"])

    abs_idx, rel_idx = position_indices(n, params.dims)
    pos_abs = t["P_abs"][abs_idx] @ t["w_ap"]
    pos_rel = t["P_rel"][rel_idx] @ t["w_rp"]
    salience_vec = t["W_s"] @ d

    sums = np.zeros((n, H))
    tanh_sums = np.zeros((n, H))
    probs = np.zeros(n)
    running = np.zeros(H)
    for i in range(n):
        h_i = hrep[i]
        sums[i] = running
        tanh_sums[i] = np.tanh(running)
        score = (
            t["w_c"] @ h_i
            + h_i @ salience_vec
            - h_i @ (t["W_n"] @ tanh_sums[i])
            + pos_abs[i]
            + pos_rel[i]
            + t["w_nu"][0] * nu[i]
            + t["b_cls"][0]
        )
        probs[i] = _sigmoid(score)
        running = running + h_i * probs[i]

    return {
        "X": X, "nu": nu, "h_f": h_f, "h_b": h_b, "cache_f": cache_f, "cache_b": cache_b,
        "C": C, "hrep": hrep, "mean": mean, "d": d, "abs_idx": abs_idx, "rel_idx": rel_idx,
        "sums": sums, "tanh_sums": tanh_sums, "probs": probs,
    }


def forward(
    X: np.ndarray,
    nu: np.ndarray,
    params: ExtractorParams,
) -> tuple[np.ndarray, SentenceStates, DecodeState]:
    """P(y_i = 1) for every sentence of one document."""
    f = _forward(np.asarray(X, dtype=np.float64), np.asarray(nu, dtype=np.float64), params)
    states = SentenceStates(
        h_f=f["h_f"], h_b=f["h_b"], h=f["hrep"], d=f["d"], nu=f["nu"],
        p_abs_idx=f["abs_idx"], p_rel_idx=f["rel_idx"], n_sentences=len(f["probs"]),
    )
    return f["probs"], states, DecodeState(sums=f["sums"], probs=f["probs"])


# ---------------------------------------------------------------------------
# Loss and gradients
# ---------------------------------------------------------------------------


def bce_loss(probs: np.ndarray, labels: np.ndarray) -> float:
    p = np.clip(np.asarray(probs, dtype=np.float64), PROB_EPS, 1.0 - PROB_EPS)
    y = np.asarray(labels, dtype=np.float64)
    if p.shape != y.shape:
        raise ShapeError(f"probs {p.shape} and labels {y.shape} differ")
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def _gru_backward(
    X: np.ndarray,
    g_out: np.ndarray,
    cache: dict[str, np.ndarray],
    t: dict[str, np.ndarray],
    direction: str,
    grads: dict[str, np.ndarray],
) -> None:
    Uz, Ur, Uh = t[f"Uz_{direction}"], t[f"Ur_{direction}"], t[f"Uh_{direction}"]
    n, H = g_out.shape
    g_az = np.zeros((n, H))
    g_ar = np.zeros((n, H))
    g_ah = np.zeros((n, H))
    g_next = np.zeros(H)
    for i in reversed(range(n)):
        hp, z, r, hc = cache["h_prev"][i], cache["z"][i], cache["r"][i], cache["hc"][i]
        g_h = g_out[i] + g_next
        g_z = g_h * (hc - hp)
        g_hp = g_h * (1.0 - z)
        g_ah[i] = g_h * z * (1.0 - hc ** 2)
        g_rh = Uh.T @ g_ah[i]
        g_hp += g_rh * r
        g_ar[i] = g_rh * hp * r * (1.0 - r)
        g_az[i] = g_z * z * (1.0 - z)
        g_hp += Uz.T @ g_az[i] + Ur.T @ g_ar[i]
        grads[f"Uh_{direction}"] += np.outer(g_ah[i], r * hp)
        grads[f"Uz_{direction}"] += np.outer(g_az[i], hp)
        grads[f"Ur_{direction}"] += np.outer(g_ar[i], hp)
        g_next = g_hp
    for gate, g_a in (("z", g_az), ("r", g_ar), ("h", g_ah)):
        grads[f"W{gate}_{direction}"] += g_a.T @ X
        grads[f"b{gate}_{direction}"] += g_a.sum(axis=0)


def gradients(
    X: np.ndarray,
    nu: np.ndarray,
    labels: np.ndarray,
    params: ExtractorParams,
) -> tuple[float, dict[str, np.ndarray]]:
    """Loss and exact reverse-mode gradients for one document.

    The backward pass runs the decode loop in reverse carrying the gradient
    of the running summary, so every P(y_j) feeding a later novelty term is
    differentiated through.
    """
    f = _forward(np.asarray(X, dtype=np.float64), np.asarray(nu, dtype=np.float64), params)
    t = params.tensors
    y = np.asarray(labels, dtype=np.float64)
    probs, hrep, d = f["probs"], f["hrep"], f["d"]
    n = len(probs)
    loss = bce_loss(probs, y)
    grads = {k: np.zeros_like(v) for k, v in t.items()}

    # dL/dp through the clamp; zero where the clamp is active
    inside = (probs >= PROB_EPS) & (probs <= 1.0 - PROB_EPS)
    pc = np.clip(probs, PROB_EPS, 1.0 - PROB_EPS)
    g_p_loss = np.where(inside, -(y / pc - (1.0 - y) / (1.0 - pc)) / n, 0.0)

    salience_vec = t["W_s"] @ d
    g_hrep = np.zeros_like(hrep)
    g_d = np.zeros_like(d)
    g_sum = np.zeros_like(d)
    for i in reversed(range(n)):
        h_i, p_i, ts = hrep[i], probs[i], f["tanh_sums"][i]
        # sum_{i+1} = sum_i + h_i * p_i
        g_p = g_p_loss[i] + g_sum @ h_i
        g_hrep[i] += g_sum * p_i
        g_score = g_p * p_i * (1.0 - p_i)

        novelty_vec = t["W_n"] @ ts
        g_hrep[i] += g_score * (t["w_c"] + salience_vec - novelty_vec)
        grads["w_c"] += g_score * h_i
        grads["W_s"] += g_score * np.outer(h_i, d)
        g_d += g_score * (t["W_s"].T @ h_i)
        grads["W_n"] -= g_score * np.outer(h_i, ts)
        g_ts = -g_score * (t["W_n"].T @ h_i)
        a, r = f["abs_idx"][i], f["rel_idx"][i]
        grads["P_abs"][a] += g_score * t["w_ap"]
        grads["w_ap"] += g_score * t["P_abs"][a]
        grads["P_rel"][r] += g_score * t["w_rp"]
        grads["w_rp"] += g_score * t["P_rel"][r]
        grads["w_nu"][0] += g_score * f["nu"][i]
        grads["b_cls"][0] += g_score
        g_sum = g_sum + g_ts * (1.0 - ts ** 2)

    C = f["C"]
    g_a = g_hrep * (1.0 - hrep ** 2)
    grads["W_h"] += g_a.T @ C
    grads["b_h"] += g_a.sum(axis=0)
    g_C = g_a @ t["W_h"]

    g_dpre = g_d * (1.0 - d ** 2)
    grads["W_d"] += np.outer(g_dpre, f["mean"])
    grads["b_d"] += g_dpre
    g_C += (t["W_d"].T @ g_dpre) / n

    H = params.dims.hidden_dim
    _gru_backward(f["X"], g_C[:, :H], f["cache_f"], t, "f", grads)
    _gru_backward(f["X"][::-1], g_C[::-1, H:], f["cache_b"], t, "b", grads)
    return loss, grads


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


class Adam:
    def __init__(self, params: ExtractorParams, config: TrainConfig) -> None:
        self.config = config
        self.m = {k: np.zeros_like(v) for k, v in params.tensors.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.tensors.items()}
        self.step_count = 0

    def step(self, params: ExtractorParams, grads: dict[str, np.ndarray]) -> None:
        c = self.config
        self.step_count += 1
        bias1 = 1.0 - c.beta1 ** self.step_count
        bias2 = 1.0 - c.beta2 ** self.step_count
        for name, g in grads.items():
            self.m[name] = c.beta1 * self.m[name] + (1.0 - c.beta1) * g
            self.v[name] = c.beta2 * self.v[name] + (1.0 - c.beta2) * g * g
            m_hat = self.m[name] / bias1
            v_hat = self.v[name] / bias2
            params.tensors[name] -= c.learning_rate * m_hat / (np.sqrt(v_hat) + c.adam_eps)


def mean_loss(docs: list[TrainingDoc], params: ExtractorParams) -> float:
    if not docs:
        return 0.0
    losses = [bce_loss(forward(doc.vectors, doc.nu, params)[0], doc.labels) for doc in docs]
    return math.fsum(losses) / len(losses)


def train(
    train_docs: list[TrainingDoc],
    val_docs: list[TrainingDoc],
    config: TrainConfig,
    dims: ExtractorDims | None = None,
    initial: ExtractorParams | None = None,
) -> TrainResult:
    """Mini-batch Adam; returns the snapshot with the lowest validation loss."""
    from parallel import parallel_map

    if not train_docs or not val_docs:
        raise ValueError("training needs nonempty train and validation sets")
    if initial is None:
        dims = dims or ExtractorDims(input_dim=int(train_docs[0].vectors.shape[1]))
        initial = init_params(dims, config.seed)
    params = initial.clone()
    optimizer = Adam(params, config)
    shuffler = np.random.default_rng([config.seed, 1])

    best_params = params.clone()
    best_loss = mean_loss(val_docs, params)
    best_epoch = 0
    history: list[EpochRecord] = []
    stale = 0
    logger.info("train: %d train docs, %d validation docs, initial val loss %.5f",
                len(train_docs), len(val_docs), best_loss)

    for epoch in range(1, config.max_epochs + 1):
        order = shuffler.permutation(len(train_docs))
        batch_losses: list[float] = []
        for step, start in enumerate(range(0, len(order), config.batch_size), start=1):
            batch = [train_docs[i] for i in order[start:start + config.batch_size]]
            results = parallel_map(
                lambda doc: gradients(doc.vectors, doc.nu, doc.labels, params), batch, config.threads,
            )
            loss = math.fsum(r[0] for r in results) / len(results)
            if not math.isfinite(loss):
                raise TrainingDiverged(epoch, step, loss)
            grads = {k: np.zeros_like(v) for k, v in params.tensors.items()}
            for _, g in results:
                for name in grads:
                    grads[name] += g[name]
            for name in grads:
                grads[name] /= len(results)
            optimizer.step(params, grads)
            batch_losses.append(loss)

        val_loss = mean_loss(val_docs, params)
        if not math.isfinite(val_loss):
            raise TrainingDiverged(epoch, 0, val_loss)
        record = EpochRecord(epoch=epoch, train_loss=math.fsum(batch_losses) / len(batch_losses), val_loss=val_loss)
        history.append(record)
        logger.debug("train: epoch %d train %.5f val %.5f", epoch, record.train_loss, val_loss)

        if val_loss < best_loss:
            best_loss, best_epoch, best_params, stale = val_loss, epoch, params.clone(), 0
        else:
            stale += 1
            if config.patience is not None and stale >= config.patience:
                logger.info("train: early stop after epoch %d (best epoch %d)", epoch, best_epoch)
                break

    logger.info("train: best validation loss %.5f at epoch %d", best_loss, best_epoch)
    return TrainResult(params=best_params, history=history, best_epoch=best_epoch)


# ---------------------------------------------------------------------------
# Inference
# ---------------------------------------------------------------------------


def select(probs: list[float] | np.ndarray, sentences: list[Sentence], word_budget: int = WORD_BUDGET) -> list[int]:
    """Most probable sentences first (ties to the smaller index) until the
    word count reaches the budget; at least one sentence; document order out."""
    if len(probs) != len(sentences):
        raise ShapeError(f"{len(probs)} probabilities for {len(sentences)} sentences")
    order = sorted(range(len(sentences)), key=lambda i: (-float(probs[i]), i))
    chosen: list[int] = []
    words = 0
    for i in order:
        if chosen and words >= word_budget:
            break
        chosen.append(i)
        words += len(sentences[i].tokens)
    return sorted(chosen)


def summarize_document(
    X: np.ndarray,
    nu: np.ndarray,
    sentences: list[Sentence],
    params: ExtractorParams,
    word_budget: int = WORD_BUDGET,
) -> list[int]:
    probs, _, _ = forward(X, nu, params)
    return select(probs, sentences, word_budget)


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------


def checkpoint_bytes(params: ExtractorParams) -> bytes:
    names = sorted(params.tensors)
    header = json.dumps({
        "dims": params.dims.model_dump(),
        "tensors": [{"name": n, "shape": list(params.tensors[n].shape)} for n in names],
    }, sort_keys=True).encode("utf-8")
    payload = b"".join(params.tensors[n].astype("<f8").tobytes() for n in names)
    return struct.pack("<4sII", CHECKPOINT_MAGIC, CHECKPOINT_VERSION, len(header)) + header + payload


def params_from_bytes(data: bytes) -> ExtractorParams:
    head = struct.calcsize("<4sII")
    magic, version, header_len = struct.unpack_from("<4sII", data)
    if magic != CHECKPOINT_MAGIC or version != CHECKPOINT_VERSION:
        raise ValueError(f"not an extractor checkpoint (magic={magic!r}, version={version})")
    header = json.loads(data[head:head + header_len].decode("utf-8"))
    offset = head + header_len
    tensors: dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        count = math.prod(shape)
        tensors[entry["name"]] = np.frombuffer(data, dtype="<f8", count=count, offset=offset).astype(np.float64).reshape(shape)
        offset += 8 * count
    if offset != len(data):
        raise ValueError(f"checkpoint has {len(data) - offset} trailing bytes")
    return ExtractorParams(dims=ExtractorDims.model_validate(header["dims"]), tensors=tensors)


def save_checkpoint(path: str | Path, params: ExtractorParams) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(checkpoint_bytes(params))
    logger.info("train: wrote checkpoint %s", path)


def load_checkpoint(path: str | Path) -> ExtractorParams:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    return params_from_bytes(path.read_bytes())


# ---------------------------------------------------------------------------
# Public entry-points
# ---------------------------------------------------------------------------


def document_inputs(pair_id: str, sentences: list[Sentence], encoder) -> tuple[np.ndarray, np.ndarray]:
    """Sentence-vector matrix and numeric flags for one transcript."""
    from encoder import encode_all
    from text_core import has_numerals

    vectors = encode_all(encoder, sentences, pair_id, "doc")
    X = np.stack([v.values for v in vectors])
    nu = np.array([1.0 if has_numerals(s) else 0.0 for s in sentences])
    return X, nu


def run_train(
    workdir: str | Path,
    config_hash: str,
    encoder_choice: str,
    config: TrainConfig,
    hidden_dim: int = HIDDEN_DIM,
) -> dict[str, int | float]:
    from encoder import load_encoder
    from labels import load_labels
    from pairing import load_pairs, load_split

    workdir = Path(workdir)
    encoder = load_encoder(encoder_choice, workdir)
    pairs = {p.pair_id: p for p in load_pairs(workdir)}
    split = load_split(workdir)
    labelsets = load_labels(workdir)

    def _docs(ids: list[str]) -> list[TrainingDoc]:
        docs: list[TrainingDoc] = []
        for pair_id in ids:
            if pair_id not in labelsets:
                logger.warning("train: %s has no labels. Skipped.", pair_id)
                continue
            X, nu = document_inputs(pair_id, pairs[pair_id].transcript.sentences, encoder)
            docs.append(TrainingDoc(
                pair_id=pair_id, vectors=X, nu=nu, labels=np.array(labelsets[pair_id].labels, dtype=np.float64),
            ))
        return docs

    dims = ExtractorDims(input_dim=encoder.dimension, hidden_dim=hidden_dim)
    result = train(_docs(split.train), _docs(split.validation), config, dims=dims)
    save_checkpoint(workdir / store.CHECKPOINT_FILE, result.params)
    store.write_records(workdir / store.TRAIN_LOG_FILE, "train_log", result.history, config_hash)
    return {
        "epochs_run": len(result.history),
        "best_epoch": result.best_epoch,
        "best_val_loss": min((r.val_loss for r in result.history), default=float("nan")),
    }


def run_summarize(
    workdir: str | Path,
    config_hash: str,
    encoder_choice: str,
    word_budget: int = WORD_BUDGET,
    threads: int = 1,
) -> int:
    """Write extractive summaries of the test split; returns the count."""
    from encoder import load_encoder
    from pairing import load_pairs, load_split
    from parallel import parallel_map

    workdir = Path(workdir)
    encoder = load_encoder(encoder_choice, workdir)
    params = load_checkpoint(workdir / store.CHECKPOINT_FILE)
    pairs = {p.pair_id: p for p in load_pairs(workdir)}
    test_ids = sorted(load_split(workdir).test)

    def _summarize(pair_id: str) -> dict:
        sentences = pairs[pair_id].transcript.sentences
        X, nu = document_inputs(pair_id, sentences, encoder)
        chosen = summarize_document(X, nu, sentences, params, word_budget)
        return {
            "pair_id": pair_id,
            "sentence_indices": chosen,
            "summary_text": "\n".join(sentences[i].text for i in chosen),
        }

    records = parallel_map(_summarize, test_ids, threads)
    return store.write_records(workdir / store.EXTRACTIVE_FILE, "predictions", records, config_hash)
