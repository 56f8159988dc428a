"""Sentence-embedding providers.

Two providers answer the same ``SentenceEncoder`` protocol:

  LexicalEncoder      hashed tf-idf fitted on the corpus, optional seeded
                      random projection; saved as ``encoder.bin``
  PrecomputedEncoder  vectors supplied by an external model, looked up by
                      sentence id

Precomputed embedding files come in two layouts:

  JSONL   one ``{"sentence_id": str, "vector": [float, ...]}`` per line
  binary  b"ECTV" | uint32 version | uint32 count | uint32 dim, then per
          record: uint16 id length | utf-8 id | dim × float32, all
          little-endian

Module: from encoder import fit_lexical, LexicalEncoder, load_precomputed
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import struct
from collections import Counter
from collections.abc import Iterable
from pathlib import Path
from typing import Protocol, runtime_checkable

import numpy as np
from pydantic import BaseModel, ConfigDict

from text_core import Sentence

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Configuration constants (adjust as needed)
# ---------------------------------------------------------------------------

DEFAULT_HASH_SIZE: int = 2 ** 12
MIN_HASH_SIZE: int = 64
LEXICAL_MAGIC: bytes = b"ECTL"
PRECOMPUTED_MAGIC: bytes = b"ECTV"
BINARY_VERSION: int = 1

# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class ConfigError(ValueError):
    pass


class MissingEmbedding(KeyError):
    pass


class FormatError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Vectors
# ---------------------------------------------------------------------------


class SentenceVec(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    norm: float

    @classmethod
    def from_array(cls, values: np.ndarray) -> SentenceVec:
        values = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise FormatError("embedding holds non-finite entries")
        return cls(values=values, norm=float(np.linalg.norm(values)))

    @property
    def dimension(self) -> int:
        return int(self.values.shape[0])


def cosine(a: SentenceVec, b: SentenceVec) -> float:
    """Cosine similarity; 0.0 when either vector is zero."""
    if a.norm == 0.0 or b.norm == 0.0:
        return 0.0
    return float(np.dot(a.values, b.values) / (a.norm * b.norm))


def sentence_id(pair_id: str, part: str, index: int) -> str:
    """'<pair_id>/doc/<i>' for transcript sentences, '<pair_id>/summary/<j>' for bullets."""
    return f"{pair_id}/{part}/{index}"


@runtime_checkable
class SentenceEncoder(Protocol):
    @property
    def dimension(self) -> int: ...

    def encode(self, sentence: Sentence, sentence_id: str | None = None) -> SentenceVec: ...


def encode_all(
    encoder: SentenceEncoder,
    sentences: Iterable[Sentence],
    pair_id: str,
    part: str = "doc",
) -> list[SentenceVec]:
    return [encoder.encode(s, sentence_id(pair_id, part, s.index)) for s in sentences]


# ---------------------------------------------------------------------------
# Hashed tf-idf model
# ---------------------------------------------------------------------------


def bucket(token: str, hash_size: int) -> int:
    """Fixed, seedless token hash; stable across processes and platforms."""
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % hash_size


class LexicalModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    hash_size: int
    idf: np.ndarray                               # (hash_size,) float64
    projection: np.ndarray | None = None          # (dim, hash_size) float64
    corpus_doc_count: int

    @property
    def dimension(self) -> int:
        return self.hash_size if self.projection is None else int(self.projection.shape[0])

    def to_bytes(self) -> bytes:
        proj_dim = 0 if self.projection is None else int(self.projection.shape[0])
        header = struct.pack(
            "<4sIIIQ", LEXICAL_MAGIC, BINARY_VERSION, self.hash_size, proj_dim, self.corpus_doc_count,
        )
        payload = self.idf.astype("<f8").tobytes()
        if self.projection is not None:
            payload += self.projection.astype("<f8").tobytes()
        return header + payload

    @classmethod
    def from_bytes(cls, data: bytes) -> LexicalModel:
        head = struct.calcsize("<4sIIIQ")
        if len(data) < head:
            raise FormatError("lexical model file is truncated")
        magic, version, hash_size, proj_dim, n_docs = struct.unpack_from("<4sIIIQ", data)
        if magic != LEXICAL_MAGIC or version != BINARY_VERSION:
            raise FormatError(f"not a lexical model file (magic={magic!r}, version={version})")
        expected = head + 8 * hash_size * (1 + proj_dim)
        if len(data) != expected:
            raise FormatError(f"lexical model file has {len(data)} bytes, expected {expected}")
        idf = np.frombuffer(data, dtype="<f8", count=hash_size, offset=head).astype(np.float64)
        projection = None
        if proj_dim:
            projection = np.frombuffer(
                data, dtype="<f8", count=proj_dim * hash_size, offset=head + 8 * hash_size,
            ).astype(np.float64).reshape(proj_dim, hash_size)
        return cls(hash_size=hash_size, idf=idf, projection=projection, corpus_doc_count=n_docs)

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.to_bytes())
        logger.info("encoder: wrote %s (H=%d, D=%d)", path, self.hash_size, self.dimension)

    @classmethod
    def load(cls, path: str | Path) -> LexicalModel:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"encoder model not found: {path}")
        return cls.from_bytes(path.read_bytes())


def fit_lexical(
    corpus: Iterable[list[str]],
    hash_size: int = DEFAULT_HASH_SIZE,
    projection_dim: int | None = None,
    seed: int = 0,
) -> LexicalModel:
    """Fit bucket idf over a corpus of token lists (one per sentence).

    idf(bucket) = ln(1 + N / (1 + df)). With ``projection_dim`` set, a seeded
    Gaussian map H→D is drawn once and stored with the model.
    """
    if hash_size < MIN_HASH_SIZE:
        raise ConfigError(f"hash size must be at least {MIN_HASH_SIZE}, got {hash_size}")
    df = np.zeros(hash_size, dtype=np.int64)
    n_docs = 0
    for tokens in corpus:
        n_docs += 1
        for b in {bucket(t, hash_size) for t in tokens}:
            df[b] += 1
    if n_docs == 0:
        raise ConfigError("cannot fit the lexical encoder on an empty corpus")

    idf = np.log1p(n_docs / (1.0 + df))
    projection = None
    if projection_dim is not None:
        rng = np.random.default_rng(seed)
        projection = rng.standard_normal((projection_dim, hash_size)) / math.sqrt(projection_dim)
    logger.info("encoder: fitted on %d sentences, %d buckets in use", n_docs, int(np.count_nonzero(df)))
    return LexicalModel(hash_size=hash_size, idf=idf, projection=projection, corpus_doc_count=n_docs)


def encode(sentence: Sentence, model: LexicalModel) -> SentenceVec:
    """tf-idf weighted bucket counts, L2-normalized; empty sentences give the zero vector."""
    weights = np.zeros(model.hash_size, dtype=np.float64)
    for b, count in Counter(bucket(t, model.hash_size) for t in sentence.tokens).items():
        weights[b] = count * model.idf[b]
    if model.projection is not None:
        weights = model.projection @ weights
    norm = float(np.linalg.norm(weights))
    if norm > 0.0:
        weights = weights / norm
    return SentenceVec.from_array(weights)


class LexicalEncoder:
    """Thread-safe: the fitted model is never mutated."""

    def __init__(self, model: LexicalModel) -> None:
        self.model = model

    @property
    def dimension(self) -> int:
        return self.model.dimension

    def encode(self, sentence: Sentence, sentence_id: str | None = None) -> SentenceVec:
        return encode(sentence, self.model)


# ---------------------------------------------------------------------------
# Precomputed embeddings
# ---------------------------------------------------------------------------


class PrecomputedEncoder:
    def __init__(self, vectors: dict[str, SentenceVec], dimension: int) -> None:
        self._vectors = vectors
        self._dimension = dimension

    @property
    def dimension(self) -> int:
        return self._dimension

    def __len__(self) -> int:
        return len(self._vectors)

    def encode(self, sentence: Sentence, sentence_id: str | None = None) -> SentenceVec:
        if sentence_id is None or sentence_id not in self._vectors:
            raise MissingEmbedding(sentence_id)
        return self._vectors[sentence_id]


def _build_precomputed(rows: Iterable[tuple[str, np.ndarray]], path: Path) -> PrecomputedEncoder:
    vectors: dict[str, SentenceVec] = {}
    dims: set[int] = set()
    for key, values in rows:
        if values.ndim != 1:
            raise FormatError(f"{path}: vector for {key} is not one-dimensional")
        dims.add(int(values.shape[0]))
        if len(dims) > 1:
            raise FormatError(f"{path}: ragged embedding dimensions {sorted(dims)}")
        vectors[key] = SentenceVec.from_array(values)
    if not vectors:
        raise FormatError(f"{path}: no embeddings")
    return PrecomputedEncoder(vectors, dims.pop())


def _read_binary(data: bytes, path: Path) -> Iterable[tuple[str, np.ndarray]]:
    head = struct.calcsize("<4sIII")
    if len(data) < head:
        raise FormatError(f"{path}: truncated header")
    _, version, count, dim = struct.unpack_from("<4sIII", data)
    if version != BINARY_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    offset = head
    try:
        for _ in range(count):
            (id_len,) = struct.unpack_from("<H", data, offset)
            offset += 2
            key = data[offset:offset + id_len].decode("utf-8")
            offset += id_len
            values = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).astype(np.float64)
            offset += 4 * dim
            yield key, values
    except (struct.error, ValueError) as e:
        raise FormatError(f"{path}: truncated record ({e})") from e
    if offset != len(data):
        raise FormatError(f"{path}: {len(data) - offset} trailing bytes")


def _read_jsonl(text: str, path: Path) -> Iterable[tuple[str, np.ndarray]]:
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            yield str(record["sentence_id"]), np.asarray(record["vector"], dtype=np.float64)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise FormatError(f"{path} line {line_number}: {e}") from e


def load_precomputed(path: str | Path) -> PrecomputedEncoder:
    """Load externally computed sentence vectors (JSONL or ECTV binary)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"embedding file not found: {path}")
    data = path.read_bytes()
    if data[:4] == PRECOMPUTED_MAGIC:
        provider = _build_precomputed(_read_binary(data, path), path)
    else:
        provider = _build_precomputed(_read_jsonl(data.decode("utf-8"), path), path)
    logger.info("encoder: loaded %d precomputed vectors (D=%d) from %s", len(provider), provider.dimension, path)
    return provider


def write_precomputed_binary(path: str | Path, vectors: dict[str, np.ndarray]) -> int:
    """Write the ECTV binary layout; returns the record count."""
    dims = {int(np.asarray(v).shape[0]) for v in vectors.values()}
    if len(dims) != 1:
        raise FormatError(f"cannot write ragged embedding dimensions {sorted(dims)}")
    dim = dims.pop()
    chunks = [struct.pack("<4sIII", PRECOMPUTED_MAGIC, BINARY_VERSION, len(vectors), dim)]
    for key in sorted(vectors):
        encoded = key.encode("utf-8")
        chunks.append(struct.pack("<H", len(encoded)) + encoded)
        chunks.append(np.asarray(vectors[key], dtype="<f4").tobytes())
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(b"".join(chunks))
    return len(vectors)


# ---------------------------------------------------------------------------
# Provider selection
# ---------------------------------------------------------------------------


def load_encoder(choice: str, workdir: str | Path) -> SentenceEncoder:
    """Resolve an encoder choice: 'lexical' reads <workdir>/encoder.bin,
    'precomputed:<path>' loads an external embedding file."""
    import store

    if choice == "lexical":
        return LexicalEncoder(LexicalModel.load(Path(workdir) / store.ENCODER_FILE))
    if choice.startswith("precomputed:"):
        return load_precomputed(choice.removeprefix("precomputed:"))
    raise ConfigError(f"unknown encoder choice '{choice}'")
