"""Reference summarizers: LexRank, lead, and the label oracle.

All three return verbatim transcript sentences chosen with the same budgeted
greedy rule as the extractor.

Standalone: python main.py baseline --method {lexrank,lead,oracle}
Module:     from baselines import lexrank, lead, ext_oracle
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict

import store
from corpus import DocumentSummaryPair
from encoder import SentenceEncoder, SentenceVec, encode_all
from extractor import WORD_BUDGET, select
from text_core import Sentence

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Configuration constants (adjust as needed)
# ---------------------------------------------------------------------------

LEXRANK_THRESHOLD: float = 0.1
LEXRANK_DAMPING: float = 0.85
LEXRANK_TOLERANCE: float = 1e-10
LEXRANK_MAX_ITER: int = 200
METHODS: tuple[str, ...] = ("lexrank", "lead", "oracle")


class SimilarityGraph(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    weights: np.ndarray                           # thresholded cosine, zero diagonal
    transition: np.ndarray                        # row-stochastic


# ---------------------------------------------------------------------------
# LexRank
# ---------------------------------------------------------------------------


def cosine_matrix(vectors: list[SentenceVec]) -> np.ndarray:
    V = np.stack([v.values for v in vectors])
    norms = np.array([v.norm for v in vectors])
    safe = np.where(norms > 0.0, norms, 1.0)
    unit = V / safe[:, None]
    return unit @ unit.T


def build_graph(similarity: np.ndarray, threshold: float = LEXRANK_THRESHOLD) -> SimilarityGraph:
    """Keep edges with similarity ≥ threshold (no self-loops); rows with no
    edge become uniform."""
    n = similarity.shape[0]
    weights = np.where(similarity >= threshold, similarity, 0.0)
    np.fill_diagonal(weights, 0.0)
    weights = np.clip(weights, 0.0, None)
    row_sums = weights.sum(axis=1)
    transition = np.empty_like(weights)
    for i in range(n):
        transition[i] = weights[i] / row_sums[i] if row_sums[i] > 0.0 else np.full(n, 1.0 / n)
    return SimilarityGraph(weights=weights, transition=transition)


def stationary_scores(
    similarity: np.ndarray,
    threshold: float = LEXRANK_THRESHOLD,
    damping: float = LEXRANK_DAMPING,
) -> np.ndarray:
    """Power iteration for p = (1 - d)/N + d · Mᵀp, starting from uniform."""
    graph = build_graph(similarity, threshold)
    n = similarity.shape[0]
    p = np.full(n, 1.0 / n)
    for _ in range(LEXRANK_MAX_ITER):
        nxt = (1.0 - damping) / n + damping * (graph.transition.T @ p)
        delta = float(np.max(np.abs(nxt - p)))
        p = nxt
        if delta < LEXRANK_TOLERANCE:
            break
    return p


def lexrank(
    doc: list[Sentence],
    encoder: SentenceEncoder,
    word_budget: int = WORD_BUDGET,
    pair_id: str = "",
) -> list[int]:
    if not doc:
        raise ValueError("lexrank needs a nonempty document")
    if len(doc) == 1:
        return [0]
    scores = stationary_scores(cosine_matrix(encode_all(encoder, doc, pair_id, "doc")))
    return select(scores, doc, word_budget)


# ---------------------------------------------------------------------------
# Lead and oracle
# ---------------------------------------------------------------------------


def lead(doc: list[Sentence], word_budget: int = WORD_BUDGET) -> list[int]:
    if not doc:
        raise ValueError("lead needs a nonempty document")
    return select([-float(i) for i in range(len(doc))], doc, word_budget)


def ext_oracle(pair: DocumentSummaryPair, encoder: SentenceEncoder | None = None, labelset=None) -> list[int]:
    """The label-positive sentences, in document order."""
    if labelset is None:
        from labels import build_labels

        if encoder is None:
            raise ValueError("ext_oracle needs an encoder when no labels are given")
        labelset = build_labels(pair, encoder)
    return labelset.positives()


# ---------------------------------------------------------------------------
# Public entry-point
# ---------------------------------------------------------------------------


def baseline_file(method: str) -> str:
    return f"baseline_{method}.jsonl"


def run_baseline(
    workdir: str | Path,
    config_hash: str,
    method: str,
    encoder_choice: str = "lexical",
    word_budget: int = WORD_BUDGET,
    threads: int = 1,
) -> int:
    """Summarize the test split with one baseline; returns the record count."""
    from encoder import load_encoder
    from labels import load_labels
    from pairing import load_pairs, load_split
    from parallel import parallel_map

    if method not in METHODS:
        raise ValueError(f"unknown baseline '{method}', expected one of {', '.join(METHODS)}")
    workdir = Path(workdir)
    pairs = {p.pair_id: p for p in load_pairs(workdir)}
    test_ids = sorted(load_split(workdir).test)
    encoder = load_encoder(encoder_choice, workdir) if method == "lexrank" else None
    labelsets = load_labels(workdir) if method == "oracle" else {}

    def _one(pair_id: str) -> dict | None:
        pair = pairs[pair_id]
        doc = pair.transcript.sentences
        if method == "lexrank":
            chosen = lexrank(doc, encoder, word_budget, pair_id)
        elif method == "lead":
            chosen = lead(doc, word_budget)
        else:
            if pair_id not in labelsets:
                logger.warning("baseline: %s has no labels. Skipped.", pair_id)
                return None
            chosen = ext_oracle(pair, labelset=labelsets[pair_id])
        return {
            "pair_id": pair_id,
            "sentence_indices": chosen,
            "summary_text": "\n".join(doc[i].text for i in chosen),
        }

    records = [r for r in parallel_map(_one, test_ids, threads) if r is not None]
    count = store.write_records(workdir / baseline_file(method), "predictions", records, config_hash)
    logger.info("baseline: %s summarized %d documents", method, count)
    return count
