"""Step 4 – Oracle extractive labels and paraphrase training pairs.

Each reference bullet is aligned to the document sentences that carry all of
its numerals; a bullet without such a match falls back to the single most
similar document sentence. Aligned sentences get label 1.

Standalone: python main.py labels
Module:     from labels import build_labels, build_paraphrase_pairs
"""

from __future__ import annotations

import logging
from collections import Counter
from pathlib import Path
from typing import Literal

from pydantic import BaseModel

import store
from corpus import DocumentSummaryPair
from encoder import SentenceEncoder, SentenceVec, cosine, sentence_id
from text_core import (
    MaskedSentence,
    Sentence,
    mask_numerals,
    mask_numerals_aligned,
    numeral_keys,
    placeholder_names_in,
)

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Models and errors
# ---------------------------------------------------------------------------


class Alignment(BaseModel):
    target_index: int
    doc_indices: list[int]
    match_kind: Literal["numeric", "similarity"]


class LabelSet(BaseModel):
    pair_id: str
    labels: list[int]
    alignments: list[Alignment]

    def positives(self) -> list[int]:
        return [i for i, y in enumerate(self.labels) if y == 1]


class ParaphrasePair(BaseModel):
    pair_id: str
    source_index: int
    target_index: int
    match_kind: Literal["numeric", "similarity"]
    source: MaskedSentence
    target: MaskedSentence


class FallbackFailed(ValueError):
    """Every document sentence encodes to the zero vector."""


# ---------------------------------------------------------------------------
# Alignment rules
# ---------------------------------------------------------------------------


def numeric_match(target: Sentence, doc: list[Sentence]) -> list[int]:
    """Indices of every doc sentence whose numeral keys contain all of the
    target's keys (as multisets). Empty when the target has no numerals."""
    wanted = Counter(numeral_keys(target.text))
    if not wanted:
        return []
    matches: list[int] = []
    for i, sentence in enumerate(doc):
        have = Counter(numeral_keys(sentence.text))
        if all(have[key] >= count for key, count in wanted.items()):
            matches.append(i)
    return matches


def similarity_fallback(
    target: Sentence,
    doc: list[Sentence],
    encoder: SentenceEncoder,
    pair_id: str = "",
    doc_vecs: list[SentenceVec] | None = None,
) -> int:
    """Index of the doc sentence most cosine-similar to the target.

    Zero-vector doc sentences score -1; ties go to the smallest index.
    """
    if not doc:
        raise FallbackFailed(f"{pair_id}: empty document")
    target_vec = encoder.encode(target, sentence_id(pair_id, "summary", target.index))
    if doc_vecs is None:
        doc_vecs = [encoder.encode(s, sentence_id(pair_id, "doc", s.index)) for s in doc]
    if all(v.norm == 0.0 for v in doc_vecs):
        raise FallbackFailed(f"{pair_id}: every document sentence encodes to the zero vector")

    best_index, best_score = -1, float("-inf")
    for i, vec in enumerate(doc_vecs):
        score = -1.0 if vec.norm == 0.0 else cosine(target_vec, vec)
        if score > best_score:
            best_index, best_score = i, score
    return best_index


def build_labels(pair: DocumentSummaryPair, encoder: SentenceEncoder) -> LabelSet:
    doc = pair.transcript.sentences
    doc_vecs: list[SentenceVec] | None = None
    alignments: list[Alignment] = []
    for target in pair.summary.bullets:
        matched = numeric_match(target, doc)
        if matched:
            alignments.append(Alignment(target_index=target.index, doc_indices=matched, match_kind="numeric"))
            continue
        if doc_vecs is None:
            doc_vecs = [encoder.encode(s, sentence_id(pair.pair_id, "doc", s.index)) for s in doc]
        index = similarity_fallback(target, doc, encoder, pair.pair_id, doc_vecs)
        alignments.append(Alignment(target_index=target.index, doc_indices=[index], match_kind="similarity"))

    labels = [0] * len(doc)
    for alignment in alignments:
        for i in alignment.doc_indices:
            labels[i] = 1
    return LabelSet(pair_id=pair.pair_id, labels=labels, alignments=alignments)


def build_paraphrase_pairs(pair: DocumentSummaryPair, labelset: LabelSet) -> list[ParaphrasePair]:
    """One masked (source, target) pair per alignment edge.

    The target reuses the source's placeholder names for shared values. A
    numeric edge whose target ends up with a placeholder the source lacks is
    dropped.
    """
    doc = pair.transcript.sentences
    bullets = pair.summary.bullets
    out: list[ParaphrasePair] = []
    for alignment in labelset.alignments:
        bullet = bullets[alignment.target_index]
        for i in alignment.doc_indices:
            source = mask_numerals(doc[i])
            target = mask_numerals_aligned(bullet, source)
            if alignment.match_kind == "numeric":
                source_names = {name for name, _ in source.placeholders}
                extra = [n for n in placeholder_names_in(target.masked_text) if n not in source_names]
                if extra:
                    logger.warning(
                        "labels: %s bullet %d / sentence %d breaks placeholder containment (%s). Dropped.",
                        pair.pair_id, alignment.target_index, i, ", ".join(extra),
                    )
                    continue
            out.append(ParaphrasePair(
                pair_id=pair.pair_id,
                source_index=i,
                target_index=alignment.target_index,
                match_kind=alignment.match_kind,
                source=source,
                target=target,
            ))
    return out


# ---------------------------------------------------------------------------
# Artifact loading
# ---------------------------------------------------------------------------


def load_labels(workdir: str | Path) -> dict[str, LabelSet]:
    _, records = store.read_records(Path(workdir) / store.LABELS_FILE, "labels")
    return {r["pair_id"]: LabelSet.model_validate(r) for r in records}


def load_paraphrase_pairs(workdir: str | Path) -> list[ParaphrasePair]:
    _, records = store.read_records(Path(workdir) / store.PARAPHRASE_PAIRS_FILE, "paraphrase_pairs")
    return [ParaphrasePair.model_validate(r) for r in records]


# ---------------------------------------------------------------------------
# Public entry-point
# ---------------------------------------------------------------------------


def run_labels(
    workdir: str | Path,
    config_hash: str,
    encoder_choice: str = "lexical",
    hash_size: int | None = None,
    threads: int = 1,
) -> dict[str, int]:
    """Fit (or load) the encoder, label every pair, export paraphrase pairs.

    The lexical encoder is fitted on the train split's document and summary
    sentences and saved for the later stages.
    """
    from encoder import DEFAULT_HASH_SIZE, LexicalEncoder, fit_lexical, load_encoder
    from pairing import load_pairs, load_split
    from paraphraser import export_backend_training_set
    from parallel import parallel_map

    workdir = Path(workdir)
    pairs = load_pairs(workdir)
    split = load_split(workdir)

    if encoder_choice == "lexical":
        train_ids = set(split.train)
        corpus = [
            s.tokens
            for p in pairs if p.pair_id in train_ids
            for s in [*p.transcript.sentences, *p.summary.bullets]
        ]
        model = fit_lexical(corpus, hash_size or DEFAULT_HASH_SIZE)
        model.save(workdir / store.ENCODER_FILE)
        encoder: SentenceEncoder = LexicalEncoder(model)
    else:
        encoder = load_encoder(encoder_choice, workdir)

    def _label(pair: DocumentSummaryPair) -> LabelSet | None:
        try:
            return build_labels(pair, encoder)
        except FallbackFailed as e:
            logger.warning("labels: %s. Pair left unlabeled.", e)
            return None

    labelsets = parallel_map(_label, pairs, threads)
    labelled = [(p, ls) for p, ls in zip(pairs, labelsets) if ls is not None]
    para_pairs = [pp for p, ls in labelled for pp in build_paraphrase_pairs(p, ls)]

    store.write_records(workdir / store.LABELS_FILE, "labels", [ls for _, ls in labelled], config_hash)
    store.write_records(workdir / store.PARAPHRASE_PAIRS_FILE, "paraphrase_pairs", para_pairs, config_hash)
    train_ids = set(split.train)
    exported = export_backend_training_set(
        [pp for pp in para_pairs if pp.pair_id in train_ids], workdir / store.REWRITER_TRAIN_FILE,
    )

    kinds = Counter(a.match_kind for _, ls in labelled for a in ls.alignments)
    logger.info(
        "labels: %d pairs labelled (%d numeric, %d similarity alignments), %d paraphrase pairs",
        len(labelled), kinds["numeric"], kinds["similarity"], len(para_pairs),
    )
    return {
        "pairs_labelled": len(labelled),
        "pairs_unlabeled": len(pairs) - len(labelled),
        "numeric_alignments": kinds["numeric"],
        "similarity_alignments": kinds["similarity"],
        "paraphrase_pairs": len(para_pairs),
        "rewriter_train_records": exported,
    }
