"""Step 2 – Pair transcripts with summary articles and split the corpus.

Standalone: python main.py pair | python main.py split
Module:     from pairing import pair_documents, split_corpus
"""

from __future__ import annotations

import logging
from collections import defaultdict
from datetime import date
from pathlib import Path

import numpy as np
from pydantic import BaseModel

import store
from corpus import (
    MAX_POST_DELAY_DAYS,
    DocumentSummaryPair,
    SummaryArticle,
    Transcript,
    check_pair_invariants,
    load_articles,
    load_transcripts,
)
from text_core import Sentence

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Configuration constants (adjust as needed)
# ---------------------------------------------------------------------------

TRAIN_TENTHS: int = 7
VALIDATION_TENTHS: int = 1
MIN_SPLIT_PAIRS: int = 10

# ---------------------------------------------------------------------------
# Models and errors
# ---------------------------------------------------------------------------


class CorpusSplit(BaseModel):
    train: list[str]
    validation: list[str]
    test: list[str]
    seed: int

    def partition_lookup(self) -> dict[str, str]:
        lookup: dict[str, str] = {}
        for name in ("train", "validation", "test"):
            for pair_id in getattr(self, name):
                lookup[pair_id] = name
        return lookup


class AmbiguousEvent(ValueError):
    """Two transcripts claim the same (company_code, event_date)."""

    def __init__(self, conflicts: dict[tuple[str, date], list[str]]) -> None:
        self.conflicts = conflicts
        described = "; ".join(
            f"{code} {day.isoformat()}: {', '.join(ids)}" for (code, day), ids in sorted(conflicts.items())
        )
        super().__init__(f"duplicate earnings events: {described}")


class SplitTooSmall(ValueError):
    pass


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _dedupe_bullets(bullets: list[Sentence]) -> list[Sentence]:
    """Keep the first occurrence of each bullet text; reindex."""
    seen: set[str] = set()
    deduped: list[Sentence] = []
    for bullet in bullets:
        if bullet.text in seen:
            logger.debug("pair: deduped merged bullet %r", bullet.text)
            continue
        seen.add(bullet.text)
        deduped.append(bullet.model_copy(update={"index": len(deduped)}))
    return deduped


def _in_window(transcript: Transcript, article: SummaryArticle) -> bool:
    return 0 <= (article.post_date - transcript.event_date).days <= MAX_POST_DELAY_DAYS


def _merge(articles: list[SummaryArticle]) -> SummaryArticle:
    bullets = [b for a in articles for b in a.bullets]
    return SummaryArticle(
        company_code=articles[0].company_code,
        post_date=articles[0].post_date,
        bullets=_dedupe_bullets(bullets),
        source_id="+".join(a.source_id for a in articles),
    )


# ---------------------------------------------------------------------------
# Core logic
# ---------------------------------------------------------------------------


def pair_documents(
    transcripts: list[Transcript],
    articles: list[SummaryArticle],
    max_merge: int | None = None,
) -> list[DocumentSummaryPair]:
    """Join transcripts to same-company articles posted 0–1 days after the call.

    Several matching articles are merged into one summary, ordered by
    (post_date, source_id), each distinct bullet kept once. ``max_merge`` caps
    how many articles one transcript may absorb. Transcripts without a match
    are left out.
    """
    events: dict[tuple[str, date], list[str]] = defaultdict(list)
    for t in transcripts:
        events[(t.company_code, t.event_date)].append(t.source_id)
    conflicts = {k: sorted(ids) for k, ids in events.items() if len(ids) > 1}
    if conflicts:
        raise AmbiguousEvent(conflicts)

    by_code: dict[str, list[SummaryArticle]] = defaultdict(list)
    for a in articles:
        if a.bullets:
            by_code[a.company_code].append(a)

    pairs: list[DocumentSummaryPair] = []
    unpaired = 0
    for t in sorted(transcripts, key=lambda t: (t.company_code, t.event_date, t.source_id)):
        candidates = sorted(
            (a for a in by_code.get(t.company_code, []) if _in_window(t, a)),
            key=lambda a: (a.post_date, a.source_id),
        )
        if max_merge is not None:
            candidates = candidates[:max_merge]
        if not candidates:
            unpaired += 1
            continue
        if len(candidates) > 1:
            logger.info("pair: %s merges %d articles", t.source_id, len(candidates))
        pairs.append(DocumentSummaryPair(
            pair_id=t.source_id,
            transcript=t,
            summary=_merge(candidates),
            merged_from=[a.source_id for a in candidates],
        ))

    logger.info("pair: %d pairs built, %d transcripts unpaired", len(pairs), unpaired)
    return pairs


def split_corpus(pairs: list[DocumentSummaryPair], seed: int) -> CorpusSplit:
    """Seeded 70/10/20 split.

    Train and validation sizes are floored; the test split takes the
    remainder (2425 pairs → 1697/242/486).
    """
    n = len(pairs)
    if n < MIN_SPLIT_PAIRS:
        raise SplitTooSmall(f"need at least {MIN_SPLIT_PAIRS} pairs to split, got {n}")
    ids = sorted(p.pair_id for p in pairs)
    order = np.random.default_rng(seed).permutation(n)
    shuffled = [ids[i] for i in order]
    n_train = n * TRAIN_TENTHS // 10
    n_val = n * VALIDATION_TENTHS // 10
    return CorpusSplit(
        train=shuffled[:n_train],
        validation=shuffled[n_train:n_train + n_val],
        test=shuffled[n_train + n_val:],
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Artifact loading
# ---------------------------------------------------------------------------


def load_pairs(workdir: str | Path) -> list[DocumentSummaryPair]:
    _, records = store.read_records(Path(workdir) / store.PAIRS_FILE, "pairs")
    return [DocumentSummaryPair.model_validate(r) for r in records]


def load_split(workdir: str | Path) -> CorpusSplit:
    header, records = store.read_records(Path(workdir) / store.SPLIT_FILE, "split")
    buckets: dict[str, list[str]] = {"train": [], "validation": [], "test": []}
    seed = 0
    for r in records:
        buckets[r["partition"]].append(r["pair_id"])
        seed = r["seed"]
    return CorpusSplit(seed=seed, **buckets)


# ---------------------------------------------------------------------------
# Public entry-points
# ---------------------------------------------------------------------------


def run_pair(workdir: str | Path, config_hash: str, max_merge: int | None = None) -> dict[str, int]:
    transcripts = load_transcripts(workdir)
    articles = load_articles(workdir)
    article_dates = {a.source_id: a.post_date for a in articles}
    pairs = pair_documents(transcripts, articles, max_merge=max_merge)

    invalid = 0
    for pair in pairs:
        flags = check_pair_invariants(pair, article_dates)
        if flags:
            invalid += 1
            logger.error("pair: %s failed invariant re-check: %s", pair.pair_id, "; ".join(flags))
    if invalid:
        raise ValueError(f"{invalid} pairs failed the invariant re-check")

    store.write_records(Path(workdir) / store.PAIRS_FILE, "pairs", pairs, config_hash)
    return {
        "pairs": len(pairs),
        "unpaired_transcripts": len(transcripts) - len(pairs),
        "merged_pairs": sum(1 for p in pairs if len(p.merged_from) > 1),
    }


def run_split(workdir: str | Path, config_hash: str, seed: int) -> CorpusSplit:
    split = split_corpus(load_pairs(workdir), seed)
    records = [
        {"pair_id": pair_id, "partition": partition, "seed": seed}
        for partition in ("train", "validation", "test")
        for pair_id in getattr(split, partition)
    ]
    store.write_records(Path(workdir) / store.SPLIT_FILE, "split", records, config_hash)
    logger.info(
        "split: %d train / %d validation / %d test (seed %d)",
        len(split.train), len(split.validation), len(split.test), seed,
    )
    return split
