"""Corpus statistics: extractive fragments, coverage, density, compression,
and where salient summary words fall in the source document.

Standalone: python main.py stats
Module:     from stats import extract_fragments, coverage, density
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from pathlib import Path

from pydantic import BaseModel

import lexicon
import store
from corpus import DocumentSummaryPair
from parallel import parallel_map

logger = logging.getLogger(__name__)

N_SEGMENTS: int = 4

# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------


class Fragment(BaseModel):
    doc_start: int
    summary_start: int
    length: int


class FragmentSet(BaseModel):
    fragments: list[Fragment]
    summary_len: int
    doc_len: int


class PairStats(BaseModel):
    pair_id: str
    doc_tokens: int
    summary_tokens: int
    doc_sentences: int
    summary_sentences: int
    coverage: float | None
    density: float | None
    compression: float | None
    quartile_shares: list[float] | None


class CorpusStats(BaseModel):
    n_docs: int
    coverage: float
    density: float
    compression: float
    mean_doc_tokens: float
    mean_summary_tokens: float
    mean_doc_sentences: float
    mean_summary_sentences: float
    quartile_shares: list[float]
    n_undefined_fragments: int
    n_undefined_compression: int
    n_undefined_quartiles: int


class UndefinedStatistic(ValueError):
    """The statistic has no value for this input (empty summary, no salient words)."""


# ---------------------------------------------------------------------------
# Fragments
# ---------------------------------------------------------------------------


def extract_fragments(doc_tokens: list[str], summary_tokens: list[str]) -> FragmentSet:
    """Greedy left-to-right fragment extraction over the summary.

    At each summary position take the longest run that also occurs somewhere
    in the document (earliest document start on ties) and jump past it; a
    token with no document occurrence is skipped as unmatched.
    """
    positions: dict[str, list[int]] = defaultdict(list)
    for j, token in enumerate(doc_tokens):
        positions[token].append(j)

    fragments: list[Fragment] = []
    m, n = len(summary_tokens), len(doc_tokens)
    i = 0
    while i < m:
        best_len, best_start = 0, -1
        for j in positions.get(summary_tokens[i], ()):
            length = 0
            while i + length < m and j + length < n and summary_tokens[i + length] == doc_tokens[j + length]:
                length += 1
            if length > best_len:
                best_len, best_start = length, j
        if best_len >= 1:
            fragments.append(Fragment(doc_start=best_start, summary_start=i, length=best_len))
            i += best_len
        else:
            i += 1
    return FragmentSet(fragments=fragments, summary_len=m, doc_len=n)


def coverage(fs: FragmentSet) -> float:
    if fs.summary_len == 0:
        raise UndefinedStatistic("coverage of an empty summary")
    return sum(f.length for f in fs.fragments) / fs.summary_len


def density(fs: FragmentSet) -> float:
    if fs.summary_len == 0:
        raise UndefinedStatistic("density of an empty summary")
    return sum(f.length ** 2 for f in fs.fragments) / fs.summary_len


# ---------------------------------------------------------------------------
# Compression and salient-unigram distribution
# ---------------------------------------------------------------------------


def compression(token_counts: list[tuple[int, int]]) -> float:
    """Mean of per-pair document/summary token ratios.

    ``token_counts`` holds (doc_tokens, summary_tokens) per pair; pairs with
    an empty summary are left out with a warning.
    """
    ratios: list[float] = []
    for doc_len, summary_len in token_counts:
        if summary_len == 0:
            logger.warning("stats: pair with zero-token summary excluded from compression")
            continue
        ratios.append(doc_len / summary_len)
    if not ratios:
        raise UndefinedStatistic("no pair with a nonempty summary")
    return math.fsum(ratios) / len(ratios)


def segment_bounds(n_tokens: int, n_segments: int = N_SEGMENTS) -> list[tuple[int, int]]:
    """Contiguous near-equal segments; remainder tokens go to the earliest ones."""
    base, extra = divmod(n_tokens, n_segments)
    bounds: list[tuple[int, int]] = []
    start = 0
    for k in range(n_segments):
        size = base + (1 if k < extra else 0)
        bounds.append((start, start + size))
        start += size
    return bounds


def salient_unigram_distribution(doc_tokens: list[str], summary_tokens: list[str]) -> tuple[float, ...]:
    """Share of salient-word occurrences falling in each document quarter.

    Salient words are the summary's token types minus stopwords; every
    occurrence in the document counts, so repeated words weigh more.
    """
    if not doc_tokens:
        raise UndefinedStatistic("empty document")
    salient = {t for t in summary_tokens if not lexicon.is_stopword(t)}
    counts = [
        sum(1 for t in doc_tokens[start:end] if t in salient)
        for start, end in segment_bounds(len(doc_tokens))
    ]
    total = sum(counts)
    if total == 0:
        raise UndefinedStatistic("no salient unigram occurs in the document")
    return tuple(c / total for c in counts)


# ---------------------------------------------------------------------------
# Per-pair and corpus aggregation
# ---------------------------------------------------------------------------


def pair_tokens(pair: DocumentSummaryPair) -> tuple[list[str], list[str]]:
    doc = [t for s in pair.transcript.sentences for t in s.tokens]
    summary = [t for s in pair.summary.bullets for t in s.tokens]
    return doc, summary


def pair_statistics(pair: DocumentSummaryPair) -> PairStats:
    doc, summary = pair_tokens(pair)
    fs = extract_fragments(doc, summary)
    try:
        cov, dens = coverage(fs), density(fs)
    except UndefinedStatistic:
        cov = dens = None
    try:
        shares: list[float] | None = list(salient_unigram_distribution(doc, summary))
    except UndefinedStatistic:
        shares = None
    return PairStats(
        pair_id=pair.pair_id,
        doc_tokens=len(doc),
        summary_tokens=len(summary),
        doc_sentences=len(pair.transcript.sentences),
        summary_sentences=len(pair.summary.bullets),
        coverage=cov,
        density=dens,
        compression=len(doc) / len(summary) if summary else None,
        quartile_shares=shares,
    )


def _mean(values: list[float]) -> float:
    return math.fsum(values) / len(values) if values else 0.0


def corpus_statistics(per_pair: list[PairStats]) -> CorpusStats:
    defined = [p for p in per_pair if p.coverage is not None]
    with_shares = [p for p in per_pair if p.quartile_shares is not None]
    with_summary = [p for p in per_pair if p.summary_tokens > 0]
    shares = [_mean([p.quartile_shares[k] for p in with_shares]) for k in range(N_SEGMENTS)]
    return CorpusStats(
        n_docs=len(per_pair),
        coverage=_mean([p.coverage for p in defined]),
        density=_mean([p.density for p in defined]),
        compression=compression([(p.doc_tokens, p.summary_tokens) for p in with_summary]) if with_summary else 0.0,
        mean_doc_tokens=_mean([p.doc_tokens for p in per_pair]),
        mean_summary_tokens=_mean([p.summary_tokens for p in per_pair]),
        mean_doc_sentences=_mean([p.doc_sentences for p in per_pair]),
        mean_summary_sentences=_mean([p.summary_sentences for p in per_pair]),
        quartile_shares=shares,
        n_undefined_fragments=len(per_pair) - len(defined),
        n_undefined_compression=len(per_pair) - len(with_summary),
        n_undefined_quartiles=len(per_pair) - len(with_shares),
    )


# ---------------------------------------------------------------------------
# Public entry-point
# ---------------------------------------------------------------------------


def run_stats(
    workdir: str | Path,
    config_hash: str,
    threads: int = 1,
    xlsx: bool = False,
) -> CorpusStats:
    from pairing import load_pairs
    import report

    pairs = load_pairs(workdir)
    per_pair = parallel_map(pair_statistics, pairs, threads)
    stats = corpus_statistics(per_pair)
    logger.info(
        "stats: %d docs, coverage %.3f, density %.3f, compression %.2f",
        stats.n_docs, stats.coverage, stats.density, stats.compression,
    )

    workdir = Path(workdir)
    records = [{"stat": key, "value": value} for key, value in stats.model_dump().items() if key != "quartile_shares"]
    records += [{"stat": f"quartile_{k + 1}_share", "value": v} for k, v in enumerate(stats.quartile_shares)]
    store.write_records(workdir / store.STATS_FILE, "stats", records, config_hash)
    store.write_text(workdir / store.STATS_TABLE_FILE, report.render_stats_table(stats))
    if xlsx:
        report.write_stats_workbook(workdir / "stats.xlsx", stats, per_pair)
    return stats
