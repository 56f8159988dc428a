"""Step 1 – Ingest and clean raw transcripts and summary articles.

Standalone: python main.py ingest --transcripts PATH --articles PATH
Module:     from corpus import clean_transcript, clean_summary, run_ingest
"""

from __future__ import annotations

import logging
import re
from datetime import date
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

import store
from text_core import Sentence, split_sentences

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Configuration constants (adjust as needed)
# ---------------------------------------------------------------------------

OPERATOR_ROLES: frozenset[str] = frozenset({"operator", "moderator"})
REFINITIV_PHRASE: str = "refinitiv ibes data"
REFINITIV_WINDOW: int = 4                  # trailing tokens searched for the phrase
MAX_POST_DELAY_DAYS: int = 1               # article may follow the call by at most this

# ---------------------------------------------------------------------------
# Pydantic models
# ---------------------------------------------------------------------------


class RawBlock(BaseModel):
    """One speaker turn as it arrives in the raw transcript record."""
    model_config = ConfigDict(strict=False)

    speaker_role: str
    text: str
    heading: str | None = None
    section: str | None = None


class RawTranscript(BaseModel):
    """Structural validation only: one line of the raw transcripts file."""
    model_config = ConfigDict(strict=False)

    source_id: str
    company_code: str
    event_date: date
    blocks: list[RawBlock]

    @field_validator("company_code")
    @classmethod
    def _upper_code(cls, v: str) -> str:
        return v.strip().upper()


class RawArticle(BaseModel):
    """Structural validation only: one line of the raw articles file."""
    model_config = ConfigDict(strict=False)

    source_id: str
    company_code: str
    post_date: date
    body: str

    @field_validator("company_code")
    @classmethod
    def _upper_code(cls, v: str) -> str:
        return v.strip().upper()


class Transcript(BaseModel):
    """Prepared remarks of one call, sentence split."""
    company_code: str
    event_date: date
    sentences: list[Sentence]
    source_id: str


class SummaryArticle(BaseModel):
    company_code: str
    post_date: date
    bullets: list[Sentence]
    source_id: str


class Rejected(BaseModel):
    source_id: str
    reason: Literal["NoPreparedRemarks"]


class DocumentSummaryPair(BaseModel):
    pair_id: str
    transcript: Transcript
    summary: SummaryArticle
    merged_from: list[str]


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

_BULLET_MARKER = re.compile(r"^\s*(?:[*\-•]|\d+[.)])\s+")


def _is_operator(block: RawBlock) -> bool:
    return block.speaker_role.strip().lower() in OPERATOR_ROLES


def _is_qa_heading(block: RawBlock) -> bool:
    for label in (block.heading, block.section):
        if label:
            lowered = label.lower()
            if ("question" in lowered and "answer" in lowered) or lowered.replace(" ", "") in {"q&a", "qa"}:
                return True
    return False


def _qa_boundary(blocks: list[RawBlock]) -> int:
    """Index of the first Q&A block, or len(blocks) when there is none.

    A block opens the Q&A when its heading/section names questions and
    answers, or when it is an operator turn announcing questions after the
    prepared remarks have started.
    """
    remarks_started = False
    for i, block in enumerate(blocks):
        if _is_qa_heading(block):
            return i
        if _is_operator(block):
            if remarks_started and "question" in block.text.lower():
                return i
        else:
            remarks_started = True
    return len(blocks)


def _reindex(sentences: list[Sentence]) -> list[Sentence]:
    return [s.model_copy(update={"index": i}) for i, s in enumerate(sentences)]


# ---------------------------------------------------------------------------
# Core cleaning logic
# ---------------------------------------------------------------------------


def clean_transcript(raw: RawTranscript) -> Transcript | Rejected:
    """Keep the prepared remarks: drop the operator intro and everything from
    the Q&A marker on. Calls that open with Q&A are rejected."""
    prepared = raw.blocks[: _qa_boundary(raw.blocks)]
    first_speaker = next((i for i, b in enumerate(prepared) if not _is_operator(b)), None)
    if first_speaker is None:
        logger.warning("ingest: %s has no prepared remarks. Rejected.", raw.source_id)
        return Rejected(source_id=raw.source_id, reason="NoPreparedRemarks")

    sentences: list[Sentence] = []
    for block in prepared[first_speaker:]:
        sentences.extend(split_sentences(block.text))
    if not sentences:
        logger.warning("ingest: %s prepared remarks hold no sentences. Rejected.", raw.source_id)
        return Rejected(source_id=raw.source_id, reason="NoPreparedRemarks")

    return Transcript(
        company_code=raw.company_code,
        event_date=raw.event_date,
        sentences=_reindex(sentences),
        source_id=raw.source_id,
    )


def _is_refinitiv_sentence(sentence: Sentence) -> bool:
    tail = " ".join(sentence.tokens[-REFINITIV_WINDOW:])
    return REFINITIV_PHRASE in tail


def clean_summary(raw: RawArticle) -> SummaryArticle:
    """Split the article body into bullets, drop analyst-estimate sentences
    and exact duplicates (first occurrence kept)."""
    candidates: list[Sentence] = []
    for line in raw.body.splitlines():
        line = _BULLET_MARKER.sub("", line)
        if line.strip():
            candidates.extend(split_sentences(line))

    bullets: list[Sentence] = []
    seen: set[str] = set()
    for sentence in candidates:
        if _is_refinitiv_sentence(sentence):
            logger.debug("ingest: %s dropped estimate sentence %r", raw.source_id, sentence.text)
            continue
        if sentence.text in seen:
            logger.info("ingest: %s deduped bullet %r", raw.source_id, sentence.text)
            continue
        seen.add(sentence.text)
        bullets.append(sentence)

    if not bullets:
        logger.warning("ingest: %s has no bullets left after cleaning", raw.source_id)
    return SummaryArticle(
        company_code=raw.company_code,
        post_date=raw.post_date,
        bullets=_reindex(bullets),
        source_id=raw.source_id,
    )


def check_pair_invariants(pair: DocumentSummaryPair, article_dates: dict[str, date] | None = None) -> list[str]:
    """Independent re-check of a pair; returns flags, empty when valid.

    ``article_dates`` maps merged article ids to their post dates; without it
    only the merged summary's own date is checked.
    """
    flags: list[str] = []
    t, s = pair.transcript, pair.summary
    if t.company_code != s.company_code:
        flags.append(f"company_code_mismatch: transcript={t.company_code} summary={s.company_code}")
    dates = [article_dates[a] for a in pair.merged_from if a in (article_dates or {})] or [s.post_date]
    for d in dates:
        delay = (d - t.event_date).days
        if not 0 <= delay <= MAX_POST_DELAY_DAYS:
            flags.append(f"date_window_violation: delay={delay}d")
    if not t.sentences:
        flags.append("empty_transcript")
    if not s.bullets:
        flags.append("empty_summary")
    return flags


# ---------------------------------------------------------------------------
# Raw input parsing
# ---------------------------------------------------------------------------


def _parse_raw[M: BaseModel](path: str | Path, model: type[M]) -> list[M]:
    parsed: list[M] = []
    for line_number, record in store.iter_raw_records(path):
        try:
            parsed.append(model.model_validate(record))
        except ValidationError as e:
            logger.warning(
                "ingest: %s line %d: structural validation failed (%s). Dropped.",
                path, line_number, e.errors()[0]["msg"],
            )
    return parsed


def load_raw_transcripts(path: str | Path) -> list[RawTranscript]:
    return _parse_raw(path, RawTranscript)


def load_raw_articles(path: str | Path) -> list[RawArticle]:
    return _parse_raw(path, RawArticle)


def load_transcripts(workdir: str | Path) -> list[Transcript]:
    _, records = store.read_records(Path(workdir) / store.TRANSCRIPTS_FILE, "transcripts")
    return [Transcript.model_validate(r) for r in records]


def load_articles(workdir: str | Path) -> list[SummaryArticle]:
    _, records = store.read_records(Path(workdir) / store.ARTICLES_FILE, "articles")
    return [SummaryArticle.model_validate(r) for r in records]


# ---------------------------------------------------------------------------
# Public entry-point
# ---------------------------------------------------------------------------


def run_ingest(
    transcripts_path: str | Path,
    articles_path: str | Path,
    workdir: str | Path,
    config_hash: str,
    threads: int = 1,
) -> dict[str, int]:
    """Clean both raw inputs and write transcripts.jsonl / articles.jsonl.

    Returns counts for the run manifest.
    """
    from parallel import parallel_map

    raw_transcripts = load_raw_transcripts(transcripts_path)
    raw_articles = load_raw_articles(articles_path)
    logger.info("ingest: %d raw transcripts, %d raw articles", len(raw_transcripts), len(raw_articles))

    cleaned = parallel_map(clean_transcript, raw_transcripts, threads)
    transcripts = [c for c in cleaned if isinstance(c, Transcript)]
    rejected = len(cleaned) - len(transcripts)
    articles = parallel_map(clean_summary, raw_articles, threads)

    workdir = Path(workdir)
    store.write_records(workdir / store.TRANSCRIPTS_FILE, "transcripts", transcripts, config_hash)
    store.write_records(workdir / store.ARTICLES_FILE, "articles", articles, config_hash)
    logger.info("ingest: %d transcripts kept, %d rejected", len(transcripts), rejected)
    return {
        "transcripts_read": len(raw_transcripts),
        "transcripts_kept": len(transcripts),
        "transcripts_rejected": rejected,
        "articles_read": len(raw_articles),
        "articles_empty": sum(1 for a in articles if not a.bullets),
    }
