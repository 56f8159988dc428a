"""Shared fixtures for pipeline tests."""

import shutil
import sys
from datetime import date
from pathlib import Path

import pytest

# Ensure repo root is on sys.path so imports like `import text_core` work
REPO_ROOT = Path(__file__).resolve().parent.parent
if str(REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(REPO_ROOT))

from corpus import DocumentSummaryPair, SummaryArticle, Transcript  # noqa: E402
from text_core import make_sentence, split_sentences  # noqa: E402

FIXTURES_DIR = REPO_ROOT / "fixtures"

FLEETCOR_REMARKS = (
    "Good afternoon everyone. "
    "In the second quarter, our revenue rose by 27 percent to $667 million. "
    "Adjusted net income per diluted share was $3.35, up 31% from last year. "
    "We now expect full year revenue of $2.74 billion to $2.79 billion. "
    "Fuel price and fuel spread were a modest tailwind. "
    "FleetCor Inc. remains committed to disciplined capital allocation."
)

FLEETCOR_BULLETS = [
    "Q2 revenue rose 27 percent to $667 million.",
    "Q2 adjusted earnings per share $3.35.",
    "Sees FY 2021 revenue $2.74 billion to $2.79 billion.",
]


@pytest.fixture
def sample_sentences():
    """Five short transcript sentences, two carrying numerals."""
    return split_sentences(
        "Revenue was $2.74 billion. Margins grew. Thank you all for joining. "
        "Customer demand remained strong across segments. Operating cash flow reached $356 million."
    )


@pytest.fixture
def fleetcor_pair() -> DocumentSummaryPair:
    """A FleetCor-style call paired with a three-bullet summary."""
    transcript = Transcript(
        company_code="FLT",
        event_date=date(2021, 8, 5),
        sentences=split_sentences(FLEETCOR_REMARKS),
        source_id="flt-2021-q2",
    )
    summary = SummaryArticle(
        company_code="FLT",
        post_date=date(2021, 8, 5),
        bullets=[make_sentence(text, i) for i, text in enumerate(FLEETCOR_BULLETS)],
        source_id="r-flt-1",
    )
    return DocumentSummaryPair(pair_id="flt-2021-q2", transcript=transcript, summary=summary, merged_from=["r-flt-1"])


def make_pair(pair_id: str, doc_text: str, bullets: list[str], code: str = "TST") -> DocumentSummaryPair:
    """Build a pair from raw remark text and bullet strings."""
    transcript = Transcript(
        company_code=code, event_date=date(2021, 1, 1), sentences=split_sentences(doc_text), source_id=pair_id,
    )
    summary = SummaryArticle(
        company_code=code,
        post_date=date(2021, 1, 1),
        bullets=[make_sentence(text, i) for i, text in enumerate(bullets)],
        source_id=f"r-{pair_id}",
    )
    return DocumentSummaryPair(pair_id=pair_id, transcript=transcript, summary=summary, merged_from=[f"r-{pair_id}"])


@pytest.fixture
def synthetic_pairs() -> list[DocumentSummaryPair]:
    """Twelve pairs whose bullets copy or paraphrase planted transcript sentences."""
    pairs = []
    for k in range(12):
        doc = (
            f"Welcome to call number {k + 1}. "
            f"Revenue for the period was ${100 + k} million. "
            "Demand for our products remained healthy. "
            f"Operating margin improved to {10 + k}.5%. "
            "We thank our employees for their hard work."
        )
        bullets = [f"Revenue ${100 + k} million.", f"Operating margin {10 + k}.5%."]
        pairs.append(make_pair(f"syn-{k:02d}", doc, bullets))
    return pairs


@pytest.fixture
def tmp_pipeline(tmp_path: Path) -> dict[str, str]:
    """Return paths for a temporary pipeline layout seeded with the bundled raw inputs."""
    raw_dir = tmp_path / "raw"
    raw_dir.mkdir(parents=True, exist_ok=True)
    shutil.copy(FIXTURES_DIR / "raw_transcripts.jsonl", raw_dir / "raw_transcripts.jsonl")
    shutil.copy(FIXTURES_DIR / "raw_articles.jsonl", raw_dir / "raw_articles.jsonl")
    workdir = tmp_path / "work"
    workdir.mkdir(parents=True, exist_ok=True)
    return {
        "workdir": str(workdir),
        "transcripts": str(raw_dir / "raw_transcripts.jsonl"),
        "articles": str(raw_dir / "raw_articles.jsonl"),
    }
