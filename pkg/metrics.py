"""Step 7 – Score summaries: ROUGE-1/2/L F1 and numeral precision.

ROUGE runs on the shared tokenizer's output with no stemming and no stopword
removal; ROUGE-L is summary-level (one LCS over the whole text). Num-Prec is
the share of summary numerals whose canonical value occurs in the source.

Standalone: python main.py evaluate --predictions PATH [--name NAME]
Module:     from metrics import rouge_n, rouge_l, num_prec, evaluate
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from pathlib import Path

from pydantic import BaseModel

import store
from corpus import DocumentSummaryPair
from text_core import numeral_keys, tokenize

logger = logging.getLogger(__name__)

ROUGE_CONFIG: dict[str, object] = {
    "tokenizer": "shared",
    "stemming": False,
    "stopword_removal": False,
    "rouge_l": "summary-level",
}

# ---------------------------------------------------------------------------
# Models and errors
# ---------------------------------------------------------------------------


class UndefinedScore(ValueError):
    """The reference has no n-grams of the requested order."""


class NoNumerals(ValueError):
    """The summary holds no numeral, so Num-Prec has no denominator."""


class RougeScore(BaseModel):
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, match: int, n_candidate: int, n_reference: int) -> RougeScore:
        p = match / n_candidate if n_candidate else 0.0
        r = match / n_reference if n_reference else 0.0
        f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
        return cls(precision=p, recall=r, f1=f1)


class DocScore(BaseModel):
    pair_id: str
    rouge1: RougeScore | None
    rouge2: RougeScore | None
    rougeL: RougeScore | None
    num_prec: float | None
    n_numerals: int
    inconsistent_numerals: list[str]


class MetricsReport(BaseModel):
    name: str
    config: dict[str, object]
    documents: list[DocScore]
    means: dict[str, float]
    n_evaluated: int
    missing_predictions: list[str]
    unknown_predictions: list[str]
    n_undefined_rouge: int
    n_no_numerals: int


# ---------------------------------------------------------------------------
# ROUGE
# ---------------------------------------------------------------------------


def ngrams(tokens: list[str], n: int) -> Counter[tuple[str, ...]]:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: list[str], reference: list[str], n: int) -> RougeScore:
    if n not in (1, 2):
        raise ValueError(f"rouge_n supports n in {{1, 2}}, got {n}")
    ref = ngrams(reference, n)
    if not ref:
        raise UndefinedScore(f"reference has no {n}-grams")
    cand = ngrams(candidate, n)
    match = sum(min(count, ref[g]) for g, count in cand.items())
    return RougeScore.from_counts(match, sum(cand.values()), sum(ref.values()))


def lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            curr[j] = prev[j - 1] + 1 if x == y else max(prev[j], curr[j - 1])
        prev = curr
    return prev[-1]


def rouge_l(candidate: list[str], reference: list[str]) -> RougeScore:
    if not reference:
        raise UndefinedScore("empty reference")
    return RougeScore.from_counts(lcs_length(candidate, reference), len(candidate), len(reference))


# ---------------------------------------------------------------------------
# Num-Prec
# ---------------------------------------------------------------------------


def inconsistent_numerals(summary_text: str, source_text: str) -> tuple[int, list[str]]:
    """(numeral count, canonical keys absent from the source) for a summary."""
    source_keys = set(numeral_keys(source_text))
    keys = numeral_keys(summary_text)
    return len(keys), [k for k in keys if k not in source_keys]


def num_prec(summary_text: str, source_text: str) -> float:
    total, wrong = inconsistent_numerals(summary_text, source_text)
    if total == 0:
        raise NoNumerals("summary contains no numerals")
    return (total - len(wrong)) / total


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _safe(fn, *args) -> RougeScore | None:
    try:
        return fn(*args)
    except UndefinedScore:
        return None


def score_document(pair: DocumentSummaryPair, summary_text: str) -> DocScore:
    candidate = tokenize(summary_text)
    reference = [t for b in pair.summary.bullets for t in b.tokens]
    source = " ".join(s.text for s in pair.transcript.sentences)
    n_numerals, wrong = inconsistent_numerals(summary_text, source)
    return DocScore(
        pair_id=pair.pair_id,
        rouge1=_safe(rouge_n, candidate, reference, 1),
        rouge2=_safe(rouge_n, candidate, reference, 2),
        rougeL=_safe(rouge_l, candidate, reference),
        num_prec=(n_numerals - len(wrong)) / n_numerals if n_numerals else None,
        n_numerals=n_numerals,
        inconsistent_numerals=wrong,
    )


def _mean(values: list[float]) -> float:
    return math.fsum(values) / len(values) if values else 0.0


def report_config() -> dict[str, object]:
    from baselines import LEXRANK_DAMPING, LEXRANK_THRESHOLD

    return {
        "rouge": dict(ROUGE_CONFIG),
        "lexrank": {"threshold": LEXRANK_THRESHOLD, "damping": LEXRANK_DAMPING},
    }


def evaluate(
    predictions: dict[str, str],
    pairs: list[DocumentSummaryPair],
    expected_ids: list[str] | None = None,
    name: str = "system",
    threads: int = 1,
) -> MetricsReport:
    """Score predictions against the pairs' reference summaries.

    ``expected_ids`` names the documents that should have a prediction
    (default: every pair); missing ones are listed and left out of the means.
    """
    from parallel import parallel_map

    by_id = {p.pair_id: p for p in pairs}
    expected = sorted(expected_ids if expected_ids is not None else by_id)
    unknown = sorted(pid for pid in predictions if pid not in by_id)
    if unknown:
        logger.warning("evaluate: %d predictions name unknown pairs: %s", len(unknown), ", ".join(unknown))
    missing = [pid for pid in expected if pid not in predictions]
    if missing:
        logger.warning("evaluate: %d expected documents have no prediction", len(missing))
    scored_ids = [pid for pid in expected if pid in predictions and pid in by_id]

    docs = parallel_map(lambda pid: score_document(by_id[pid], predictions[pid]), scored_ids, threads)

    means: dict[str, float] = {}
    for variant in ("rouge1", "rouge2", "rougeL"):
        scores = [getattr(d, variant) for d in docs if getattr(d, variant) is not None]
        for part in ("precision", "recall", "f1"):
            means[f"{variant}_{part}"] = _mean([getattr(s, part) for s in scores])
    means["num_prec"] = _mean([d.num_prec for d in docs if d.num_prec is not None])

    report = MetricsReport(
        name=name,
        config=report_config(),
        documents=docs,
        means=means,
        n_evaluated=len(docs),
        missing_predictions=missing,
        unknown_predictions=unknown,
        n_undefined_rouge=sum(1 for d in docs if d.rouge1 is None or d.rouge2 is None or d.rougeL is None),
        n_no_numerals=sum(1 for d in docs if d.num_prec is None),
    )
    logger.info(
        "evaluate: %s: %d docs, R1 %.4f R2 %.4f RL %.4f Num-Prec %.4f",
        name, report.n_evaluated, means["rouge1_f1"], means["rouge2_f1"], means["rougeL_f1"], means["num_prec"],
    )
    return report


def compare_reports(reports: list[MetricsReport]) -> list[dict[str, object]]:
    """One row per system: ROUGE-1, ROUGE-2, ROUGE-L F1, then Num-Prec."""
    return [
        {
            "system": r.name,
            "rouge1": r.means["rouge1_f1"],
            "rouge2": r.means["rouge2_f1"],
            "rougeL": r.means["rougeL_f1"],
            "num_prec": r.means["num_prec"],
            "n_evaluated": r.n_evaluated,
        }
        for r in reports
    ]


# ---------------------------------------------------------------------------
# Predictions files
# ---------------------------------------------------------------------------


def load_predictions(path: str | Path) -> dict[str, str]:
    """{pair_id: summary_text} from a predictions file, with or without a
    provenance header line."""
    predictions: dict[str, str] = {}
    for line_number, record in store.iter_raw_records(path):
        if "pair_id" not in record:
            if "format" not in record:
                logger.warning("evaluate: %s line %d has no pair_id. Dropped.", path, line_number)
            continue
        predictions[str(record["pair_id"])] = str(record.get("summary_text", ""))
    return predictions


# ---------------------------------------------------------------------------
# Public entry-point
# ---------------------------------------------------------------------------


def run_evaluate(
    workdir: str | Path,
    config_hash: str,
    predictions_path: str | Path,
    name: str = "system",
    threads: int = 1,
    xlsx: bool = False,
) -> MetricsReport:
    """Score a predictions file against the test split; write report_<name>.*"""
    import report as report_module
    from pairing import load_pairs, load_split

    workdir = Path(workdir)
    result = evaluate(
        load_predictions(predictions_path),
        load_pairs(workdir),
        expected_ids=load_split(workdir).test,
        name=name,
        threads=threads,
    )
    report_module.write_metrics_report(workdir, result, config_hash, xlsx=xlsx)
    return result
