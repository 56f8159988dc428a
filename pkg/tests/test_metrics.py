"""Tests for metrics.py – ROUGE-1/2/L, Num-Prec, document and corpus evaluation."""

import json
import sys
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from metrics import (  # noqa: E402
    NoNumerals,
    UndefinedScore,
    compare_reports,
    evaluate,
    inconsistent_numerals,
    lcs_length,
    load_predictions,
    num_prec,
    rouge_l,
    rouge_n,
    score_document,
)
from tests.conftest import make_pair  # noqa: E402

FLEETCOR_GUIDANCE = (
    "In the second quarter, our revenue rose by 27 percent to $667 million. "
    "Adjusted net income per diluted share was $3.15. "
    "For the third quarter we expect adjusted earnings per share of $12.80 to $13.00. "
    "We now expect 2021 revenue of $2.74 billion to $2.791 billion."
)

GENERATED_BULLETS = [
    "q2 revenue rose 27 percent to $667 million.",
    "sees q3 adjusted earnings per share $12.80 to $13.90.",
    "qtrly adjusted net income per diluted share $3.15.",
    "sees fy earnings per common share to be in range of $12 - $13.00.",
    "sees 2021 revenue $2.74 billion to $2.791 billion.",
]


def _oracle_f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def _oracle_rouge_n(candidate: list[str], reference: list[str], n: int) -> tuple[float, float, float]:
    cand: dict[tuple, int] = {}
    for i in range(len(candidate) - n + 1):
        gram = tuple(candidate[i:i + n])
        cand[gram] = cand.get(gram, 0) + 1
    ref: dict[tuple, int] = {}
    for i in range(len(reference) - n + 1):
        gram = tuple(reference[i:i + n])
        ref[gram] = ref.get(gram, 0) + 1
    overlap = sum(min(c, ref.get(g, 0)) for g, c in cand.items())
    p = overlap / sum(cand.values()) if cand else 0.0
    r = overlap / sum(ref.values())
    return p, r, _oracle_f1(p, r)


def _oracle_lcs(a: list[str], b: list[str]) -> int:
    @lru_cache(maxsize=None)
    def go(i: int, j: int) -> int:
        if i == len(a) or j == len(b):
            return 0
        if a[i] == b[j]:
            return 1 + go(i + 1, j + 1)
        return max(go(i + 1, j), go(i, j + 1))

    return go(0, 0)


# ---------------------------------------------------------------------------
# ROUGE
# ---------------------------------------------------------------------------


class TestRouge:
    def test_identical_texts(self):
        tokens = "q2 revenue rose 27 percent".split()
        for score in (rouge_n(tokens, tokens, 1), rouge_n(tokens, tokens, 2), rouge_l(tokens, tokens)):
            assert score.f1 == pytest.approx(1.0)

    def test_disjoint_texts(self):
        assert rouge_n(["a", "b"], ["c", "d"], 1).f1 == 0.0
        assert rouge_l(["a", "b"], ["c", "d"]).f1 == 0.0

    def test_clipped_counts(self):
        score = rouge_n(["the", "the", "the"], ["the", "cat"], 1)
        assert score.precision == pytest.approx(1 / 3)
        assert score.recall == pytest.approx(1 / 2)

    def test_lcs_subsequence(self):
        assert lcs_length("a b c d e".split(), "a c e".split()) == 3
        score = rouge_l("a b c d e".split(), "a c e".split())
        assert score.precision == pytest.approx(3 / 5)
        assert score.recall == pytest.approx(1.0)

    def test_empty_candidate_scores_zero(self):
        assert rouge_n([], ["a", "b"], 1).f1 == 0.0
        assert rouge_l([], ["a"]).f1 == 0.0

    def test_undefined_reference(self):
        with pytest.raises(UndefinedScore):
            rouge_n(["a"], [], 1)
        with pytest.raises(UndefinedScore):
            rouge_n(["a", "b"], ["a"], 2)
        with pytest.raises(UndefinedScore):
            rouge_l(["a"], [])

    def test_unsupported_order(self):
        with pytest.raises(ValueError):
            rouge_n(["a"], ["a"], 3)

    def test_random_texts_match_oracles(self):
        rng = np.random.default_rng(13)
        vocab = ["rev", "eps", "q2", "rose", "fell", "$5", "guid", "fy"]
        for _ in range(200):
            cand = [vocab[k] for k in rng.integers(0, len(vocab), size=int(rng.integers(0, 18)))]
            ref = [vocab[k] for k in rng.integers(2, len(vocab), size=int(rng.integers(2, 18)))]
            for n in (1, 2):
                score = rouge_n(cand, ref, n)
                assert (score.precision, score.recall, score.f1) == _oracle_rouge_n(cand, ref, n)
                if len(cand) >= 2:
                    assert rouge_n(ref, cand, n).f1 == score.f1
            lcs = _oracle_lcs(cand, ref)
            assert lcs_length(cand, ref) == lcs
            p = lcs / len(cand) if cand else 0.0
            r = lcs / len(ref)
            score = rouge_l(cand, ref)
            assert (score.precision, score.recall, score.f1) == (p, r, _oracle_f1(p, r))
            if cand:
                assert rouge_l(ref, cand).f1 == score.f1


# ---------------------------------------------------------------------------
# Num-Prec
# ---------------------------------------------------------------------------


class TestNumPrec:
    def test_half_supported(self):
        source = "We expect adjusted EPS of $12.80 to $13.50 this year."
        assert num_prec("sees q3 adjusted earnings per share $12.80 to $13.90.", source) == 0.5

    def test_equivalent_spellings(self):
        assert num_prec("FY revenue $2,740 million.", "Revenue will reach $2.74 billion.") == 1.0

    def test_unit_not_compared(self):
        assert num_prec("Margin 27%.", "Revenue rose $27.") == 1.0

    def test_generated_guidance_values_flagged(self):
        summary = "\n".join(GENERATED_BULLETS[1:4:2])
        count, wrong = inconsistent_numerals(summary, FLEETCOR_GUIDANCE)
        assert count == 4
        assert set(wrong) == {"13.9", "12"}
        assert num_prec(summary, FLEETCOR_GUIDANCE) < 1.0

    def test_generated_summary_scored_against_call(self):
        pair = make_pair("flt-guidance", FLEETCOR_GUIDANCE, ["Q2 revenue rose 27 percent to $667 million."], code="FLT")
        doc = score_document(pair, "\n".join(GENERATED_BULLETS))
        assert doc.n_numerals == 10
        assert set(doc.inconsistent_numerals) == {"13.9", "12"}
        assert doc.num_prec == pytest.approx(0.8)

    def test_no_numerals(self):
        with pytest.raises(NoNumerals):
            num_prec("Strong quarter overall.", "Revenue was $5 million.")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _reference_text(pair) -> str:
    return "\n".join(b.text for b in pair.summary.bullets)


class TestEvaluate:
    def test_reference_as_prediction_scores_one(self, synthetic_pairs):
        predictions = {p.pair_id: _reference_text(p) for p in synthetic_pairs}
        report = evaluate(predictions, synthetic_pairs, name="copy")
        assert report.n_evaluated == 12
        for key in ("rouge1_f1", "rouge2_f1", "rougeL_f1", "num_prec"):
            assert report.means[key] == pytest.approx(1.0)
        assert report.missing_predictions == []

    def test_missing_and_unknown_predictions(self, synthetic_pairs):
        predictions = {p.pair_id: _reference_text(p) for p in synthetic_pairs[:3]}
        predictions["ghost"] = "Revenue $1 million."
        report = evaluate(predictions, synthetic_pairs, expected_ids=[p.pair_id for p in synthetic_pairs[:5]])
        assert report.n_evaluated == 3
        assert report.missing_predictions == ["syn-03", "syn-04"]
        assert report.unknown_predictions == ["ghost"]

    def test_empty_predictions(self, synthetic_pairs):
        report = evaluate({}, synthetic_pairs)
        assert report.n_evaluated == 0
        assert len(report.missing_predictions) == 12
        assert report.means["rouge1_f1"] == 0.0

    def test_hallucinated_value_listed(self, fleetcor_pair):
        doc = score_document(fleetcor_pair, "Sees FY 2021 revenue $2.74 billion to $2.79 billion.")
        assert doc.n_numerals == 3
        assert doc.inconsistent_numerals == ["2021"]
        assert doc.num_prec == pytest.approx(2 / 3)

    def test_summary_without_numerals_excluded_from_num_prec(self, synthetic_pairs):
        predictions = {
            synthetic_pairs[0].pair_id: "Demand for our products remained healthy.",
            synthetic_pairs[1].pair_id: _reference_text(synthetic_pairs[1]),
        }
        report = evaluate(predictions, synthetic_pairs[:2])
        assert report.n_no_numerals == 1
        assert report.means["num_prec"] == 1.0

    def test_threads_do_not_change_means(self, synthetic_pairs):
        predictions = {p.pair_id: p.transcript.sentences[1].text for p in synthetic_pairs}
        one = evaluate(predictions, synthetic_pairs, threads=1)
        four = evaluate(predictions, synthetic_pairs, threads=4)
        assert one.means == four.means

    def test_comparison_rows(self, synthetic_pairs):
        predictions = {p.pair_id: _reference_text(p) for p in synthetic_pairs}
        rows = compare_reports([evaluate(predictions, synthetic_pairs, name="copy")])
        assert rows[0]["system"] == "copy"
        assert rows[0]["rouge1"] == pytest.approx(1.0)


class TestLoadPredictions:
    def test_with_and_without_header(self, tmp_path):
        path = tmp_path / "preds.jsonl"
        lines = [
            {"format": "predictions", "version": 1, "config_hash": "h"},
            {"pair_id": "a", "summary_text": "Revenue $5 million."},
            {"summary_text": "orphan"},
            {"pair_id": "b"},
        ]
        path.write_text("".join(json.dumps(r) + "\n" for r in lines))
        assert load_predictions(path) == {"a": "Revenue $5 million.", "b": ""}

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_predictions(tmp_path / "none.jsonl")
