"""Tests for baselines.py – LexRank scores, lead, label oracle, the baseline stage."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

import store  # noqa: E402
from baselines import (  # noqa: E402
    LEXRANK_DAMPING,
    baseline_file,
    build_graph,
    cosine_matrix,
    ext_oracle,
    lead,
    lexrank,
    stationary_scores,
)
from encoder import LexicalEncoder, SentenceVec, fit_lexical  # noqa: E402
from extractor import select  # noqa: E402
from labels import build_labels  # noqa: E402
from metrics import num_prec  # noqa: E402
from tests.conftest import make_pair  # noqa: E402
from text_core import make_sentence, split_sentences  # noqa: E402

NUMERAL_TEMPLATES = [
    "Revenue for the quarter was ${a} million.",
    "Operating margin improved to {a}.{b}%.",
    "Adjusted earnings per share were ${a}.{b}.",
    "We added {a},{c:03d} new customers.",
    "Free cash flow grew {a} percent to ${c} million.",
    "Guidance calls for ${a}.{b} billion in sales.",
    "Headcount reached {c} in {a} locations.",
]


def _similarity(rng: np.random.Generator, n: int, dim: int = 5) -> np.ndarray:
    vectors = [SentenceVec.from_array(np.abs(rng.standard_normal(dim))) for _ in range(n)]
    return cosine_matrix(vectors)


# ---------------------------------------------------------------------------
# LexRank
# ---------------------------------------------------------------------------


class TestLexRankScores:
    def test_matches_linear_solve(self):
        rng = np.random.default_rng(17)
        for n in [2, 5, 11] + [8] * 50:
            sim = _similarity(rng, n)
            transition = build_graph(sim).transition
            expected = np.linalg.solve(
                np.eye(n) - LEXRANK_DAMPING * transition.T,
                np.full(n, (1.0 - LEXRANK_DAMPING) / n),
            )
            scores = stationary_scores(sim)
            np.testing.assert_allclose(scores, expected, rtol=0, atol=1e-8)
            assert abs(scores.sum() - 1.0) <= 1e-9

    def test_star_center_ranks_first(self):
        n = 6
        sim = np.eye(n)
        sim[0, 1:] = sim[1:, 0] = 0.5
        scores = stationary_scores(sim)
        assert int(np.argmax(scores)) == 0
        np.testing.assert_allclose(scores[1:], scores[1])

    def test_identical_sentences_uniform(self):
        scores = stationary_scores(np.ones((4, 4)))
        np.testing.assert_allclose(scores, 0.25)

    def test_graph_rows(self):
        sim = np.array([[1.0, 0.05, 0.3], [0.05, 1.0, 0.02], [0.3, 0.02, 1.0]])
        graph = build_graph(sim, threshold=0.1)
        assert graph.weights[0, 1] == 0.0
        assert np.all(np.diag(graph.weights) == 0.0)
        np.testing.assert_allclose(graph.transition.sum(axis=1), 1.0)
        np.testing.assert_allclose(graph.transition[1], 1.0 / 3)

    def test_lexrank_picks_central_sentence(self):
        text = (
            "Revenue growth was strong this quarter. "
            "Revenue growth was strong in every region. "
            "Strong revenue growth continued this quarter. "
            "Thanks everyone for joining today."
        )
        doc = split_sentences(text)
        encoder = LexicalEncoder(fit_lexical([s.tokens for s in doc], hash_size=2 ** 16))
        chosen = lexrank(doc, encoder, word_budget=1)
        assert chosen != [3]
        assert len(chosen) == 1

    def test_single_sentence(self):
        doc = split_sentences("Revenue was $5 million.")
        encoder = LexicalEncoder(fit_lexical([doc[0].tokens], hash_size=64))
        assert lexrank(doc, encoder) == [0]


# ---------------------------------------------------------------------------
# Lead and oracle
# ---------------------------------------------------------------------------


class TestLead:
    def test_first_sentences_until_budget(self):
        doc = [make_sentence("one two three four", i) for i in range(5)]
        assert lead(doc, word_budget=10) == [0, 1, 2]

    def test_at_least_one(self):
        doc = [make_sentence("one two three four", i) for i in range(3)]
        assert lead(doc, word_budget=0) == [0]

    def test_empty_document(self):
        with pytest.raises(ValueError):
            lead([])


class TestOracle:
    def test_from_encoder(self, synthetic_pairs):
        pair = synthetic_pairs[0]
        encoder = LexicalEncoder(fit_lexical([s.tokens for s in pair.transcript.sentences], hash_size=256))
        assert ext_oracle(pair, encoder) == [1, 3]

    def test_from_labelset(self, synthetic_pairs):
        pair = synthetic_pairs[2]
        encoder = LexicalEncoder(fit_lexical([s.tokens for s in pair.transcript.sentences], hash_size=256))
        assert ext_oracle(pair, labelset=build_labels(pair, encoder)) == [1, 3]

    def test_needs_encoder_or_labels(self, synthetic_pairs):
        with pytest.raises(ValueError):
            ext_oracle(synthetic_pairs[0])


class TestExtractiveNumerals:
    def test_selected_sentences_never_change_values(self):
        rng = np.random.default_rng(23)
        for k in range(100):
            n = int(rng.integers(2, 9))
            picks = rng.integers(0, len(NUMERAL_TEMPLATES), size=n)
            text = " ".join(
                NUMERAL_TEMPLATES[int(t)].format(
                    a=int(rng.integers(1, 999)), b=int(rng.integers(0, 99)), c=int(rng.integers(0, 999)),
                )
                for t in picks
            )
            doc = split_sentences(text)
            pair = make_pair(f"num-{k:03d}", text, [doc[int(rng.integers(0, len(doc)))].text])
            encoder = LexicalEncoder(fit_lexical([s.tokens for s in doc], hash_size=256))
            source = " ".join(s.text for s in doc)
            budget = int(rng.integers(5, 60))
            selections = {
                "lead": lead(doc, word_budget=budget),
                "lexrank": lexrank(doc, encoder, word_budget=budget),
                "oracle": ext_oracle(pair, encoder),
                "select": select(rng.random(len(doc)), doc, word_budget=budget),
            }
            for method, chosen in selections.items():
                summary = "\n".join(doc[i].text for i in chosen)
                assert num_prec(summary, source) == 1.0, (method, pair.pair_id)


# ---------------------------------------------------------------------------
# Baseline stage
# ---------------------------------------------------------------------------


class TestRunBaseline:
    def test_all_methods(self, tmp_pipeline):
        from baselines import run_baseline
        from corpus import run_ingest
        from labels import run_labels
        from pairing import load_split, run_pair, run_split

        workdir = Path(tmp_pipeline["workdir"])
        run_ingest(tmp_pipeline["transcripts"], tmp_pipeline["articles"], workdir, "h")
        run_pair(workdir, "h")
        run_split(workdir, "h", seed=0)
        run_labels(workdir, "h", hash_size=256)
        test_ids = sorted(load_split(workdir).test)

        for method in ("lead", "lexrank", "oracle"):
            assert run_baseline(workdir, "h", method) == len(test_ids)
            _, records = store.read_records(workdir / baseline_file(method), "predictions")
            assert [r["pair_id"] for r in records] == test_ids
            assert all(r["sentence_indices"] == sorted(r["sentence_indices"]) for r in records)

    def test_unknown_method(self, tmp_path):
        from baselines import run_baseline

        with pytest.raises(ValueError):
            run_baseline(tmp_path, "h", "random")
