"""Tests for extractor.py – forward pass, loss, hand-written gradients, training, selection."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from encoder import LexicalEncoder, fit_lexical  # noqa: E402
from extractor import (  # noqa: E402
    ExtractorDims,
    ShapeError,
    TrainConfig,
    TrainingDoc,
    bce_loss,
    checkpoint_bytes,
    document_inputs,
    forward,
    gradients,
    init_params,
    load_checkpoint,
    params_from_bytes,
    save_checkpoint,
    select,
    train,
    zero_params,
)
from labels import build_labels  # noqa: E402
from tests.conftest import make_pair  # noqa: E402
from text_core import make_sentence  # noqa: E402

SMALL = ExtractorDims(input_dim=16, hidden_dim=8, pos_dim=4, max_pos=6)

FIGURE_SENTENCES = [
    ("Revenue for the quarter was ${v} million.", "Revenue ${v} million."),
    ("Operating margin improved to {v}.5%.", "Operating margin {v}.5%."),
    ("Free cash flow reached ${v} million.", "Free cash flow ${v} million."),
    ("We returned ${v} million to shareholders.", "Returned ${v} million to shareholders."),
]

FILLER_SENTENCES = [
    "Thank you all for joining us today.",
    "Demand for our products remained healthy.",
    "We thank our employees for their hard work.",
    "Our teams executed well across every region.",
    "Customer retention stayed strong throughout the period.",
    "We continue to invest in our platform.",
    "Please refer to the safe harbor statement in our release.",
    "I will now hand the call over to our finance chief.",
]


def _labelled_calls(rng: np.random.Generator, count: int, prefix: str) -> list:
    """Calls mixing three figure sentences with four fillers; bullets restate the figures."""
    pairs = []
    for k in range(count):
        figures = rng.choice(len(FIGURE_SENTENCES), size=3, replace=False)
        values = rng.choice(np.arange(100, 1000), size=3, replace=False)
        sentences = [FIGURE_SENTENCES[int(f)][0].format(v=int(v)) for f, v in zip(figures, values)]
        bullets = [FIGURE_SENTENCES[int(f)][1].format(v=int(v)) for f, v in zip(figures, values)]
        fillers = rng.choice(len(FILLER_SENTENCES), size=4, replace=False)
        sentences += [FILLER_SENTENCES[int(i)] for i in fillers]
        order = rng.permutation(len(sentences))
        text = " ".join(sentences[int(i)] for i in order)
        pairs.append(make_pair(f"{prefix}-{k:02d}", text, bullets))
    return pairs


def _sig(x):
    return 1.0 / (1.0 + np.exp(-x))


def _reference_probs(X: np.ndarray, nu: np.ndarray, params) -> np.ndarray:
    """Straight-line re-derivation of the scoring model, one sentence at a time."""
    t = params.tensors
    dims = params.dims
    n = X.shape[0]

    def run(rows, direction):
        h = np.zeros(dims.hidden_dim)
        out = []
        for x in rows:
            z = _sig(t[f"Wz_{direction}"] @ x + t[f"Uz_{direction}"] @ h + t[f"bz_{direction}"])
            r = _sig(t[f"Wr_{direction}"] @ x + t[f"Ur_{direction}"] @ h + t[f"br_{direction}"])
            hc = np.tanh(t[f"Wh_{direction}"] @ x + t[f"Uh_{direction}"] @ (r * h) + t[f"bh_{direction}"])
            h = (1 - z) * h + z * hc
            out.append(h)
        return out

    forward_states = run(list(X), "f")
    backward_states = run(list(X[::-1]), "b")[::-1]
    concat = [np.concatenate([a, b]) for a, b in zip(forward_states, backward_states)]
    hidden = [np.tanh(t["W_h"] @ c + t["b_h"]) for c in concat]
    doc = np.tanh(t["W_d"] @ (sum(concat) / n) + t["b_d"])

    running = np.zeros(dims.hidden_dim)
    probs = []
    for i, h in enumerate(hidden):
        score = (
            t["w_c"] @ h
            + h @ t["W_s"] @ doc
            - h @ t["W_n"] @ np.tanh(running)
            + t["P_abs"][min(i, dims.max_pos - 1)] @ t["w_ap"]
            + t["P_rel"][dims.rel_buckets * i // n] @ t["w_rp"]
            + t["w_nu"][0] * nu[i]
            + t["b_cls"][0]
        )
        p = _sig(score)
        probs.append(p)
        running = running + h * p
    return np.array(probs)


def _random_doc(rng: np.random.Generator, n: int, dim: int, pair_id: str = "d") -> TrainingDoc:
    nu = np.zeros(n)
    nu[rng.permutation(n)[: n // 2]] = 1.0
    return TrainingDoc(pair_id=pair_id, vectors=rng.standard_normal((n, dim)), nu=nu, labels=nu.copy())


# ---------------------------------------------------------------------------
# Forward pass
# ---------------------------------------------------------------------------


class TestForward:
    def test_zero_params_give_one_half(self):
        params = zero_params(SMALL)
        X = np.random.default_rng(0).standard_normal((5, 16))
        probs, states, decode = forward(X, np.array([0, 1, 0, 1, 1.0]), params)
        np.testing.assert_allclose(probs, 0.5)
        assert states.n_sentences == 5
        assert decode.sums.shape == (5, 8)

    def test_numeric_weight_raises_probability(self):
        params = zero_params(SMALL)
        params.tensors["w_nu"][0] = 2.0
        X = np.zeros((2, 16))
        probs, _, _ = forward(X, np.array([1.0, 0.0]), params)
        assert probs[0] > 0.5
        assert probs[1] == pytest.approx(0.5)

    def test_matches_reference(self):
        rng = np.random.default_rng(11)
        params = init_params(SMALL, seed=3)
        for n in (1, 4, 9):
            X = rng.standard_normal((n, 16))
            nu = (rng.random(n) < 0.5).astype(float)
            probs, _, _ = forward(X, nu, params)
            np.testing.assert_allclose(probs, _reference_probs(X, nu, params), rtol=0, atol=1e-12)

    def test_probabilities_in_open_interval(self):
        rng = np.random.default_rng(2)
        params = init_params(SMALL, seed=1)
        probs, _, _ = forward(rng.standard_normal((12, 16)), np.ones(12), params)
        assert np.all((probs > 0.0) & (probs < 1.0))

    def test_shape_errors(self):
        params = zero_params(SMALL)
        with pytest.raises(ShapeError):
            forward(np.zeros((3, 15)), np.zeros(3), params)
        with pytest.raises(ShapeError):
            forward(np.zeros((3, 16)), np.zeros(2), params)
        with pytest.raises(ShapeError):
            forward(np.zeros((0, 16)), np.zeros(0), params)


# ---------------------------------------------------------------------------
# Loss and gradients
# ---------------------------------------------------------------------------


class TestLoss:
    def test_half_probability(self):
        assert bce_loss(np.array([0.5, 0.5, 0.5]), np.array([1, 0, 1])) == pytest.approx(np.log(2))

    def test_perfect_prediction_near_zero(self):
        assert bce_loss(np.array([1.0, 0.0]), np.array([1, 0])) == pytest.approx(0.0, abs=1e-9)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            bce_loss(np.array([0.5]), np.array([1, 0]))


class TestGradients:
    def test_central_differences(self):
        rng = np.random.default_rng(7)
        params = init_params(SMALL, seed=5)
        n = 7
        X = rng.standard_normal((n, 16))
        nu = np.array([1, 0, 1, 1, 0, 0, 1], dtype=float)
        y = np.array([1, 0, 0, 1, 0, 1, 0], dtype=float)
        loss, grads = gradients(X, nu, y, params)
        assert loss == pytest.approx(bce_loss(forward(X, nu, params)[0], y))

        step = 1e-5
        for name, tensor in params.tensors.items():
            flat = tensor.reshape(-1)
            picks = rng.choice(flat.size, size=min(3, flat.size), replace=False)
            for k in picks:
                original = flat[k]
                flat[k] = original + step
                up = bce_loss(forward(X, nu, params)[0], y)
                flat[k] = original - step
                down = bce_loss(forward(X, nu, params)[0], y)
                flat[k] = original
                numeric = (up - down) / (2 * step)
                analytic = grads[name].reshape(-1)[k]
                scale = max(abs(numeric), abs(analytic), 1e-5)
                assert abs(numeric - analytic) / scale < 1e-4, f"{name}[{k}]: {numeric} vs {analytic}"

    def test_unused_position_rows_have_zero_gradient(self):
        rng = np.random.default_rng(1)
        params = init_params(SMALL, seed=2)
        _, grads = gradients(rng.standard_normal((3, 16)), np.zeros(3), np.array([1.0, 0, 0]), params)
        assert not grads["P_abs"][3:].any()


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


class TestTrain:
    def test_zero_learning_rate_keeps_initial_params(self):
        rng = np.random.default_rng(0)
        docs = [_random_doc(rng, 5, 16, f"d{i}") for i in range(4)]
        config = TrainConfig(learning_rate=0.0, batch_size=2, max_epochs=2, seed=9)
        result = train(docs[:3], docs[3:], config, dims=SMALL)
        initial = init_params(SMALL, seed=9)
        for name, tensor in initial.tensors.items():
            np.testing.assert_array_equal(result.params.tensors[name], tensor)
        assert result.best_epoch == 0
        assert len(result.history) == 2

    def test_same_seed_same_checkpoint(self):
        rng = np.random.default_rng(4)
        docs = [_random_doc(rng, 6, 16, f"d{i}") for i in range(5)]
        config = TrainConfig(learning_rate=0.01, batch_size=2, max_epochs=3, seed=1)
        first = train(docs[:4], docs[4:], config, dims=SMALL)
        second = train(docs[:4], docs[4:], config, dims=SMALL)
        threaded = train(docs[:4], docs[4:], config.model_copy(update={"threads": 3}), dims=SMALL)
        assert checkpoint_bytes(first.params) == checkpoint_bytes(second.params)
        assert checkpoint_bytes(first.params) == checkpoint_bytes(threaded.params)

    def test_patience_stops_early(self):
        rng = np.random.default_rng(4)
        docs = [_random_doc(rng, 4, 16, f"d{i}") for i in range(3)]
        config = TrainConfig(learning_rate=0.0, max_epochs=10, patience=2)
        assert len(train(docs[:2], docs[2:], config, dims=SMALL).history) == 2

    def test_empty_sets_rejected(self):
        with pytest.raises(ValueError):
            train([], [], TrainConfig(), dims=SMALL)

    def test_recovers_labelled_sentences(self):
        rng = np.random.default_rng(12)
        train_pairs = _labelled_calls(rng, 20, "train")
        val_pairs = _labelled_calls(rng, 4, "val")
        encoder = LexicalEncoder(fit_lexical([s.tokens for p in train_pairs for s in p.transcript.sentences], hash_size=64))

        def as_doc(pair) -> TrainingDoc:
            X, nu = document_inputs(pair.pair_id, pair.transcript.sentences, encoder)
            labels = np.array(build_labels(pair, encoder).labels, dtype=float)
            return TrainingDoc(pair_id=pair.pair_id, vectors=X, nu=nu, labels=labels)

        train_docs = [as_doc(p) for p in train_pairs]
        val_docs = [as_doc(p) for p in val_pairs]
        assert all(int(d.labels.sum()) == 3 for d in train_docs)

        dims = ExtractorDims(input_dim=encoder.dimension, hidden_dim=8, pos_dim=4, max_pos=12)
        config = TrainConfig(learning_rate=0.05, batch_size=4, max_epochs=200, seed=0)
        result = train(train_docs, val_docs, config, dims=dims)

        hits = total = 0
        for pair, doc in zip(train_pairs, train_docs):
            positives = {i for i, y in enumerate(doc.labels) if y == 1}
            budget = sum(len(pair.transcript.sentences[i].tokens) for i in positives)
            probs, _, _ = forward(doc.vectors, doc.nu, result.params)
            chosen = set(select(probs, pair.transcript.sentences, word_budget=budget))
            hits += len(chosen & positives)
            total += len(positives)
        assert hits / total >= 0.95
        assert result.params.tensors["w_nu"][0] > 0

        again = train(train_docs, val_docs, config, dims=dims)
        assert checkpoint_bytes(again.params) == checkpoint_bytes(result.params)


# ---------------------------------------------------------------------------
# Selection
# ---------------------------------------------------------------------------


def _brute_select(probs, lengths, budget):
    order = sorted(range(len(probs)), key=lambda i: (-probs[i], i))
    for k in range(1, len(order) + 1):
        if sum(lengths[i] for i in order[:k]) >= budget:
            return sorted(order[:k])
    return sorted(order)


class TestSelect:
    def test_budget_reached(self):
        sentences = [make_sentence("one two three four five", i) for i in range(3)]
        assert select([0.9, 0.1, 0.8], sentences, word_budget=8) == [0, 2]

    def test_zero_budget_still_one_sentence(self):
        sentences = [make_sentence("one two", i) for i in range(3)]
        assert select([0.2, 0.7, 0.1], sentences, word_budget=0) == [1]

    def test_ties_to_smaller_index(self):
        sentences = [make_sentence("one", i) for i in range(3)]
        assert select([0.5, 0.5, 0.5], sentences, word_budget=1) == [0]

    def test_budget_larger_than_document(self):
        sentences = [make_sentence("one two", i) for i in range(4)]
        assert select([0.1, 0.4, 0.3, 0.2], sentences, word_budget=500) == [0, 1, 2, 3]

    def test_matches_brute_force(self):
        rng = np.random.default_rng(8)
        for _ in range(40):
            n = int(rng.integers(1, 12))
            lengths = [int(k) for k in rng.integers(1, 9, size=n)]
            sentences = [make_sentence(" ".join(["w"] * lengths[i]), i) for i in range(n)]
            probs = [float(p) for p in rng.integers(0, 5, size=n) / 4]
            budget = int(rng.integers(0, 40))
            assert select(probs, sentences, budget) == _brute_select(probs, lengths, budget)

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            select([0.5], [], word_budget=5)


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------


class TestCheckpoint:
    def test_round_trip_bit_exact(self, tmp_path):
        params = init_params(SMALL, seed=6)
        save_checkpoint(tmp_path / "ck.bin", params)
        loaded = load_checkpoint(tmp_path / "ck.bin")
        assert loaded.dims == SMALL
        for name, tensor in params.tensors.items():
            assert loaded.tensors[name].tobytes() == tensor.tobytes()
        assert checkpoint_bytes(loaded) == checkpoint_bytes(params)

    def test_trailing_bytes_rejected(self):
        with pytest.raises(ValueError):
            params_from_bytes(checkpoint_bytes(zero_params(SMALL)) + b"\x00" * 8)

    def test_bad_magic_rejected(self):
        with pytest.raises(ValueError):
            params_from_bytes(b"XXXX" + checkpoint_bytes(zero_params(SMALL))[4:])

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_checkpoint(tmp_path / "nope.bin")
