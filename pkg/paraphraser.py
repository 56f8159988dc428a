"""Step 6 – Rewrite extracted sentences into short bullets without touching numbers.

Every sentence goes through the placeholder envelope: numerals are masked,
the masked text is handed to a rewrite backend, and the raw values are put
back afterwards. A backend can drop a placeholder (the bullet is kept and the
lost value recorded) but can never introduce one.

Backends:
  rule        deterministic telegram-style rewriting from the lexicon tables
  identity    returns the masked text unchanged
  command:CMD external process; masked lines on stdin, rewritten masked
              lines on stdout, one-to-one and in order

Standalone: python main.py paraphrase
Module:     from paraphraser import paraphrase, rule_rewrite, RuleBackend
"""

from __future__ import annotations

import json
import logging
import re
import shlex
import subprocess
from collections import Counter
from pathlib import Path
from typing import TYPE_CHECKING

from pydantic import BaseModel

import lexicon
import store
from text_core import (
    MaskedSentence,
    Sentence,
    UnknownPlaceholder,
    mask_numerals,
    numeral_keys,
    unmask,
)

if TYPE_CHECKING:
    from labels import ParaphrasePair

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Configuration constants (adjust as needed)
# ---------------------------------------------------------------------------

MAX_RULE_PASSES: int = 8
COMMAND_TIMEOUT_SECONDS: int = 300

# ---------------------------------------------------------------------------
# Models and errors
# ---------------------------------------------------------------------------


class Bullet(BaseModel):
    text: str
    source_sentence_index: int


class ValueLoss(BaseModel):
    source_sentence_index: int
    bullet: Bullet                                # partial bullet, values missing
    dropped: list[str]                            # raw numerals the backend left out


class ParaphrasedSummary(BaseModel):
    bullets: list[Bullet]
    losses: list[ValueLoss]


class BackendViolation(RuntimeError):
    """The backend broke the placeholder contract or failed to answer."""


class IoError(OSError):
    pass


# ---------------------------------------------------------------------------
# Rule-based rewriting
# ---------------------------------------------------------------------------

_PLACEHOLDER = r"\[num-[a-z-]+\]"
_QUARTER_WORD = "|".join(lexicon.QUARTER_WORDS)
_QUARTER_IN_THE = re.compile(
    rf"\b(?:in|during|for) the ({_QUARTER_WORD})[- ]quarter(?: of (?:fiscal )?({_PLACEHOLDER}))?,?"
)
_QUARTER_BARE = re.compile(rf"\b({_QUARTER_WORD})[- ]quarter(?: of (?:fiscal )?({_PLACEHOLDER}))?")
_QUARTER_CODE = re.compile(rf"\bq([1-4]) of (?:fiscal )?({_PLACEHOLDER})")
_SPLIT_PLACEHOLDERS = re.compile(rf"({_PLACEHOLDER})")
_TRAILING = re.compile(r"[\s,;:!?.]+$")


def _quarter(match: re.Match[str]) -> str:
    which = match.group(1)
    number = which if which.isdigit() else str(lexicon.QUARTER_WORDS[which])
    year = match.group(2)
    return f"q{number} {year}" if year else f"q{number}"


def _outside_placeholders(text: str, fn) -> str:
    parts = _SPLIT_PLACEHOLDERS.split(text)
    return "".join(part if i % 2 else fn(part) for i, part in enumerate(parts))


def _substitute(segment: str) -> str:
    for pattern, replacement in lexicon.SUBSTITUTION_PATTERNS:
        segment = pattern.sub(replacement, segment)
    return segment


def _finish(text: str) -> str:
    text = " ".join(text.split())
    text = _TRAILING.sub("", text)
    return f"{text}." if text else ""


def _rule_pass(text: str) -> str:
    text = text.lower()
    text = _QUARTER_IN_THE.sub(_quarter, text)
    text = _QUARTER_BARE.sub(_quarter, text)
    text = _QUARTER_CODE.sub(_quarter, text)
    text = text.strip()
    while True:
        stripped = lexicon.OPENER_PATTERN.sub("", text, count=1)
        if stripped == text:
            break
        text = stripped
    text = _outside_placeholders(text, _substitute)
    return _finish(text)


def rule_rewrite(masked_text: str) -> str:
    """Telegram-style rewrite of a masked sentence.

    Passes, in order: lowercase; quarter phrases to q1..q4 (a year
    placeholder stays attached); leading openers dropped; substitution table
    outside placeholders; whitespace collapsed with one terminal period. The
    pass list repeats until the text stops changing, so the result is a fixed
    point.
    """
    text = masked_text
    for _ in range(MAX_RULE_PASSES):
        rewritten = _rule_pass(text)
        if rewritten == text:
            break
        text = rewritten
    return text


# ---------------------------------------------------------------------------
# Backends
# ---------------------------------------------------------------------------


class RewriteBackend:
    name: str = "base"

    def rewrite(self, masked_text: str) -> str:
        raise NotImplementedError

    def rewrite_many(self, masked_texts: list[str]) -> list[str]:
        return [self.rewrite(t) for t in masked_texts]


class IdentityBackend(RewriteBackend):
    name = "identity"

    def rewrite(self, masked_text: str) -> str:
        return masked_text


class RuleBackend(RewriteBackend):
    """Pure and thread-safe."""

    name = "rule"

    def rewrite(self, masked_text: str) -> str:
        return rule_rewrite(masked_text)


class CommandBackend(RewriteBackend):
    """External rewriter process. Each call starts a fresh process."""

    name = "command"

    def __init__(self, command: str) -> None:
        self.command = command

    def rewrite(self, masked_text: str) -> str:
        return self.rewrite_many([masked_text])[0]

    def rewrite_many(self, masked_texts: list[str]) -> list[str]:
        if not masked_texts:
            return []
        try:
            completed = subprocess.run(
                shlex.split(self.command),
                input="\n".join(masked_texts) + "\n",
                capture_output=True,
                text=True,
                check=True,
                timeout=COMMAND_TIMEOUT_SECONDS,
            )
        except (OSError, subprocess.SubprocessError) as e:
            raise BackendViolation(f"rewrite command '{self.command}' failed: {e}") from e
        lines = completed.stdout.splitlines()
        if len(lines) != len(masked_texts):
            raise BackendViolation(
                f"rewrite command returned {len(lines)} lines for {len(masked_texts)} inputs"
            )
        return lines


def make_backend(choice: str) -> RewriteBackend:
    if choice == "rule":
        return RuleBackend()
    if choice == "identity":
        return IdentityBackend()
    if choice.startswith("command:"):
        return CommandBackend(choice.removeprefix("command:"))
    raise ValueError(f"unknown rewrite backend '{choice}'")


# ---------------------------------------------------------------------------
# Mask → rewrite → unmask
# ---------------------------------------------------------------------------


def _bullet_style(masked_text: str) -> str:
    return _finish(masked_text.lower())


def _restore(sentence: Sentence, masked: MaskedSentence, rewritten: str) -> Bullet | ValueLoss:
    try:
        restored = unmask(masked, _bullet_style(rewritten))
    except UnknownPlaceholder as e:
        raise BackendViolation(f"backend invented {e}") from e

    source_keys = Counter(numeral_keys(sentence.text))
    foreign = [k for k in numeral_keys(restored.text) if k not in source_keys]
    if foreign:
        raise BackendViolation(f"backend wrote numerals absent from the source: {', '.join(foreign)}")

    bullet = Bullet(text=restored.text, source_sentence_index=sentence.index)
    if restored.dropped:
        raw_by_name = dict(masked.placeholders)
        dropped = [raw_by_name[name] for name in restored.dropped]
        logger.warning("paraphrase: sentence %d lost value(s) %s", sentence.index, ", ".join(dropped))
        return ValueLoss(source_sentence_index=sentence.index, bullet=bullet, dropped=dropped)
    return bullet


def paraphrase(sentence: Sentence, backend: RewriteBackend) -> Bullet | ValueLoss:
    masked = mask_numerals(sentence)
    return _restore(sentence, masked, backend.rewrite(masked.masked_text))


def paraphrase_summary(sentences: list[Sentence], backend: RewriteBackend) -> ParaphrasedSummary:
    """Paraphrase a whole extractive summary with one batched backend call.

    Bullets that lost a value are kept in ``bullets`` and also reported in
    ``losses``.
    """
    masked = [mask_numerals(s) for s in sentences]
    rewritten = backend.rewrite_many([m.masked_text for m in masked])
    bullets: list[Bullet] = []
    losses: list[ValueLoss] = []
    for sentence, m, out in zip(sentences, masked, rewritten):
        result = _restore(sentence, m, out)
        if isinstance(result, ValueLoss):
            losses.append(result)
            bullets.append(result.bullet)
        else:
            bullets.append(result)
    return ParaphrasedSummary(bullets=bullets, losses=losses)


# ---------------------------------------------------------------------------
# Rewriter training data
# ---------------------------------------------------------------------------


def export_backend_training_set(paraphrase_pairs: list[ParaphrasePair], path: str | Path) -> int:
    """Write masked (source, target) records for an external rewriter trainer.

    One JSON object per line, ordered by (pair_id, target_index, source_index);
    no header line.
    """
    ordered = sorted(paraphrase_pairs, key=lambda p: (p.pair_id, p.target_index, p.source_index))
    lines = [
        json.dumps({
            "pair_id": p.pair_id,
            "masked_source": p.source.masked_text,
            "masked_target": p.target.masked_text,
            "source_placeholders": dict(p.source.placeholders),
            "target_placeholders": dict(p.target.placeholders),
        }, sort_keys=True, ensure_ascii=False)
        for p in ordered
    ]
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot write rewriter training set {path}: {e}") from e
    logger.info("paraphrase: exported %d rewriter training records to %s", len(lines), path)
    return len(lines)


# ---------------------------------------------------------------------------
# Public entry-point
# ---------------------------------------------------------------------------


def run_paraphrase(
    workdir: str | Path,
    config_hash: str,
    backend_choice: str = "rule",
    threads: int = 1,
) -> dict[str, int]:
    """Paraphrase every extractive summary of the test split."""
    from pairing import load_pairs
    from parallel import parallel_map

    workdir = Path(workdir)
    backend = make_backend(backend_choice)
    pairs = {p.pair_id: p for p in load_pairs(workdir)}
    _, predictions = store.read_records(workdir / store.EXTRACTIVE_FILE, "predictions")

    def _one(record: dict) -> dict:
        doc = pairs[record["pair_id"]].transcript.sentences
        result = paraphrase_summary([doc[i] for i in record["sentence_indices"]], backend)
        return {
            "pair_id": record["pair_id"],
            "summary_text": "\n".join(b.text for b in result.bullets),
            "bullets": [b.model_dump() for b in result.bullets],
            "value_losses": [loss.model_dump() for loss in result.losses],
        }

    records = parallel_map(_one, predictions, threads)
    store.write_records(workdir / store.PARAPHRASED_FILE, "predictions", records, config_hash)
    n_losses = sum(len(r["value_losses"]) for r in records)
    logger.info("paraphrase: %d summaries via %s backend, %d value losses", len(records), backend.name, n_losses)
    return {"summaries": len(records), "value_losses": n_losses}
