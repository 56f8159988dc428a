"""Deterministic text primitives shared by every stage.

Sentence splitting, the shared tokenizer, the financial numeral grammar and
reversible placeholder masking. Everything here is a pure function over
immutable pydantic models.

Module: from text_core import split_sentences, extract_numerals, mask_numerals
"""

from __future__ import annotations

import re
from decimal import Decimal
from typing import Literal

from num2words import num2words
from pydantic import BaseModel, ConfigDict

import lexicon

# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------


class Sentence(BaseModel):
    model_config = ConfigDict(frozen=True)

    text: str
    tokens: list[str]
    index: int                                    # 0-based position in its document


class Numeral(BaseModel):
    model_config = ConfigDict(frozen=True)

    raw: str                                      # exact source substring
    value: Decimal
    magnitude: int                                # 0, 3, 6, 9 or 12
    unit: Literal["currency", "percent", "plain"]
    span: tuple[int, int]                         # [start, end) character offsets


class MaskedSentence(BaseModel):
    model_config = ConfigDict(frozen=True)

    masked_text: str
    placeholders: list[tuple[str, str]]           # (name, raw numeral), first-occurrence order


class UnmaskResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    text: str
    dropped: list[str]                            # placeholder names missing from the decoded text


class UnknownPlaceholder(ValueError):
    """Decoded text carries a placeholder the masked sentence never issued."""

    def __init__(self, names: list[str]) -> None:
        self.names = names
        super().__init__(f"unknown placeholder(s): {', '.join(names)}")


# ---------------------------------------------------------------------------
# Tokenization
# ---------------------------------------------------------------------------

_EDGE_PUNCTUATION = ".,;:!?\"'()[]{}"


def tokenize(text: str) -> list[str]:
    """Whitespace split, detach edge punctuation, lowercase.

    Numerals stay single tokens ("$2.74", "27%"). Tokens with no letter or
    digit left are dropped.
    """
    tokens: list[str] = []
    for chunk in text.split():
        token = chunk.strip(_EDGE_PUNCTUATION).lower()
        if any(ch.isalnum() for ch in token):
            tokens.append(token)
    return tokens


# ---------------------------------------------------------------------------
# Sentence splitting
# ---------------------------------------------------------------------------

# A run of terminators, optionally closed by quotes/brackets, followed by
# whitespace or the end of the text.
_BOUNDARY = re.compile(r"[.?!]+[\"')\]]*(?=\s|$)")
_LAST_WORD = re.compile(r"\S*$")


def _closes_abbreviation(text: str, boundary_start: int, terminator: str) -> bool:
    if terminator != ".":
        return False
    word = _LAST_WORD.search(text, 0, boundary_start).group(0).lstrip("(\"'[")
    return bool(word) and lexicon.is_abbreviation(word)


def _make_sentence(chunk: str, index: int) -> Sentence | None:
    text = " ".join(chunk.split())
    tokens = tokenize(text)
    if not tokens:
        return None
    return Sentence(text=text, tokens=tokens, index=index)


def split_sentences(text: str) -> list[Sentence]:
    """Split plain text into sentences.

    Boundaries are '.', '?' or '!' runs followed by whitespace. A single
    period closing a lexicon abbreviation (Inc., U.S., Q3.) is not a boundary;
    decimal points never are, since a digit follows them.
    """
    sentences: list[Sentence] = []
    start = 0
    for match in _BOUNDARY.finditer(text):
        terminator = match.group(0).rstrip("\"')]")
        if _closes_abbreviation(text, match.start(), terminator):
            continue
        sentence = _make_sentence(text[start:match.end()], len(sentences))
        if sentence is not None:
            sentences.append(sentence)
        start = match.end()
    tail = _make_sentence(text[start:], len(sentences))
    if tail is not None:
        sentences.append(tail)
    return sentences


def make_sentence(text: str, index: int = 0) -> Sentence:
    """Wrap one already-split sentence (reference bullets, predictions)."""
    text = " ".join(text.split())
    return Sentence(text=text, tokens=tokenize(text), index=index)


# ---------------------------------------------------------------------------
# Numeral grammar
# ---------------------------------------------------------------------------

_MAGNITUDES: dict[str, int] = {"thousand": 3, "million": 6, "billion": 9, "trillion": 12}

# The number itself is atomic: a letter glued after "$2.5bn" never shortens
# the match to "$2".
_NUMERAL_RE = re.compile(
    r"(?<![\w.])"                                 # no letter-prefixed codes (Q2) or split decimals
    r"(?P<currency>[$€£])?"
    r"(?>(?P<digits>\d{1,3}(?:,\d{3})+(?!\d)|\d+)(?P<fraction>\.\d+)?)"
    r"(?:(?P<percent>%|\s+per\s?cent\b)|\s+(?P<magnitude>thousand|million|billion|trillion)\b)?",
    re.IGNORECASE,
)
_CODE_SUFFIX = re.compile(r"_|-?[A-Za-z]")


def _is_code(match: re.Match[str]) -> bool:
    """A bare integer glued to letters is a code (3Q, 10-K, 2nd), not a value."""
    if any(match.group(g) for g in ("currency", "fraction", "percent", "magnitude")):
        return False
    return _CODE_SUFFIX.match(match.string, match.end()) is not None


def _numeral_matches(text: str) -> list[re.Match[str]]:
    return [m for m in _NUMERAL_RE.finditer(text) if not _is_code(m)]


def _numeral_from_match(match: re.Match[str], offset: int = 0) -> Numeral:
    value = Decimal(match.group("digits").replace(",", "") + (match.group("fraction") or ""))
    magnitude_word = match.group("magnitude")
    if match.group("currency"):
        unit = "currency"
    elif match.group("percent"):
        unit = "percent"
    else:
        unit = "plain"
    return Numeral(
        raw=match.group(0),
        value=value,
        magnitude=_MAGNITUDES[magnitude_word.lower()] if magnitude_word else 0,
        unit=unit,
        span=(match.start() + offset, match.end() + offset),
    )


def find_numerals(text: str) -> list[Numeral]:
    """All maximal, non-overlapping grammar matches in ``text``, by span start."""
    return [_numeral_from_match(m) for m in _numeral_matches(text)]


def extract_numerals(sentence: Sentence) -> list[Numeral]:
    return find_numerals(sentence.text)


def parse_numeral(raw: str) -> Numeral | None:
    """Parse a string that is exactly one numeral; None otherwise."""
    match = _NUMERAL_RE.fullmatch(raw)
    return _numeral_from_match(match) if match and not _is_code(match) else None


def canonical_key(numeral: Numeral) -> str:
    """value × 10^magnitude as a plain decimal string, trailing zeros stripped.

    The unit is not part of the key: "$27" and "27%" share key "27".
    """
    scaled = numeral.value.scaleb(numeral.magnitude).normalize()
    return format(scaled, "f")


def numeral_keys(text: str) -> list[str]:
    return [canonical_key(n) for n in find_numerals(text)]


def has_numerals(sentence: Sentence) -> bool:
    return bool(_numeral_matches(sentence.text))


# ---------------------------------------------------------------------------
# Placeholder masking
# ---------------------------------------------------------------------------

_PLACEHOLDER_RE = re.compile(r"\[(num-[a-z-]+)\]")


def placeholder_name(position: int) -> str:
    """1 → 'num-one', 21 → 'num-twenty-one'."""
    words = num2words(position).replace(",", "").replace(" ", "-")
    return f"num-{words}"


def placeholder_token(name: str) -> str:
    return f"[{name}]"


def placeholder_names_in(text: str) -> list[str]:
    return _PLACEHOLDER_RE.findall(text)


# Text already shaped like a placeholder, in any case.
_PLACEHOLDER_LITERAL_RE = re.compile(r"\[num-[a-z-]+\]", re.IGNORECASE)


def _protected_spans(text: str) -> list[tuple[tuple[int, int], str, str | None]]:
    """(span, raw, canonical key) for every numeral and every placeholder-shaped
    literal, by span start. Literals have no key; they are masked like values
    so that unmask hands them back verbatim."""
    spans = [(n.span, n.raw, canonical_key(n)) for n in find_numerals(text)]
    spans.extend((m.span(), m.group(0), None) for m in _PLACEHOLDER_LITERAL_RE.finditer(text))
    return sorted(spans, key=lambda item: item[0])


def _mask_with_names(
    text: str, spans: list[tuple[tuple[int, int], str, str | None]], names: list[str],
) -> MaskedSentence:
    pieces: list[str] = []
    cursor = 0
    for ((start, end), _, _), name in zip(spans, names):
        pieces.append(text[cursor:start])
        pieces.append(placeholder_token(name))
        cursor = end
    pieces.append(text[cursor:])
    return MaskedSentence(
        masked_text="".join(pieces),
        placeholders=[(name, raw) for (_, raw, _), name in zip(spans, names)],
    )


def mask_numerals(sentence: Sentence) -> MaskedSentence:
    """Replace numerals left to right with [num-one], [num-two], …

    Currency symbols and magnitude words travel inside the raw numeral.
    Placeholder-shaped text already in the sentence gets a placeholder of its
    own.
    """
    spans = _protected_spans(sentence.text)
    names = [placeholder_name(i) for i in range(1, len(spans) + 1)]
    return _mask_with_names(sentence.text, spans, names)


def mask_numerals_aligned(target: Sentence, source: MaskedSentence) -> MaskedSentence:
    """Mask ``target`` reusing the names ``source`` gave to the same values.

    A target numeral takes the first unused source placeholder with the same
    canonical key; numerals with no counterpart get fresh names numbered after
    the source's placeholders.
    """
    available: dict[str, list[str]] = {}
    for name, raw in source.placeholders:
        parsed = parse_numeral(raw)
        if parsed is not None:
            available.setdefault(canonical_key(parsed), []).append(name)

    spans = _protected_spans(target.text)
    names: list[str] = []
    next_fresh = len(source.placeholders) + 1
    for _, _, key in spans:
        candidates = available.get(key) if key is not None else None
        if candidates:
            names.append(candidates.pop(0))
        else:
            names.append(placeholder_name(next_fresh))
            next_fresh += 1
    return _mask_with_names(target.text, spans, names)


def unmask(masked: MaskedSentence, decoded: str) -> UnmaskResult:
    """Put raw numerals back in place of every placeholder in ``decoded``.

    Raises UnknownPlaceholder when ``decoded`` names a placeholder ``masked``
    does not hold. Placeholders that ``decoded`` left out come back in
    ``dropped``.
    """
    raw_by_name = dict(masked.placeholders)
    seen = placeholder_names_in(decoded)
    unknown = sorted({name for name in seen if name not in raw_by_name})
    if unknown:
        raise UnknownPlaceholder(unknown)

    text = _PLACEHOLDER_RE.sub(lambda m: raw_by_name[m.group(1)], decoded)
    present = set(seen)
    dropped = [name for name, _ in masked.placeholders if name not in present]
    return UnmaskResult(text=text, dropped=dropped)
