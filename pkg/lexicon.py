"""Static reference data shared by the text pipeline.

Everything here is versioned data, not logic: the abbreviation lexicon used by
the sentence splitter, the stopword list behind salient-unigram statistics, and
the rewrite rule table of the rule-based paraphraser. Bump the matching
``*_VERSION`` constant whenever an entry changes so that reports and artifacts
produced with different tables can be told apart.
"""

from __future__ import annotations

import re

ABBREVIATIONS_VERSION = "1"
STOPWORDS_VERSION = "1"
REWRITE_RULES_VERSION = "2"

# ---------------------------------------------------------------------------
# Abbreviation lexicon
# ---------------------------------------------------------------------------
# Entries are lowercase and stored without their trailing period. A period that
# closes one of these words never ends a sentence.
# ---------------------------------------------------------------------------

ABBREVIATIONS: list[str] = [
    # corporate suffixes
    "inc", "corp", "ltd", "co", "plc", "llc", "bros",
    # titles
    "mr", "mrs", "ms", "dr", "jr", "sr", "prof",
    # places and comparisons
    "u.s", "u.k", "vs", "approx", "e.g", "i.e",
    # fiscal quarters
    "q1", "q2", "q3", "q4",
    # months
    "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec",
]

# ---------------------------------------------------------------------------
# Stopwords (English, fixed list)
# ---------------------------------------------------------------------------

STOPWORDS: list[str] = [
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your",
    "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she", "her",
    "hers", "herself", "it", "its", "itself", "they", "them", "their", "theirs",
    "themselves", "what", "which", "who", "whom", "this", "that", "these", "those",
    "am", "is", "are", "was", "were", "be", "been", "being", "have", "has", "had",
    "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if",
    "or", "because", "as", "until", "while", "of", "at", "by", "for", "with",
    "about", "against", "between", "into", "through", "during", "before", "after",
    "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over",
    "under", "again", "further", "then", "once", "here", "there", "when", "where",
    "why", "how", "all", "any", "both", "each", "few", "more", "most", "other",
    "some", "such", "no", "nor", "not", "only", "own", "same", "so", "than", "too",
    "very", "s", "t", "can", "will", "just", "don", "should", "now", "d", "ll",
    "m", "o", "re", "ve", "y", "ain", "aren", "couldn", "didn", "doesn", "hadn",
    "hasn", "haven", "isn", "ma", "mightn", "mustn", "needn", "shan", "shouldn",
    "wasn", "weren", "won", "wouldn", "i'm", "we're", "we've", "it's", "that's",
    "also", "would", "could",
]

# ---------------------------------------------------------------------------
# Rewrite rule table (telegram-style bullets)
# ---------------------------------------------------------------------------
# QUARTER_WORDS  – ordinal word → quarter number
# OPENERS        – leading discourse openers dropped from a bullet; longest
#                  entries are tried first and one-word entries need a comma
# SUBSTITUTIONS  – whole-phrase replacements applied in listed order outside
#                  placeholders; an empty replacement deletes the phrase
#
# "earnings per diluted share" is absent and stays verbatim.
# ---------------------------------------------------------------------------

QUARTER_WORDS: dict[str, int] = {"first": 1, "second": 2, "third": 3, "fourth": 4}

OPENERS: list[str] = [
    "i'm pleased to report that",
    "i am pleased to report that",
    "we are pleased to report that",
    "i'm happy to report that",
    "as you can see",
    "as a result",
    "turning to",
    "moving to",
    "looking at",
    "in addition",
    "additionally",
    "importantly",
    "overall",
    "finally",
    "lastly",
    "also",
    "and",
    "now",
    "so",
    "in the",
]

SUBSTITUTIONS: list[tuple[str, str]] = [
    ("increased by", "rose"),
    ("decreased by", "fell"),
    ("rose by", "rose"),
    ("fell by", "fell"),
    ("grew by", "grew"),
    ("declined by", "declined"),
    ("we now expect", "sees"),
    ("we expect", "sees"),
    ("full-year", "fy"),
    ("full year", "fy"),
    ("fiscal year", "fy"),
    ("quarterly", "qtrly"),
    ("our", ""),
]

# ---------------------------------------------------------------------------
# Lookup helpers
# ---------------------------------------------------------------------------

_ABBREVIATION_SET: frozenset[str] = frozenset(ABBREVIATIONS)
_STOPWORD_SET: frozenset[str] = frozenset(STOPWORDS)


def is_abbreviation(word: str) -> bool:
    """True when ``word`` (with or without its closing period) is in the lexicon."""
    return word.lower().rstrip(".") in _ABBREVIATION_SET


def is_stopword(token: str) -> bool:
    return token.lower() in _STOPWORD_SET


# ---------------------------------------------------------------------------
# Derived constants, computed once at import time
# ---------------------------------------------------------------------------

def _alternation(entries: list[str]) -> str:
    return "|".join(re.escape(e) for e in sorted(entries, key=len, reverse=True))


# Single-word openers only count when a comma closes them: "So, revenue rose"
# loses "So," but "So far, revenue rose" is left alone.
OPENER_PATTERN: re.Pattern[str] = re.compile(
    r"^(?:(?:"
    + _alternation([o for o in OPENERS if " " in o])
    + r")\b,?|(?:"
    + _alternation([o for o in OPENERS if " " not in o])
    + r"),)\s*"
)

SUBSTITUTION_PATTERNS: list[tuple[re.Pattern[str], str]] = [
    (re.compile(rf"\b{re.escape(phrase)}\b"), replacement) for phrase, replacement in SUBSTITUTIONS
]
