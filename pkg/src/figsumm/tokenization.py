"""Tokenization, stopword filtering, and stemming.

All metrics and length accounting in this package run on the same token
stream: text is split on whitespace and punctuation boundaries, keeping
decimal numbers (``3.5``) and apostrophe contractions (``don't``) intact,
and emitting each punctuation character as its own token.  Optional
processing always applies in a fixed order: lowercase, punctuation drop,
stopword drop, stemming.

Reported token lengths come from :func:`token_length`, which counts the
raw split including punctuation.  Scoring configurations never change a
reported length.

The stemmer is the classic Porter (1980) algorithm.  Stopword lists are
versioned files shipped with the package so results stay reproducible;
``english-v1`` is the default list.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

__all__ = [
    "TokenizerConfig",
    "BASE_CONFIG",
    "SCORING_CONFIG",
    "CONTENT_CONFIG",
    "StopwordListError",
    "available_stopword_lists",
    "load_stopwords",
    "tokenize",
    "token_length",
    "porter_stem",
]

# Decimal numbers first so "0.05" stays one token, then word characters
# (with optional apostrophe continuations), then single punctuation marks.
_TOKEN_RE = re.compile(r"\d+(?:\.\d+)+|\w+(?:'\w+)*|[^\w\s]")

_WORD_RE = re.compile(r"\w")


class StopwordListError(ValueError):
    """Raised when a stopword list id does not resolve to a shipped file."""


def available_stopword_lists() -> list[str]:
    """Return the ids of the stopword lists shipped with the package."""
    package = resources.files(__package__) / "stopwords"
    names = [p.name[: -len(".txt")] for p in package.iterdir() if p.name.endswith(".txt")]
    return sorted(names)


def load_stopwords(list_id: str) -> frozenset[str]:
    """Load a versioned stopword list by id (for example ``english-v1``)."""
    package = resources.files(__package__) / "stopwords" / f"{list_id}.txt"
    try:
        text = package.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise StopwordListError(
            f"unknown stopword list {list_id!r}; available: {', '.join(available_stopword_lists())}"
        ) from None
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


@dataclass(frozen=True)
class TokenizerConfig:
    """Switches applied, in order, after the base split.

    ``stopword_list`` names a shipped list; filtering stopwords only makes
    sense on word tokens, so it requires ``drop_punctuation``.
    """

    lowercase: bool = True
    drop_punctuation: bool = False
    stopword_list: str | None = None
    stem: bool = False

    def __post_init__(self) -> None:
        if self.stopword_list is not None and not self.drop_punctuation:
            raise ValueError("stopword filtering requires drop_punctuation=True")


#: Raw split; used for all reported token lengths.
BASE_CONFIG = TokenizerConfig()
#: Lowercase + stem on word tokens; the configuration under which overlap
#: metrics (ROUGE, BLEU) are computed.
SCORING_CONFIG = TokenizerConfig(lowercase=True, drop_punctuation=True, stem=True)
#: Content words only: scoring config plus stopword removal; the
#: configuration under which coverage alignments are computed.
CONTENT_CONFIG = TokenizerConfig(
    lowercase=True, drop_punctuation=True, stopword_list="english-v1", stem=True
)

_STOPWORD_CACHE: dict[str, frozenset[str]] = {}


def tokenize(text: str, config: TokenizerConfig = BASE_CONFIG) -> list[str]:
    """Split ``text`` into tokens and apply the configured processing."""
    tokens = _TOKEN_RE.findall(text)
    if config.lowercase:
        tokens = [t.lower() for t in tokens]
    if config.drop_punctuation:
        tokens = [t for t in tokens if _WORD_RE.search(t)]
    if config.stopword_list is not None:
        stopwords = _STOPWORD_CACHE.get(config.stopword_list)
        if stopwords is None:
            stopwords = load_stopwords(config.stopword_list)
            _STOPWORD_CACHE[config.stopword_list] = stopwords
        tokens = [t for t in tokens if t.lower() not in stopwords]
    if config.stem:
        tokens = [porter_stem(t) for t in tokens]
    return tokens


def token_length(text: str) -> int:
    """Raw token count (punctuation included, before any filtering)."""
    return len(_TOKEN_RE.findall(text))


# ---------------------------------------------------------------------------
# Porter stemmer (classic 1980 rule tables)
# ---------------------------------------------------------------------------

_VOWELS = frozenset("aeiou")


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Count vowel-consonant sequences (the m of the rule conditions)."""
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        if _is_consonant(stem, i):
            if prev_vowel:
                m += 1
            prev_vowel = False
        else:
            prev_vowel = True
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _is_consonant(stem, i) for i in range(len(stem)))


def _ends_double_consonant(word: str) -> bool:
    return (
        len(word) >= 2
        and word[-1] == word[-2]
        and _is_consonant(word, len(word) - 1)
    )


def _ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    return (
        _is_consonant(word, len(word) - 3)
        and not _is_consonant(word, len(word) - 2)
        and _is_consonant(word, len(word) - 1)
        and word[-1] not in "wxy"
    )


_STEP2_RULES = (
    ("ational", "ate"),
    ("tional", "tion"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("izer", "ize"),
    ("abli", "able"),
    ("alli", "al"),
    ("entli", "ent"),
    ("eli", "e"),
    ("ousli", "ous"),
    ("ization", "ize"),
    ("ation", "ate"),
    ("ator", "ate"),
    ("alism", "al"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("biliti", "ble"),
)

_STEP3_RULES = (
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ful", ""),
    ("ness", ""),
)

_STEP4_SUFFIXES = (
    "ement",
    "ance",
    "ence",
    "able",
    "ible",
    "ment",
    "ion",
    "ism",
    "ate",
    "iti",
    "ous",
    "ive",
    "ize",
    "ant",
    "ent",
    "al",
    "er",
    "ic",
    "ou",
)


def _replace_longest(word: str, rules, condition) -> str:
    """Apply the longest matching rule whose condition holds on the stem.

    Following the original algorithm, only the longest matching suffix is
    considered: if its condition fails, no shorter suffix is tried.
    """
    best = None
    for suffix, replacement in rules:
        if word.endswith(suffix) and (best is None or len(suffix) > len(best[0])):
            best = (suffix, replacement)
    if best is None:
        return word
    stem = word[: -len(best[0])]
    if condition(stem):
        return stem + best[1]
    return word


def porter_stem(word: str) -> str:
    """Stem a single lowercase-insensitive word with the classic algorithm."""
    word = word.lower()
    if len(word) <= 2 or not word.isalpha():
        return word

    # Step 1a: plural forms.
    if word.endswith("sses"):
        word = word[:-2]
    elif word.endswith("ies"):
        word = word[:-2]
    elif not word.endswith("ss") and word.endswith("s"):
        word = word[:-1]

    # Step 1b: -eed / -ed / -ing.
    if word.endswith("eed"):
        if _measure(word[:-3]) > 0:
            word = word[:-1]
    else:
        cleanup = False
        if word.endswith("ed") and _has_vowel(word[:-2]):
            word = word[:-2]
            cleanup = True
        elif word.endswith("ing") and _has_vowel(word[:-3]):
            word = word[:-3]
            cleanup = True
        if cleanup:
            if word.endswith(("at", "bl", "iz")):
                word += "e"
            elif _ends_double_consonant(word) and word[-1] not in "lsz":
                word = word[:-1]
            elif _measure(word) == 1 and _ends_cvc(word):
                word += "e"

    # Step 1c: terminal y.
    if word.endswith("y") and _has_vowel(word[:-1]):
        word = word[:-1] + "i"

    # Steps 2 and 3: derivational suffixes, m > 0.
    word = _replace_longest(word, _STEP2_RULES, lambda stem: _measure(stem) > 0)
    word = _replace_longest(word, _STEP3_RULES, lambda stem: _measure(stem) > 0)

    # Step 4: residual suffixes, m > 1 (-ion additionally needs s/t).
    best = None
    for suffix in _STEP4_SUFFIXES:
        if word.endswith(suffix) and (best is None or len(suffix) > len(best)):
            best = suffix
    if best is not None:
        stem = word[: -len(best)]
        if _measure(stem) > 1 and (best != "ion" or stem.endswith(("s", "t"))):
            word = stem

    # Step 5a: terminal e.
    if word.endswith("e"):
        stem = word[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            word = stem

    # Step 5b: -ll with m > 1.
    if _measure(word) > 1 and _ends_double_consonant(word) and word.endswith("l"):
        word = word[:-1]

    return word
