"""Transcript normalization.

Rules, applied in order:

1. NFC-normalize; map curly/modifier apostrophes (U+2018, U+2019, U+02BC)
   to ``'`` and curly double quotes (U+201C, U+201D, U+201E) to ``"``.
2. Every character whose Unicode category is punctuation (P*) or symbol (S*)
   becomes a space, except ``'`` (kept inside tokens) and ``"`` (kept as a
   standalone token). Hyphens, dashes and slashes therefore act as word
   separators.
3. Split on whitespace.
4. Tokens made only of ASCII uppercase letters with length
   >= ``abbreviation_min_len`` are split into single letters ("TV" -> "T V").
5. Lowercase (then NFC again, since lowercasing can decompose).
6. Optionally expand contractions from a two-column mapping table.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

__all__ = [
    "NormConfig",
    "DEFAULT_CONFIG",
    "normalize",
    "normalize_text",
    "detokenize",
    "load_contractions",
    "is_removed_char",
]

_APOSTROPHES = {"‘": "'", "’": "'", "ʼ": "'"}
_DOUBLE_QUOTES = {"“": '"', "”": '"', "„": '"'}
_KEPT = frozenset("'\"")
_ABBREV = re.compile(r"[A-Z]+")


@dataclass(frozen=True)
class NormConfig:
    expand_contractions: bool = False
    abbreviation_min_len: int = 2
    contractions_path: str | None = None

    def __post_init__(self):
        if self.abbreviation_min_len < 2:
            raise ValueError(
                f"abbreviation_min_len must be >= 2, got {self.abbreviation_min_len}"
            )


DEFAULT_CONFIG = NormConfig()


def is_removed_char(ch: str) -> bool:
    """True if ``ch`` is in the punctuation-removal set."""
    if ch in _KEPT:
        return False
    return unicodedata.category(ch)[0] in ("P", "S")


@lru_cache(maxsize=8)
def load_contractions(path: str | None = None) -> dict[str, tuple[str, ...]]:
    """Read a ``contraction<TAB>expansion`` table; ``#`` starts a comment."""
    if path is None:
        text = resources.files("asrfix").joinpath("data/contractions.tsv").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    table = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"contraction table line {lineno}: expected 2 tab-separated columns")
        key = _normalize_tokens(parts[0], DEFAULT_CONFIG)
        value = _normalize_tokens(parts[1], DEFAULT_CONFIG)
        if len(key) != 1 or not value:
            raise ValueError(f"contraction table line {lineno}: bad entry {line!r}")
        table[key[0]] = tuple(value)
    return table


def _normalize_tokens(text: str, cfg: NormConfig) -> list[str]:
    text = unicodedata.normalize("NFC", text)
    chars = []
    for ch in text:
        ch = _APOSTROPHES.get(ch, ch)
        ch = _DOUBLE_QUOTES.get(ch, ch)
        if ch == '"':
            chars.append(' " ')
        elif is_removed_char(ch):
            chars.append(" ")
        else:
            chars.append(ch)
    tokens = []
    for tok in "".join(chars).split():
        if len(tok) >= cfg.abbreviation_min_len and _ABBREV.fullmatch(tok):
            tokens.extend(tok)
        else:
            tokens.append(tok)
    out = []
    for tok in tokens:
        # lower() may introduce combining marks; re-split in case of odd whitespace
        out.extend(unicodedata.normalize("NFC", tok.lower()).split())
    return out


def normalize(text: str, cfg: NormConfig = DEFAULT_CONFIG) -> list[str]:
    """Normalize raw text into a list of word tokens.

    >>> normalize("watch TV tonight")
    ['watch', 't', 'v', 'tonight']
    >>> normalize("Hello, world!")
    ['hello', 'world']
    """
    tokens = _normalize_tokens(text, cfg)
    if cfg.expand_contractions:
        table = load_contractions(cfg.contractions_path)
        expanded = []
        for tok in tokens:
            expanded.extend(table.get(tok, (tok,)))
        tokens = expanded
    return tokens


def normalize_text(text: str, cfg: NormConfig = DEFAULT_CONFIG) -> str:
    return detokenize(normalize(text, cfg))


def detokenize(tokens) -> str:
    for tok in tokens:
        if not tok or any(c.isspace() for c in tok):
            raise ValueError(f"invalid token {tok!r}: tokens must be nonempty and whitespace-free")
    return " ".join(tokens)
