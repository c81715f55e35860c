"""Word lists, the 28-condition catalog, and letter-string validation.

The condition catalog maps each prime type to its transformation codes.
Codes are written relative to the abstract target ``123456``: digit *i*
copies the target's *i*-th letter, ``d`` stands for a random letter not
found in the target (distinct across ``d`` slots within one code), and
``D`` stands for one such random letter reused in every ``D`` slot.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterator, Sequence

ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"

FPP_SIZE = 420
FPP_WORD_LENGTH = 6


class LexiconError(ValueError):
    """Raised when a word list violates lexicon invariants."""


@dataclass(frozen=True)
class LetterString:
    """A validated A-Z letter sequence; comparisons are case-insensitive."""

    chars: str
    display_case: str = "upper"

    def __post_init__(self) -> None:
        if not self.chars:
            raise LexiconError("letter string must be non-empty")
        folded = self.chars.upper()
        bad = [c for c in folded if c not in ALPHABET]
        if bad:
            raise LexiconError(
                f"letter string {self.chars!r} contains non-letter char {bad[0]!r}"
            )
        object.__setattr__(self, "chars", folded)

    def __str__(self) -> str:
        return self.chars if self.display_case == "upper" else self.chars.lower()

    def __len__(self) -> int:
        return len(self.chars)

    def __iter__(self) -> Iterator[str]:
        return iter(self.chars)

    def has_repeats(self) -> bool:
        return len(set(self.chars)) != len(self.chars)


class LetterPolicy(enum.Enum):
    """How a condition's codes use random substitute letters."""

    NONE = "none"            # digits only
    FRESH_DISTINCT = "fresh_distinct"  # 'd' slots: distinct letters outside target
    REPEATED = "repeated"    # 'D' slots: one letter outside target, reused
    MIXED = "mixed"


@dataclass(frozen=True)
class PrimeCondition:
    """One of the 28 prime types: identity through unrelated-arbitrary."""

    index: int
    long_name: str
    short_code: str
    codes: tuple[str, ...]
    letter_policy: LetterPolicy

    def __post_init__(self) -> None:
        if not 1 <= self.index <= 28:
            raise LexiconError(f"condition index {self.index} outside 1-28")
        if not self.codes:
            raise LexiconError(f"condition {self.short_code}: empty code list")
        for code in self.codes:
            if not code or any(ch not in "123456dD" for ch in code):
                raise LexiconError(
                    f"condition {self.short_code}: malformed code {code!r}"
                )


# Catalog rows: (long name, short code, slash-separated codes).
# Row order is the priming-size order used throughout the reference tables.
_CATALOG_ROWS: tuple[tuple[str, str, str], ...] = (
    ("Identity", "ID", "123456"),
    ("Final deletion", "DL-1F", "12345"),
    ("Suffix", "IL-1F", "123456d"),
    ("Final transposition", "TL56", "123465"),
    ("Medial transposition", "TL-M", "132456/124356/123546"),
    ("Medial deletion", "DL-1M", "13456/12456/12356/12346"),
    ("Final substitution", "SN-F", "12345d"),
    ("Initial substitution", "SN-I", "d23456"),
    ("Initial transposition", "TL12", "213456"),
    ("Central insertion", "IL-1M", "123d456"),
    ("Prefix", "IL-1I", "d123456"),
    ("Half", "SUB3", "123/456"),
    ("Repeated letter", "IL-2MR", "123DD456"),
    ("Central double deletion", "DL-2M", "1256"),
    ("Medial substitution", "SN-M", "1d3456/12d456/123d56/1234d6"),
    ("Neighbour once removed", "N1R", "12d356/13d456/124d56/123d46"),
    ("2-apart transposition", "NATL-24/35", "143256/125436"),
    ("Central double insertion", "IL-2M", "123dd456"),
    ("All transposed", "T-All", "214365"),
    ("Central double substitution", "DSN-M", "12dd56"),
    ("Reversed halves", "RH", "321654"),
    ("3-apart transposition", "NATL25", "153426"),
    ("Interleaved halves", "IH", "415263"),
    ("Transposed halves", "TH", "456123"),
    ("Unrelated pseudoword", "ALD-PW", "dddddd"),
    ("Reversed except initial", "RF", "165432"),
    ("Central quadruple substitution", "EL", "1dddd6"),
    ("Unrelated arbitrary", "ALD-ARB", "dddddd"),
)


def _policy_for(codes: Sequence[str]) -> LetterPolicy:
    has_d = any("d" in c for c in codes)
    has_rep = any("D" in c for c in codes)
    if has_d and has_rep:
        return LetterPolicy.MIXED
    if has_rep:
        return LetterPolicy.REPEATED
    if has_d:
        return LetterPolicy.FRESH_DISTINCT
    return LetterPolicy.NONE


@dataclass(frozen=True)
class ConditionCatalog:
    """All 28 prime conditions, indexable by 1-based row or short code."""

    conditions: tuple[PrimeCondition, ...]

    def __getitem__(self, key: int | str) -> PrimeCondition:
        if isinstance(key, int):
            if not 1 <= key <= len(self.conditions):
                raise KeyError(key)
            return self.conditions[key - 1]
        for cond in self.conditions:
            if cond.short_code == key:
                return cond
        raise KeyError(key)

    def __iter__(self) -> Iterator[PrimeCondition]:
        return iter(self.conditions)

    def __len__(self) -> int:
        return len(self.conditions)

    def short_codes(self) -> list[str]:
        return [c.short_code for c in self.conditions]


def catalog() -> ConditionCatalog:
    """Return the constant 28-condition catalog."""
    conds = tuple(
        PrimeCondition(
            index=i,
            long_name=name,
            short_code=short,
            codes=tuple(codes.split("/")),
            letter_policy=_policy_for(codes.split("/")),
        )
        for i, (name, short, codes) in enumerate(_CATALOG_ROWS, start=1)
    )
    return ConditionCatalog(conditions=conds)


@dataclass(frozen=True)
class TargetLexicon:
    """An ordered, validated list of target words."""

    targets: tuple[LetterString, ...]
    source: str = ""

    def __len__(self) -> int:
        return len(self.targets)

    def __iter__(self) -> Iterator[LetterString]:
        return iter(self.targets)

    def words(self) -> list[str]:
        return [t.chars for t in self.targets]


def load_lexicon(path: str | Path, mode: str = "fpp_strict") -> TargetLexicon:
    """Load a newline-delimited word list.

    ``fpp_strict`` enforces exactly 420 six-letter words with no repeated
    letters and no duplicate entries; ``free`` accepts any valid letter
    strings (still rejecting duplicates).
    """
    if mode not in ("fpp_strict", "free"):
        raise LexiconError(f"unknown lexicon mode {mode!r}")
    path = Path(path)
    words: list[LetterString] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        word = raw.strip()
        if not word:
            continue
        ls = LetterString(word)  # raises on non-letter chars
        if ls.chars in seen:
            raise LexiconError(f"line {lineno}: duplicate word {word!r}")
        if mode == "fpp_strict":
            if len(ls) != FPP_WORD_LENGTH:
                raise LexiconError(
                    f"line {lineno}: word {word!r} violates strict rule: "
                    f"length must be {FPP_WORD_LENGTH}"
                )
            if ls.has_repeats():
                raise LexiconError(
                    f"line {lineno}: word {word!r} violates strict rule: "
                    "contains a repeated letter"
                )
        seen.add(ls.chars)
        words.append(ls)
    if mode == "fpp_strict" and len(words) != FPP_SIZE:
        raise LexiconError(
            f"strict lexicon requires exactly {FPP_SIZE} words, got {len(words)}"
        )
    return TargetLexicon(targets=tuple(words), source=str(path))


def save_lexicon(lexicon: TargetLexicon, path: str | Path) -> None:
    """Write one word per line (round-trips with load_lexicon)."""
    Path(path).write_text(
        "".join(t.chars + "\n" for t in lexicon.targets), encoding="utf-8"
    )


def bundled_lexicon_path() -> Path:
    """Path of the bundled 420-word six-letter target list."""
    return Path(str(resources.files("orthoprime").joinpath("data/fpp_words.txt")))


def load_bundled_lexicon() -> TargetLexicon:
    return load_lexicon(bundled_lexicon_path(), mode="fpp_strict")
